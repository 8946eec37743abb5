#include "gridcurio/harness/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "gridcurio/errors.hpp"

namespace gridcurio {

namespace {

constexpr int kColumns = 11;

}  // namespace

MetricsWriter::MetricsWriter(const std::string& path) {
  file_ = std::fopen(path.c_str(), "w");
  if (file_ == nullptr) throw UsageError("metrics: cannot open " + path);
  std::fprintf(file_, "%s\n", kMetricsHeader);
  std::fflush(file_);
}

MetricsWriter::~MetricsWriter() {
  if (file_ != nullptr) std::fclose(file_);
}

void MetricsWriter::append(const MetricsRow& row) {
  if (row.global_step <= last_step_) throw UsageError("metrics: global_step must increase");
  last_step_ = row.global_step;
  std::fprintf(file_, "%s\n", format_row(row).c_str());
  std::fflush(file_);
}

std::string format_row(const MetricsRow& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%ld,%ld,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.3f", r.global_step,
                r.episodes_completed, r.mean_return, r.mean_episode_length, r.mean_intrinsic_reward, r.forward_loss,
                r.inverse_loss, r.policy_loss, r.value_loss, r.entropy, r.wall_clock_seconds);
  return buf;
}

std::vector<MetricsRow> read_metrics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("metrics: cannot open " + path, 0);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("metrics: empty file", 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kMetricsHeader) throw ParseError("metrics: unexpected header", 1);

  std::vector<MetricsRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> v;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        v.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ParseError("metrics: non-numeric field '" + cell + "'", line_no);
      }
    }
    if (static_cast<int>(v.size()) != kColumns) {
      throw ParseError("metrics: expected " + std::to_string(kColumns) + " columns", line_no);
    }
    MetricsRow r{static_cast<long>(v[0]), static_cast<long>(v[1]), v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9],
                 v[10]};
    if (!rows.empty() && r.global_step <= rows.back().global_step) {
      throw ParseError("metrics: global_step not increasing", line_no);
    }
    rows.push_back(r);
  }
  return rows;
}

std::optional<long> steps_to_convergence(const std::vector<MetricsRow>& rows, double optimal_return,
                                         double threshold, int window) {
  if (window < 1) throw UsageError("steps_to_convergence: window must be >= 1");
  const double target = threshold * optimal_return;
  std::optional<long> since;
  double sum = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    sum += rows[i].mean_return;
    if (i >= static_cast<std::size_t>(window)) sum -= rows[i - static_cast<std::size_t>(window)].mean_return;
    const double smoothed = sum / static_cast<double>(std::min<std::size_t>(i + 1, static_cast<std::size_t>(window)));
    if (smoothed >= target) {
      if (!since) since = rows[i].global_step;
    } else {
      since.reset();
    }
  }
  return since;
}

std::optional<long> steps_to_convergence(const std::string& path, double optimal_return, double threshold,
                                         int window) {
  return steps_to_convergence(read_metrics(path), optimal_return, threshold, window);
}

}  // namespace gridcurio

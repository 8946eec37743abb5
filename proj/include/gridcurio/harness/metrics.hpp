#pragma once

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

namespace gridcurio {

struct MetricsRow {
  long global_step = 0;
  long episodes_completed = 0;
  double mean_return = 0.0;
  double mean_episode_length = 0.0;
  double mean_intrinsic_reward = 0.0;
  double forward_loss = 0.0;
  double inverse_loss = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double wall_clock_seconds = 0.0;
};

inline constexpr const char* kMetricsHeader =
    "global_step,episodes_completed,mean_return,mean_episode_length,mean_intrinsic_reward,forward_loss,"
    "inverse_loss,policy_loss,value_loss,entropy,wall_clock_seconds";

/// Append-only CSV writer; every row is flushed.
class MetricsWriter {
 public:
  explicit MetricsWriter(const std::string& path);
  ~MetricsWriter();
  MetricsWriter(const MetricsWriter&) = delete;
  MetricsWriter& operator=(const MetricsWriter&) = delete;

  /// Throws UsageError if global_step does not increase.
  void append(const MetricsRow& row);

 private:
  std::FILE* file_ = nullptr;
  long last_step_ = -1;
};

std::string format_row(const MetricsRow& row);

/// Throws ParseError (with line number) on a malformed file.
std::vector<MetricsRow> read_metrics(const std::string& path);

/// First logged global_step from which the mean over the trailing `window`
/// rows of mean_return stays >= threshold * optimal_return through the last
/// row; nullopt if that never happens.
std::optional<long> steps_to_convergence(const std::vector<MetricsRow>& rows, double optimal_return,
                                         double threshold, int window = 1);
std::optional<long> steps_to_convergence(const std::string& metrics_path, double optimal_return, double threshold,
                                         int window = 1);

}  // namespace gridcurio

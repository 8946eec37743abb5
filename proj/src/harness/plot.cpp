#include "gridcurio/harness/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "gridcurio/errors.hpp"
#include "gridcurio/harness/metrics.hpp"

namespace gridcurio {

namespace {

constexpr double kWidth = 800, kHeight = 500;
constexpr double kLeft = 70, kRight = 180, kTop = 30, kBottom = 60;
const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

struct Series {
  std::vector<double> x, mean, std;
  int files = 0;
};

/// Value of a run at `step`: its row at or before that step; runs that have
/// not logged anything yet contribute nothing.
const MetricsRow* at_or_before(const std::vector<MetricsRow>& rows, long step) {
  auto it = std::upper_bound(rows.begin(), rows.end(), step,
                             [](long s, const MetricsRow& r) { return s < r.global_step; });
  if (it == rows.begin()) return nullptr;
  return &*std::prev(it);
}

Series aggregate(const std::vector<std::vector<MetricsRow>>& runs) {
  std::set<long> steps;
  for (const auto& rows : runs) {
    for (const auto& r : rows) steps.insert(r.global_step);
  }
  Series s;
  s.files = static_cast<int>(runs.size());
  for (long step : steps) {
    std::vector<double> ys;
    for (const auto& rows : runs) {
      if (const MetricsRow* r = at_or_before(rows, step)) ys.push_back(r->mean_return);
    }
    double m = 0;
    for (double y : ys) m += y;
    m /= static_cast<double>(ys.size());
    double v = 0;
    for (double y : ys) v += (y - m) * (y - m);
    s.x.push_back(static_cast<double>(step));
    s.mean.push_back(m);
    s.std.push_back(std::sqrt(v / static_cast<double>(ys.size())));
  }
  return s;
}

}  // namespace

void emit_plot(const std::vector<std::string>& files, const std::vector<std::string>& labels, double optimal_return,
               const std::string& out_path) {
  if (files.empty()) throw UsageError("emit_plot: no metrics files");
  if (labels.size() != files.size()) throw UsageError("emit_plot: need one label per metrics file");

  std::vector<std::string> order;
  std::map<std::string, std::vector<std::vector<MetricsRow>>> grouped;
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (!grouped.count(labels[i])) order.push_back(labels[i]);
    grouped[labels[i]].push_back(read_metrics(files[i]));
  }

  double x_max = 1, y_max = std::max(1.0, optimal_return), y_min = 0;
  std::map<std::string, Series> series;
  for (const auto& label : order) {
    Series s = aggregate(grouped[label]);
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      x_max = std::max(x_max, s.x[k]);
      y_max = std::max(y_max, s.mean[k] + s.std[k]);
      y_min = std::min(y_min, s.mean[k] - s.std[k]);
    }
    series[label] = std::move(s);
  }

  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + pw * x / x_max; };
  auto py = [&](double y) { return kTop + ph * (1.0 - (y - y_min) / (y_max - y_min)); };

  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  o << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  o << "<g id=\"axes\" stroke=\"black\" stroke-width=\"1\">\n";
  o << "<line x1=\"" << kLeft << "\" y1=\"" << num(py(y_min)) << "\" x2=\"" << kLeft + pw << "\" y2=\""
    << num(py(y_min)) << "\"/>\n";
  o << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kTop + ph << "\"/>\n";
  o << "</g>\n<g id=\"ticks\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int k = 0; k <= 5; ++k) {
    const double xv = x_max * k / 5.0, yv = y_min + (y_max - y_min) * k / 5.0;
    char xs[32], ys[32];
    std::snprintf(xs, sizeof xs, "%.3gM", xv / 1e6);
    std::snprintf(ys, sizeof ys, "%.2f", yv);
    o << "<text x=\"" << num(px(xv)) << "\" y=\"" << num(kTop + ph + 18) << "\" text-anchor=\"middle\">" << xs
      << "</text>\n";
    o << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(py(yv) + 4) << "\" text-anchor=\"end\">" << ys
      << "</text>\n";
  }
  o << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 15)
    << "\" text-anchor=\"middle\">global step</text>\n";
  o << "<text x=\"18\" y=\"" << num(kTop + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
    << num(kTop + ph / 2) << ")\">mean return</text>\n</g>\n";

  o << "<line id=\"optimal\" x1=\"" << kLeft << "\" y1=\"" << num(py(optimal_return)) << "\" x2=\"" << kLeft + pw
    << "\" y2=\"" << num(py(optimal_return)) << "\" stroke=\"black\" stroke-dasharray=\"8,5\"/>\n";

  for (std::size_t li = 0; li < order.size(); ++li) {
    const std::string& label = order[li];
    const Series& s = series[label];
    const char* color = kPalette[li % (sizeof kPalette / sizeof kPalette[0])];
    if (s.files > 1) {
      o << "<polygon class=\"band\" fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
      for (std::size_t k = 0; k < s.x.size(); ++k) o << num(px(s.x[k])) << "," << num(py(s.mean[k] + s.std[k])) << " ";
      for (std::size_t k = s.x.size(); k-- > 0;) o << num(px(s.x[k])) << "," << num(py(s.mean[k] - s.std[k])) << " ";
      o << "\"/>\n";
    }
    const bool dotted = label.find("partial") != std::string::npos;
    o << "<polyline class=\"series\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\""
      << (dotted ? " stroke-dasharray=\"2,3\"" : "") << " points=\"";
    for (std::size_t k = 0; k < s.x.size(); ++k) o << num(px(s.x[k])) << "," << num(py(s.mean[k])) << " ";
    o << "\"/>\n";
    const double ly = kTop + 14 + 20.0 * static_cast<double>(li);
    o << "<line x1=\"" << num(kLeft + pw + 12) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(kLeft + pw + 36)
      << "\" y2=\"" << num(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << num(kLeft + pw + 42) << "\" y=\"" << num(ly + 4)
      << "\" font-family=\"sans-serif\" font-size=\"11\">" << xml_escape(label) << "</text>\n";
  }
  o << "</svg>\n";

  std::ofstream out(out_path);
  if (!out) throw UsageError("emit_plot: cannot write " + out_path);
  out << o.str();
}

}  // namespace gridcurio

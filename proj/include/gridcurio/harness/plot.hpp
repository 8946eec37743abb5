#pragma once

#include <string>
#include <vector>

namespace gridcurio {

/// SVG learning curves: x = global_step, y = mean_return. Files sharing a
/// label are averaged into one line with a +-1 std band; a dashed
/// horizontal line marks `optimal_return`. Labels containing "partial" are
/// drawn dotted. Throws UsageError on empty input or a label count mismatch.
void emit_plot(const std::vector<std::string>& metrics_files, const std::vector<std::string>& labels,
               double optimal_return, const std::string& out_path);

}  // namespace gridcurio

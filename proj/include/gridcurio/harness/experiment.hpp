#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gridcurio/harness/config.hpp"

namespace gridcurio {

struct RunResult {
  std::string directory;
  std::string metrics_path;
  std::string checkpoint_path;
  long steps = 0;
  int updates = 0;
  double optimal_return = 0.0;
};

/// run.optimal_return when set, else the scripted-solver estimate over 100 seeds.
double resolve_optimal_return(const ExperimentConfig& config);

/// Trains one seed into <output_dir>/<name>/seed_<seed>/ (config.txt,
/// metrics.csv, checkpoint.gckp). Rows already written survive an abort.
RunResult run_experiment(const ExperimentConfig& config, std::uint64_t seed);

struct GridRow {
  double beta = 0.0;
  std::vector<std::optional<long>> per_seed;
  std::optional<long> median;
};

struct GridSearchResult {
  std::vector<GridRow> rows;  // one per grid value, in grid order
  std::optional<std::size_t> best;
  double optimal_return = 0.0;
};

/// Median with "never converged" ordered after every step count.
std::optional<long> median_steps(std::vector<std::optional<long>> values);

/// One run per beta per seed; a failed run counts as not converged.
GridSearchResult beta_grid_search(const ExperimentConfig& base, const std::vector<double>& grid);

/// Text table: beta, median steps ("-" when none), per-seed steps, best marker.
std::string format_grid_table(const GridSearchResult& result);

}  // namespace gridcurio

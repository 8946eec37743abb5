#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gridcurio/gridworld/types.hpp"
#include "gridcurio/intrinsic/stack.hpp"
#include "gridcurio/learner/ppo.hpp"

namespace gridcurio {

struct RunConfig {
  std::string name = "run";
  long total_steps = 4096;
  std::vector<std::uint64_t> seeds{0, 1, 2};
  int convergence_window = 100;  // episodes in the mean_return window
  double convergence_threshold = 0.95;
  long metrics_every = 2048;
  std::string output_dir = "runs";
  /// Stop once mean_return has stayed at or above threshold * optimal for
  /// this many steps; negative disables.
  long early_stop_steps = -1;
  /// 0 estimates it with the scripted solver over 100 seeds.
  double optimal_return = 0.0;
};

struct ExperimentConfig {
  EnvConfig env;
  IntrinsicConfig intrinsic;
  PpoConfig ppo;
  RunConfig run;
};

/// Flat `key = value` text, `#` comments, sections env.*, intrinsic.*,
/// ppo.*, run.*. `overrides` are `key=value` strings applied after the
/// text. Syntax errors raise ParseError with the line number; unknown keys
/// and bad values raise ConfigError naming the key.
ExperimentConfig parse_config(const std::string& text, const std::vector<std::string>& overrides = {});
ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// Canonical text form; parse_config(config_to_text(c)) reproduces c.
std::string config_to_text(const ExperimentConfig& config);

/// Throws ConfigError on any invalid field, including total_steps not being
/// a multiple of n_envs * rollout_len.
void validate(const ExperimentConfig& config);

std::string to_string(IntrinsicMethod method);

}  // namespace gridcurio

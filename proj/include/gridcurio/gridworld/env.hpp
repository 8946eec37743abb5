#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "gridcurio/gridworld/types.hpp"

namespace gridcurio {

struct StepResult {
  GridState state;
  double reward = 0.0;
  bool done = false;
};

/// Parses `MultiRoom-N<r>-S<s>`, `KeyCorridorS<s>R<r>` or `ObstructedMaze-2Dlh`.
/// Family defaults are left in place for fields the id does not mention.
EnvConfig parse_env_id(const std::string& id);
std::string env_id(const EnvConfig& config);

/// Throws ConfigError naming the first invalid field.
void validate(const EnvConfig& config);

int default_max_steps(const EnvConfig& config);
int effective_max_steps(const EnvConfig& config);

/// (width, height) of every layout the config generates.
std::pair<int, int> grid_shape(const EnvConfig& config);

/// Generates a fresh layout. Same (config, episode_seed) gives the same state.
GridState reset(const EnvConfig& config, std::uint64_t episode_seed);

/// Advances one action. Throws UsageError on a terminated state or an
/// action outside [0, 6].
StepResult step(const GridState& state, int action);

/// In-place variant used by the rollout loop; returns (reward, done).
std::pair<double, bool> step_inplace(GridState& state, int action);

/// Success reward for reaching the target at `step_count` (already incremented).
inline double success_reward(int step_count, int max_steps) {
  return 1.0 - 0.9 * (static_cast<double>(step_count) / max_steps);
}

}  // namespace gridcurio

#pragma once

#include <optional>
#include <vector>

#include "gridcurio/gridworld/types.hpp"

namespace gridcurio {

/// Scripted solver: a family-independent chain of sub-goals (fetch key,
/// unlock, drop, fetch target / reach goal), each planned by breadth-first
/// search over (position, direction, opened doors). Every action is replayed
/// through the simulator; returns the action list of a successful episode or
/// nullopt if no plan was found within max_steps.
std::optional<std::vector<int>> solve(const GridState& state);

/// 1 - 0.9 * (mean solver path length / max_steps) over `n_seeds` layouts.
double estimate_optimal_return(const EnvConfig& config, int n_seeds);

}  // namespace gridcurio

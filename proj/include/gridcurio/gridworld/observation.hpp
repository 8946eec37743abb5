#pragma once

#include <array>

#include "gridcurio/gridworld/types.hpp"

namespace gridcurio {

inline constexpr int kViewSize = 7;
inline constexpr Vec2 kViewAgent{3, 6};

/// 7x7 agent-local window; element (i, j) at j * 7 + i, agent at (3, 6) facing up.
using ViewWindow = std::array<Cell, kViewSize * kViewSize>;
using ViewMask = std::array<bool, kViewSize * kViewSize>;

constexpr std::size_t view_index(int i, int j) { return static_cast<std::size_t>(j) * kViewSize + i; }

/// World coordinate of local window cell (i, j).
Vec2 view_to_world(const GridState& state, int i, int j);

/// Raw window in the agent frame. Out-of-grid cells are unseen (opaque).
ViewWindow extract_window(const GridState& state);

/// Outward light propagation from the agent cell.
ViewMask visibility_mask(const ViewWindow& window);

/// Whole grid with the agent overlaid as (10, red, dir).
EncodedTensor encode_full(const GridState& state);

/// 7x7 egocentric view with occlusion applied. The agent cell shows the
/// carried object, else empty.
EncodedTensor encode_partial(const GridState& state);

}  // namespace gridcurio

#include "gridcurio/gridworld/observation.hpp"

namespace gridcurio {

Vec2 view_to_world(const GridState& state, int i, int j) {
  const Vec2 forward = dir_to_vec(state.agent_dir);
  const Vec2 right = dir_to_vec(state.agent_dir + 1);
  return state.agent_pos + forward * (kViewAgent.y - j) + right * (i - kViewAgent.x);
}

ViewWindow extract_window(const GridState& state) {
  ViewWindow window;
  for (int j = 0; j < kViewSize; ++j) {
    for (int i = 0; i < kViewSize; ++i) {
      const Vec2 p = view_to_world(state, i, j);
      window[view_index(i, j)] = state.in_bounds(p) ? state.at(p) : Cell::unseen();
    }
  }
  return window;
}

ViewMask visibility_mask(const ViewWindow& window) {
  ViewMask mask{};
  auto set = [&](int i, int j) {
    if (i >= 0 && i < kViewSize && j >= 0 && j < kViewSize) mask[view_index(i, j)] = true;
  };
  set(kViewAgent.x, kViewAgent.y);

  for (int j = kViewSize - 1; j >= 0; --j) {
    for (int i = 0; i < kViewSize - 1; ++i) {
      if (!mask[view_index(i, j)] || !window[view_index(i, j)].see_through()) continue;
      set(i + 1, j);
      set(i + 1, j - 1);
      set(i, j - 1);
    }
    for (int i = kViewSize - 1; i > 0; --i) {
      if (!mask[view_index(i, j)] || !window[view_index(i, j)].see_through()) continue;
      set(i - 1, j);
      set(i - 1, j - 1);
      set(i, j - 1);
    }
  }
  return mask;
}

EncodedTensor encode_full(const GridState& state) {
  EncodedTensor t(state.width, state.height);
  for (int y = 0; y < state.height; ++y) {
    for (int x = 0; x < state.width; ++x) t.set(x, y, state.at({x, y}));
  }
  t.set(state.agent_pos.x, state.agent_pos.y,
        {static_cast<std::uint8_t>(Object::Agent), static_cast<std::uint8_t>(Color::Red),
         static_cast<std::uint8_t>(state.agent_dir)});
  return t;
}

EncodedTensor encode_partial(const GridState& state) {
  ViewWindow window = extract_window(state);
  const ViewMask mask = visibility_mask(window);
  window[view_index(kViewAgent.x, kViewAgent.y)] = state.carrying ? *state.carrying : Cell::empty();

  EncodedTensor t(kViewSize, kViewSize);
  for (int j = 0; j < kViewSize; ++j) {
    for (int i = 0; i < kViewSize; ++i) {
      if (mask[view_index(i, j)]) t.set(i, j, window[view_index(i, j)]);
    }
  }
  return t;
}

}  // namespace gridcurio

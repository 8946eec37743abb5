#include "gridcurio/gridworld/solver.hpp"

#include <deque>
#include <functional>
#include <unordered_map>

#include "gridcurio/gridworld/env.hpp"

namespace gridcurio {
namespace {

struct Pose {
  int x, y, dir;
  std::uint64_t opened;
  friend bool operator==(const Pose&, const Pose&) = default;
};

struct PoseHash {
  std::size_t operator()(const Pose& p) const {
    return splitmix64(p.opened) ^ (static_cast<std::size_t>(p.x) << 20 | static_cast<std::size_t>(p.y) << 4 |
                                   static_cast<std::size_t>(p.dir));
  }
};

using FrontTest = std::function<bool(Vec2, const Cell&)>;

/// Closed, unlocked doors: these can be opened en route.
std::vector<Vec2> closed_doors(const GridState& s) {
  std::vector<Vec2> doors;
  for (int y = 0; y < s.height; ++y) {
    for (int x = 0; x < s.width; ++x) {
      const Cell& c = s.at({x, y});
      if (c.is(Object::Door) && c.state == static_cast<std::uint8_t>(DoorState::Closed)) doors.push_back({x, y});
    }
  }
  return doors;
}

/// All shortest action sequences (in BFS order) that leave the agent facing a
/// cell accepted by `test`. At most `limit` plans are returned.
std::vector<std::vector<int>> plan_facing(const GridState& s, const FrontTest& test, std::size_t limit) {
  const std::vector<Vec2> doors = closed_doors(s);
  if (doors.size() > 64) return {};
  auto door_bit = [&](Vec2 p) -> int {
    for (std::size_t k = 0; k < doors.size(); ++k) {
      if (doors[k] == p) return static_cast<int>(k);
    }
    return -1;
  };
  auto effective = [&](Vec2 p, std::uint64_t opened) {
    Cell c = s.at(p);
    const int bit = door_bit(p);
    if (bit >= 0 && (opened >> bit & 1ULL)) c.state = static_cast<std::uint8_t>(DoorState::Open);
    return c;
  };

  struct Link {
    Pose parent;
    int action;
  };
  std::unordered_map<Pose, Link, PoseHash> seen;
  std::deque<Pose> queue;
  const Pose start{s.agent_pos.x, s.agent_pos.y, s.agent_dir, 0};
  seen.emplace(start, Link{start, -1});
  queue.push_back(start);

  std::vector<std::vector<int>> plans;
  auto rebuild = [&](Pose p) {
    std::vector<int> actions;
    while (!(p == start)) {
      const Link& l = seen.at(p);
      actions.push_back(l.action);
      p = l.parent;
    }
    return std::vector<int>(actions.rbegin(), actions.rend());
  };

  while (!queue.empty() && plans.size() < limit) {
    const Pose p = queue.front();
    queue.pop_front();
    const Vec2 front = Vec2{p.x, p.y} + dir_to_vec(p.dir);
    const bool front_in = s.in_bounds(front);
    if (front_in && test(front, effective(front, p.opened))) {
      plans.push_back(rebuild(p));
      continue;
    }

    auto visit = [&](Pose next, int action) {
      if (seen.emplace(next, Link{p, action}).second) queue.push_back(next);
    };
    visit({p.x, p.y, (p.dir + 3) % 4, p.opened}, static_cast<int>(Action::Left));
    visit({p.x, p.y, (p.dir + 1) % 4, p.opened}, static_cast<int>(Action::Right));
    if (!front_in) continue;
    const Cell fc = effective(front, p.opened);
    if (fc.can_overlap()) {
      visit({front.x, front.y, p.dir, p.opened}, static_cast<int>(Action::Forward));
    } else if (fc.is(Object::Door) && fc.state == static_cast<std::uint8_t>(DoorState::Closed)) {
      const int bit = door_bit(front);
      if (bit >= 0) visit({p.x, p.y, p.dir, p.opened | (1ULL << bit)}, static_cast<int>(Action::Toggle));
    }
  }
  return plans;
}

struct Attempt {
  GridState state;
  std::vector<int> actions;
  bool success = false;
};

/// Replays `actions`; false if the episode ended before the last one.
bool replay(Attempt& a, const std::vector<int>& actions) {
  for (int action : actions) {
    if (a.state.done) return false;
    auto [reward, done] = step_inplace(a.state, action);
    a.actions.push_back(action);
    if (reward > 0.0) a.success = true;
  }
  return true;
}

bool face_and_act(Attempt& a, const FrontTest& test, Action act) {
  auto plans = plan_facing(a.state, test, 1);
  if (plans.empty()) return false;
  plans.front().push_back(static_cast<int>(act));
  return replay(a, plans.front());
}

bool is_target(const GridState& s, const Cell& c) {
  if (s.family == Family::ObstructedMaze2Dlh) return c.is(Object::Ball) && c.tint() == Color::Blue;
  return c.is(Object::Ball);
}

bool finish(Attempt& a) {
  if (a.state.family == Family::MultiRoom) {
    return face_and_act(a, [](Vec2, const Cell& c) { return c.is(Object::Goal); }, Action::Forward) && a.success;
  }
  const GridState& s = a.state;
  return face_and_act(a, [&s](Vec2, const Cell& c) { return is_target(s, c); }, Action::Pickup) && a.success;
}

std::optional<Attempt> unlock_and_finish(const Attempt& base, std::uint8_t color) {
  Attempt a = base;
  auto is_key = [color](Vec2, const Cell& c) { return c.is(Object::Key) && c.color == color; };
  if (!face_and_act(a, is_key, Action::Pickup)) {
    a = base;
    const GridState& s0 = a.state;
    auto box_with_key = [&s0, color](Vec2 p, const Cell& c) {
      const Cell& inner = s0.contents[s0.index(p)];
      return c.is(Object::Box) && inner.is(Object::Key) && inner.color == color;
    };
    if (!face_and_act(a, box_with_key, Action::Toggle)) return std::nullopt;
    if (!face_and_act(a, is_key, Action::Pickup)) return std::nullopt;
  }
  if (!a.state.carrying) return std::nullopt;
  auto locked_door = [color](Vec2, const Cell& c) {
    return c.is(Object::Door) && c.color == color && c.state == static_cast<std::uint8_t>(DoorState::Locked);
  };
  if (!face_and_act(a, locked_door, Action::Toggle)) return std::nullopt;

  // The key has to go somewhere before the target can be picked up; try the
  // nearest free spots until one leaves the target reachable.
  auto free_cell = [](Vec2, const Cell& c) { return c.is(Object::Empty); };
  for (const auto& plan : plan_facing(a.state, free_cell, 12)) {
    Attempt b = a;
    std::vector<int> with_drop = plan;
    with_drop.push_back(static_cast<int>(Action::Drop));
    if (!replay(b, with_drop) || b.state.carrying) continue;
    if (finish(b)) return b;
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::vector<int>> solve(const GridState& state) {
  Attempt start{state, {}, false};
  std::optional<Attempt> best;
  {
    Attempt direct = start;
    if (finish(direct)) best = direct;
  }
  if (!best) {
    std::vector<std::uint8_t> colors;
    for (const Cell& c : state.cells) {
      if (c.is(Object::Door) && c.state == static_cast<std::uint8_t>(DoorState::Locked)) colors.push_back(c.color);
    }
    for (std::uint8_t color : colors) {
      auto done = unlock_and_finish(start, color);
      if (done && (!best || done->actions.size() < best->actions.size())) best = std::move(done);
    }
  }
  if (!best || static_cast<int>(best->actions.size()) > state.max_steps - state.step_count) return std::nullopt;
  return best->actions;
}

double estimate_optimal_return(const EnvConfig& config, int n_seeds) {
  double total = 0.0;
  int solved = 0;
  const int max_steps = effective_max_steps(config);
  for (int seed = 0; seed < n_seeds; ++seed) {
    if (auto plan = solve(reset(config, static_cast<std::uint64_t>(seed)))) {
      total += static_cast<double>(plan->size());
      ++solved;
    }
  }
  if (solved == 0) return 0.0;
  return 1.0 - 0.9 * (total / solved) / max_steps;
}

}  // namespace gridcurio

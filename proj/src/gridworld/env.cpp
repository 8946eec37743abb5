#include "gridcurio/gridworld/env.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <regex>

#include "gridcurio/errors.hpp"

namespace gridcurio {
namespace {

int parse_int(const std::string& s) {
  int v = 0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

Color random_color(Rng& rng) { return static_cast<Color>(uniform_int(rng, 0, kNumColors - 1)); }

GridState blank_grid(int width, int height, const EnvConfig& config, Rng rng) {
  GridState s;
  s.width = width;
  s.height = height;
  s.cells.assign(static_cast<std::size_t>(width) * height, Cell::empty());
  s.contents.assign(s.cells.size(), Cell::unseen());
  s.max_steps = effective_max_steps(config);
  s.family = config.family;
  s.rng = std::move(rng);
  return s;
}

void draw_rect_walls(GridState& s, int x0, int y0, int w, int h) {
  for (int x = x0; x < x0 + w; ++x) {
    s.at({x, y0}) = Cell::wall();
    s.at({x, y0 + h - 1}) = Cell::wall();
  }
  for (int y = y0; y < y0 + h; ++y) {
    s.at({x0, y}) = Cell::wall();
    s.at({x0 + w - 1, y}) = Cell::wall();
  }
}

/// Random empty cell inside the rectangle [x0, x0+w) x [y0, y0+h) that passes `accept`.
Vec2 random_empty_cell(GridState& s, int x0, int y0, int w, int h,
                       const std::function<bool(Vec2)>& accept = nullptr) {
  std::vector<Vec2> candidates;
  for (int y = y0; y < y0 + h; ++y) {
    for (int x = x0; x < x0 + w; ++x) {
      const Vec2 p{x, y};
      if (s.at(p).is(Object::Empty) && (!accept || accept(p))) {
        candidates.push_back(p);
      }
    }
  }
  if (candidates.empty()) throw ConfigError("env: no free cell left to place an object");
  return candidates[static_cast<std::size_t>(uniform_int(s.rng, 0, static_cast<int>(candidates.size()) - 1))];
}

// ---------------------------------------------------------------- MultiRoom

struct Room {
  int x, y, w, h;
  Vec2 entry;
};

int multiroom_grid_size(const EnvConfig& c) {
  if (c.grid_size > 0) return c.grid_size;
  return std::min(25, c.n_rooms * (c.room_size - 1) + 3);
}

bool place_room(Rng& rng, std::vector<Room>& rooms, int num_left, int max_size, int grid, int entry_wall,
                Vec2 entry) {
  const int w = uniform_int(rng, 4, max_size);
  const int h = uniform_int(rng, 4, max_size);
  int x = entry.x;
  int y = entry.y;
  if (!rooms.empty()) {
    // entry_wall is the wall of the new room that holds the connecting door.
    switch (entry_wall) {
      case 0:
        x = entry.x - w + 1;
        y = uniform_int(rng, entry.y - h + 2, entry.y - 1);
        break;
      case 1:
        x = uniform_int(rng, entry.x - w + 2, entry.x - 1);
        y = entry.y - h + 1;
        break;
      case 2:
        x = entry.x;
        y = uniform_int(rng, entry.y - h + 2, entry.y - 1);
        break;
      default:
        x = uniform_int(rng, entry.x - w + 2, entry.x - 1);
        y = entry.y;
        break;
    }
  }
  if (x < 0 || y < 0 || x + w > grid || y + h > grid) return false;
  for (const Room& r : rooms) {
    // Rooms may share a wall line but never interior space.
    const bool apart = x + w - 1 <= r.x || r.x + r.w - 1 <= x || y + h - 1 <= r.y || r.y + r.h - 1 <= y;
    if (!apart) return false;
  }
  rooms.push_back({x, y, w, h, entry});
  if (num_left == 1) return true;

  const std::size_t keep = rooms.size();
  for (int attempt = 0; attempt < 8; ++attempt) {
    std::vector<int> walls;
    for (int k = 0; k < 4; ++k) {
      if (k != entry_wall) walls.push_back(k);
    }
    const int exit_wall = walls[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(walls.size()) - 1))];
    Vec2 exit;
    switch (exit_wall) {
      case 0:
        exit = {x + w - 1, uniform_int(rng, y + 1, y + h - 2)};
        break;
      case 1:
        exit = {uniform_int(rng, x + 1, x + w - 2), y + h - 1};
        break;
      case 2:
        exit = {x, uniform_int(rng, y + 1, y + h - 2)};
        break;
      default:
        exit = {uniform_int(rng, x + 1, x + w - 2), y};
        break;
    }
    if (place_room(rng, rooms, num_left - 1, max_size, grid, (exit_wall + 2) % 4, exit)) return true;
    rooms.resize(keep);
  }
  rooms.pop_back();
  return false;
}

GridState generate_multiroom(const EnvConfig& config, Rng rng) {
  const int grid = multiroom_grid_size(config);
  std::vector<Room> rooms;
  bool placed = false;
  for (int attempt = 0; attempt < 2000 && !placed; ++attempt) {
    rooms.clear();
    const Vec2 start{uniform_int(rng, 0, grid - 2), uniform_int(rng, 0, grid - 2)};
    placed = place_room(rng, rooms, config.n_rooms, config.room_size, grid, 2, start);
  }
  if (!placed) throw ConfigError("env.grid_size: room chain does not fit in the grid");

  GridState s = blank_grid(grid, grid, config, std::move(rng));
  for (const Room& r : rooms) draw_rect_walls(s, r.x, r.y, r.w, r.h);
  std::optional<Color> previous;
  for (std::size_t i = 1; i < rooms.size(); ++i) {
    Color c;
    do {
      c = random_color(s.rng);
    } while (previous && *previous == c);
    previous = c;
    s.at(rooms[i].entry) = Cell::door(c, DoorState::Closed);
  }
  const Room& last = rooms.back();
  s.at(random_empty_cell(s, last.x + 1, last.y + 1, last.w - 2, last.h - 2)) = Cell::goal();
  const Room& first = rooms.front();
  s.agent_pos = random_empty_cell(s, first.x + 1, first.y + 1, first.w - 2, first.h - 2);
  s.agent_dir = uniform_int(s.rng, 0, 3);
  return s;
}

// ---------------------------------------------------------------- room grids

/// 2-D array of equally sized rooms sharing walls (KeyCorridor, ObstructedMaze).
struct RoomGrid {
  int cols, rows, size;
  std::vector<bool> locked;                   // per room
  std::vector<std::array<bool, 4>> linked;    // per room, per wall: door or removed wall

  RoomGrid(int c, int r, int s) : cols(c), rows(r), size(s), locked(c * r, false), linked(c * r, {false, false, false, false}) {}
  int id(int i, int j) const { return j * cols + i; }
  Vec2 top(int i, int j) const { return {i * (size - 1), j * (size - 1)}; }
  bool has_neighbor(int i, int j, int wall) const {
    const Vec2 d = dir_to_vec(wall);
    return i + d.x >= 0 && i + d.x < cols && j + d.y >= 0 && j + d.y < rows;
  }
  void link(int i, int j, int wall) {
    const Vec2 d = dir_to_vec(wall);
    linked[id(i, j)][wall] = true;
    linked[id(i + d.x, j + d.y)][(wall + 2) % 4] = true;
  }
};

GridState blank_room_grid(const RoomGrid& g, const EnvConfig& config, Rng rng) {
  const int w = (g.size - 1) * g.cols + 1;
  const int h = (g.size - 1) * g.rows + 1;
  GridState s = blank_grid(w, h, config, std::move(rng));
  for (int j = 0; j < g.rows; ++j) {
    for (int i = 0; i < g.cols; ++i) {
      const Vec2 t = g.top(i, j);
      draw_rect_walls(s, t.x, t.y, g.size, g.size);
    }
  }
  return s;
}

Vec2 room_interior_random(GridState& s, const RoomGrid& g, int i, int j,
                          const std::function<bool(Vec2)>& accept = nullptr) {
  const Vec2 t = g.top(i, j);
  return random_empty_cell(s, t.x + 1, t.y + 1, g.size - 2, g.size - 2, accept);
}

/// Puts a door at a random non-corner position of room (i, j)'s wall and links both rooms.
Vec2 add_door(GridState& s, RoomGrid& g, int i, int j, int wall, Color color, DoorState state) {
  const Vec2 t = g.top(i, j);
  const int offset = uniform_int(s.rng, 1, g.size - 2);
  Vec2 p;
  switch (wall) {
    case 0:
      p = {t.x + g.size - 1, t.y + offset};
      break;
    case 1:
      p = {t.x + offset, t.y + g.size - 1};
      break;
    case 2:
      p = {t.x, t.y + offset};
      break;
    default:
      p = {t.x + offset, t.y};
      break;
  }
  s.at(p) = Cell::door(color, state);
  g.link(i, j, wall);
  if (state == DoorState::Locked) g.locked[g.id(i, j)] = true;
  return p;
}

void remove_wall(GridState& s, RoomGrid& g, int i, int j, int wall) {
  const Vec2 t = g.top(i, j);
  for (int k = 1; k < g.size - 1; ++k) {
    Vec2 p;
    switch (wall) {
      case 0:
        p = {t.x + g.size - 1, t.y + k};
        break;
      case 1:
        p = {t.x + k, t.y + g.size - 1};
        break;
      case 2:
        p = {t.x, t.y + k};
        break;
      default:
        p = {t.x + k, t.y};
        break;
    }
    s.at(p) = Cell::empty();
  }
  g.link(i, j, wall);
}

/// Adds closed doors between random unlocked neighbours until every room is
/// reachable from `start`.
void connect_all(GridState& s, RoomGrid& g, int start_i, int start_j) {
  for (int iteration = 0; iteration < 5000; ++iteration) {
    std::vector<bool> reach(g.cols * g.rows, false);
    std::vector<std::pair<int, int>> stack{{start_i, start_j}};
    while (!stack.empty()) {
      auto [i, j] = stack.back();
      stack.pop_back();
      if (reach[g.id(i, j)]) continue;
      reach[g.id(i, j)] = true;
      for (int k = 0; k < 4; ++k) {
        if (g.linked[g.id(i, j)][k]) {
          const Vec2 d = dir_to_vec(k);
          stack.emplace_back(i + d.x, j + d.y);
        }
      }
    }
    if (std::all_of(reach.begin(), reach.end(), [](bool b) { return b; })) return;

    const int i = uniform_int(s.rng, 0, g.cols - 1);
    const int j = uniform_int(s.rng, 0, g.rows - 1);
    const int k = uniform_int(s.rng, 0, 3);
    if (!g.has_neighbor(i, j, k) || g.linked[g.id(i, j)][k]) continue;
    const Vec2 d = dir_to_vec(k);
    if (g.locked[g.id(i, j)] || g.locked[g.id(i + d.x, j + d.y)]) continue;
    add_door(s, g, i, j, k, random_color(s.rng), DoorState::Closed);
  }
  throw ConfigError("env: failed to connect all rooms");
}

GridState generate_key_corridor(const EnvConfig& config, Rng rng) {
  RoomGrid g(3, config.n_rows, config.room_size);
  GridState s = blank_room_grid(g, config, std::move(rng));
  for (int j = 1; j < g.rows; ++j) remove_wall(s, g, 1, j, 3);

  const int locked_row = uniform_int(s.rng, 0, g.rows - 1);
  const Color door_color = random_color(s.rng);
  add_door(s, g, 2, locked_row, 2, door_color, DoorState::Locked);
  s.at(room_interior_random(s, g, 2, locked_row)) = Cell::ball(random_color(s.rng));
  const int key_row = uniform_int(s.rng, 0, g.rows - 1);
  s.at(room_interior_random(s, g, 0, key_row)) = Cell::key(door_color);

  s.agent_pos = room_interior_random(s, g, 1, g.rows / 2);
  s.agent_dir = uniform_int(s.rng, 0, 3);
  connect_all(s, g, 1, g.rows / 2);
  return s;
}

GridState generate_obstructed_maze(const EnvConfig& config, Rng rng) {
  // Only the middle row of the 3x3 arrangement is used: the agent starts in
  // the centre room, each side room sits behind a locked door whose key is
  // hidden in a box in the centre room. The blue ball is in one side room.
  RoomGrid g(3, 3, 6);
  GridState s = blank_room_grid(g, config, std::move(rng));

  Color left_color = random_color(s.rng);
  Color right_color;
  do {
    right_color = random_color(s.rng);
  } while (right_color == left_color);
  const Vec2 left_door = add_door(s, g, 1, 1, 2, left_color, DoorState::Locked);
  const Vec2 right_door = add_door(s, g, 1, 1, 0, right_color, DoorState::Locked);

  const int ball_side = uniform_int(s.rng, 0, 1) == 0 ? 0 : 2;
  s.at(room_interior_random(s, g, ball_side, 1)) = Cell::ball(Color::Blue);

  // Keep the cells just inside each doorway clear so a box never blocks it.
  const Vec2 left_inner = left_door + dir_to_vec(0);
  const Vec2 right_inner = right_door + dir_to_vec(2);
  auto clear_of_doors = [&](Vec2 p) { return !(p == left_inner) && !(p == right_inner); };
  for (Color c : {left_color, right_color}) {
    const Vec2 p = room_interior_random(s, g, 1, 1, clear_of_doors);
    s.at(p) = Cell::box(c);
    s.contents[s.index(p)] = Cell::key(c);
  }
  s.agent_pos = room_interior_random(s, g, 1, 1, clear_of_doors);
  s.agent_dir = uniform_int(s.rng, 0, 3);
  return s;
}

bool is_target(const GridState& s, const Cell& picked) {
  switch (s.family) {
    case Family::KeyCorridor:
      return picked.is(Object::Ball);
    case Family::ObstructedMaze2Dlh:
      return picked.is(Object::Ball) && picked.tint() == Color::Blue;
    default:
      return false;
  }
}

}  // namespace

EnvConfig parse_env_id(const std::string& id) {
  static const std::regex multiroom(R"(MultiRoom-N(\d+)-S(\d+))");
  static const std::regex corridor(R"(KeyCorridorS(\d+)R(\d+))");
  std::smatch m;
  EnvConfig c;
  if (std::regex_match(id, m, multiroom)) {
    c.family = Family::MultiRoom;
    c.n_rooms = parse_int(m[1]);
    c.room_size = parse_int(m[2]);
  } else if (std::regex_match(id, m, corridor)) {
    c.family = Family::KeyCorridor;
    c.room_size = parse_int(m[1]);
    c.n_rows = parse_int(m[2]);
  } else if (id == "ObstructedMaze-2Dlh") {
    c.family = Family::ObstructedMaze2Dlh;
    c.room_size = 6;
  } else {
    throw ConfigError("env.id: unknown environment '" + id + "'");
  }
  return c;
}

std::string env_id(const EnvConfig& c) {
  switch (c.family) {
    case Family::MultiRoom:
      return "MultiRoom-N" + std::to_string(c.n_rooms) + "-S" + std::to_string(c.room_size);
    case Family::KeyCorridor:
      return "KeyCorridorS" + std::to_string(c.room_size) + "R" + std::to_string(c.n_rows);
    default:
      return "ObstructedMaze-2Dlh";
  }
}

void validate(const EnvConfig& c) {
  if (c.max_steps < 0) throw ConfigError("env.max_steps: must be positive (0 selects the default)");
  if (c.tile_size < 1) throw ConfigError("env.tile_size: must be >= 1");
  switch (c.family) {
    case Family::MultiRoom:
      if (c.n_rooms < 2) throw ConfigError("env.n_rooms: MultiRoom requires n_rooms >= 2");
      if (c.room_size < 4) throw ConfigError("env.room_size: MultiRoom requires room_size >= 4");
      if (c.grid_size != 0 && c.grid_size < c.room_size + 1) {
        throw ConfigError("env.grid_size: must exceed room_size");
      }
      if (multiroom_grid_size(c) < c.room_size) throw ConfigError("env.room_size: larger than the grid");
      break;
    case Family::KeyCorridor:
      if (c.room_size < 3) throw ConfigError("env.room_size: KeyCorridor requires room_size >= 3");
      if (c.n_rows < 1) throw ConfigError("env.n_rows: KeyCorridor requires n_rows >= 1");
      break;
    case Family::ObstructedMaze2Dlh:
      break;
  }
}

int default_max_steps(const EnvConfig& c) {
  switch (c.family) {
    case Family::MultiRoom:
      return 20 * c.n_rooms;
    case Family::KeyCorridor:
      return 30 * c.room_size * c.room_size;
    default:
      return 576;
  }
}

int effective_max_steps(const EnvConfig& c) { return c.max_steps > 0 ? c.max_steps : default_max_steps(c); }

std::pair<int, int> grid_shape(const EnvConfig& c) {
  switch (c.family) {
    case Family::MultiRoom: {
      const int g = multiroom_grid_size(c);
      return {g, g};
    }
    case Family::KeyCorridor:
      return {(c.room_size - 1) * 3 + 1, (c.room_size - 1) * c.n_rows + 1};
    default:
      return {16, 16};
  }
}

GridState reset(const EnvConfig& config, std::uint64_t episode_seed) {
  validate(config);
  Rng rng(mix_seeds(config.seed, episode_seed));
  switch (config.family) {
    case Family::MultiRoom:
      return generate_multiroom(config, std::move(rng));
    case Family::KeyCorridor:
      return generate_key_corridor(config, std::move(rng));
    default:
      return generate_obstructed_maze(config, std::move(rng));
  }
}

std::pair<double, bool> step_inplace(GridState& s, int action) {
  if (s.done) throw UsageError("step: episode already terminated");
  if (action < 0 || action >= kNumActions) throw UsageError("step: action must be in [0, 6]");

  s.step_count += 1;
  double reward = 0.0;
  bool success = false;
  const Vec2 fwd = s.front_pos();
  const bool fwd_ok = s.in_bounds(fwd);

  switch (static_cast<Action>(action)) {
    case Action::Left:
      s.agent_dir = (s.agent_dir + 3) % 4;
      break;
    case Action::Right:
      s.agent_dir = (s.agent_dir + 1) % 4;
      break;
    case Action::Forward:
      if (fwd_ok && s.at(fwd).can_overlap()) {
        s.agent_pos = fwd;
        if (s.at(fwd).is(Object::Goal)) success = true;
        if (s.at(fwd).is(Object::Lava)) s.done = true;
      }
      break;
    case Action::Pickup:
      if (fwd_ok && !s.carrying && s.at(fwd).can_pickup()) {
        s.carrying = s.at(fwd);
        s.carrying_contents = s.contents[s.index(fwd)];
        s.at(fwd) = Cell::empty();
        s.contents[s.index(fwd)] = Cell::unseen();
        if (is_target(s, *s.carrying)) success = true;
      }
      break;
    case Action::Drop:
      if (fwd_ok && s.carrying && s.at(fwd).is(Object::Empty)) {
        s.at(fwd) = *s.carrying;
        s.contents[s.index(fwd)] = s.carrying_contents;
        s.carrying.reset();
        s.carrying_contents = Cell::unseen();
      }
      break;
    case Action::Toggle:
      if (fwd_ok) {
        Cell& c = s.at(fwd);
        if (c.is(Object::Door)) {
          const auto state = static_cast<DoorState>(c.state);
          if (state == DoorState::Locked) {
            if (s.carrying && s.carrying->is(Object::Key) && s.carrying->color == c.color) {
              c.state = static_cast<std::uint8_t>(DoorState::Open);
            }
          } else {
            c.state = static_cast<std::uint8_t>(state == DoorState::Open ? DoorState::Closed : DoorState::Open);
          }
        } else if (c.is(Object::Box)) {
          Cell& inner = s.contents[s.index(fwd)];
          c = inner.is(Object::Unseen) ? Cell::empty() : inner;
          inner = Cell::unseen();
        }
      }
      break;
    case Action::Noop:
      break;
  }

  if (success) {
    reward = success_reward(s.step_count, s.max_steps);
    s.done = true;
  }
  if (s.step_count >= s.max_steps) s.done = true;
  return {reward, s.done};
}

StepResult step(const GridState& state, int action) {
  StepResult r{state, 0.0, false};
  auto [reward, done] = step_inplace(r.state, action);
  r.reward = reward;
  r.done = done;
  return r;
}

}  // namespace gridcurio

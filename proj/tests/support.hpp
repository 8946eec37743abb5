#pragma once

// Helpers shared by the unit and acceptance suites. Everything in here is an
// independent re-derivation used as a test oracle.

#include <array>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gridcurio/gridworld/observation.hpp"
#include "gridcurio/gridworld/types.hpp"

namespace gridcurio::testing {

/// w x h room enclosed by walls, agent at `pos` facing `dir`.
inline GridState make_room(int w, int h, Vec2 pos, int dir, int max_steps = 100) {
  GridState s;
  s.width = w;
  s.height = h;
  s.cells.assign(static_cast<std::size_t>(w) * h, Cell::empty());
  s.contents.assign(s.cells.size(), Cell::unseen());
  for (int x = 0; x < w; ++x) {
    s.at({x, 0}) = Cell::wall();
    s.at({x, h - 1}) = Cell::wall();
  }
  for (int y = 0; y < h; ++y) {
    s.at({0, y}) = Cell::wall();
    s.at({w - 1, y}) = Cell::wall();
  }
  s.agent_pos = pos;
  s.agent_dir = dir;
  s.max_steps = max_steps;
  return s;
}

/// Partial view computed the long way: slice a 7x7 box out of the grid with
/// out-of-grid cells unseen, rotate it counter-clockwise (dir + 1) times so
/// the agent faces up, then apply the mask.
inline ViewWindow slice_and_rotate(const GridState& s) {
  Vec2 top;
  switch (s.agent_dir) {
    case 0: top = {s.agent_pos.x, s.agent_pos.y - 3}; break;
    case 1: top = {s.agent_pos.x - 3, s.agent_pos.y}; break;
    case 2: top = {s.agent_pos.x - 6, s.agent_pos.y - 3}; break;
    default: top = {s.agent_pos.x - 3, s.agent_pos.y - 6}; break;
  }
  std::array<std::array<Cell, 7>, 7> g{};  // g[i][j]
  for (int i = 0; i < 7; ++i) {
    for (int j = 0; j < 7; ++j) {
      const Vec2 p{top.x + i, top.y + j};
      g[i][j] = s.in_bounds(p) ? s.at(p) : Cell::unseen();
    }
  }
  for (int r = 0; r < s.agent_dir + 1; ++r) {
    std::array<std::array<Cell, 7>, 7> rot{};
    for (int i = 0; i < 7; ++i) {
      for (int j = 0; j < 7; ++j) rot[j][6 - i] = g[i][j];
    }
    g = rot;
  }
  ViewWindow w;
  for (int i = 0; i < 7; ++i) {
    for (int j = 0; j < 7; ++j) w[view_index(i, j)] = g[i][j];
  }
  return w;
}

struct VisibilityCase {
  std::string name;
  ViewWindow window;
  ViewMask expected;
};

inline Cell fixture_cell(char c) {
  switch (c) {
    case 'W': return Cell::wall();
    case 'D': return Cell::door(Color::Red, DoorState::Closed);
    case 'L': return Cell::door(Color::Yellow, DoorState::Locked);
    case 'O': return Cell::door(Color::Blue, DoorState::Open);
    case 'B': return Cell::box(Color::Purple);
    case 'K': return Cell::key(Color::Green);
    case 'G': return Cell::goal();
    case '?': return Cell::unseen();
    default: return Cell::empty();
  }
}

inline std::vector<VisibilityCase> load_visibility_fixtures(const std::string& path) {
  std::ifstream in(path);
  std::vector<VisibilityCase> cases;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("case ", 0) != 0) continue;
    VisibilityCase c;
    c.name = line.substr(5);
    for (int j = 0; j < 7; ++j) {
      std::getline(in, line);
      for (int i = 0; i < 7; ++i) {
        c.window[view_index(i, j)] = fixture_cell(line[static_cast<std::size_t>(i)]);
        c.expected[view_index(i, j)] = line[static_cast<std::size_t>(8 + i)] == '#';
      }
    }
    cases.push_back(c);
  }
  return cases;
}

inline int count_objects(const GridState& s, Object o) {
  int n = 0;
  for (const Cell& c : s.cells) n += c.is(o) ? 1 : 0;
  return n;
}

}  // namespace gridcurio::testing

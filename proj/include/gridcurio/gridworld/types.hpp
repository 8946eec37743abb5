#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gridcurio/rng.hpp"

namespace gridcurio {

enum class Object : std::uint8_t {
  Unseen = 0,
  Empty = 1,
  Wall = 2,
  Floor = 3,
  Door = 4,
  Key = 5,
  Ball = 6,
  Box = 7,
  Goal = 8,
  Lava = 9,
  Agent = 10,
};

enum class Color : std::uint8_t { Red = 0, Green = 1, Blue = 2, Purple = 3, Yellow = 4, Grey = 5 };
inline constexpr int kNumColors = 6;

enum class DoorState : std::uint8_t { Open = 0, Closed = 1, Locked = 2 };

// Largest id per channel; used to scale encoded tensors into [0, 1].
inline constexpr std::array<int, 3> kChannelMax{10, 5, 3};

/// One grid cell as its (object, color, state) triple.
struct Cell {
  std::uint8_t object = static_cast<std::uint8_t>(Object::Empty);
  std::uint8_t color = 0;
  std::uint8_t state = 0;

  static constexpr Cell unseen() { return {0, 0, 0}; }
  static constexpr Cell empty() { return {1, 0, 0}; }
  static constexpr Cell wall() { return {2, static_cast<std::uint8_t>(Color::Grey), 0}; }
  static constexpr Cell door(Color c, DoorState s) {
    return {4, static_cast<std::uint8_t>(c), static_cast<std::uint8_t>(s)};
  }
  static constexpr Cell key(Color c) { return {5, static_cast<std::uint8_t>(c), 0}; }
  static constexpr Cell ball(Color c) { return {6, static_cast<std::uint8_t>(c), 0}; }
  static constexpr Cell box(Color c) { return {7, static_cast<std::uint8_t>(c), 0}; }
  static constexpr Cell goal() { return {8, static_cast<std::uint8_t>(Color::Green), 0}; }

  constexpr Object kind() const { return static_cast<Object>(object); }
  constexpr Color tint() const { return static_cast<Color>(color); }
  constexpr bool is(Object o) const { return kind() == o; }

  /// Agent may stand on it.
  constexpr bool can_overlap() const {
    switch (kind()) {
      case Object::Empty:
      case Object::Floor:
      case Object::Goal:
      case Object::Lava:
        return true;
      case Object::Door:
        return state == static_cast<std::uint8_t>(DoorState::Open);
      default:
        return false;
    }
  }

  constexpr bool can_pickup() const { return is(Object::Key) || is(Object::Ball) || is(Object::Box); }

  /// Light passes through it. Out-of-grid cells (unseen) are opaque.
  constexpr bool see_through() const {
    switch (kind()) {
      case Object::Unseen:
      case Object::Wall:
      case Object::Box:
        return false;
      case Object::Door:
        return state == static_cast<std::uint8_t>(DoorState::Open);
      default:
        return true;
    }
  }

  friend constexpr bool operator==(const Cell&, const Cell&) = default;
};

struct Vec2 {
  int x = 0;
  int y = 0;
  friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(int k) const { return {x * k, y * k}; }
};

/// 0 east, 1 south, 2 west, 3 north.
constexpr Vec2 dir_to_vec(int dir) {
  constexpr std::array<Vec2, 4> table{{{1, 0}, {0, 1}, {-1, 0}, {0, -1}}};
  return table[static_cast<std::size_t>(dir & 3)];
}

enum class Action : int { Left = 0, Right = 1, Forward = 2, Pickup = 3, Drop = 4, Toggle = 5, Noop = 6 };
inline constexpr int kNumActions = 7;

enum class Family { MultiRoom, KeyCorridor, ObstructedMaze2Dlh };

struct EnvConfig {
  Family family = Family::MultiRoom;
  int n_rooms = 2;      // MultiRoom N
  int room_size = 4;    // MultiRoom / KeyCorridor S
  int n_rows = 3;       // KeyCorridor R
  int max_steps = 0;    // 0 selects the family default
  int grid_size = 0;    // MultiRoom only; 0 selects a size that fits the room chain
  int tile_size = 8;
  std::uint64_t seed = 0;
};

/// Complete simulator state. A value: copy it to branch.
struct GridState {
  int width = 0;
  int height = 0;
  std::vector<Cell> cells;     // row-major, index y * width + x
  std::vector<Cell> contents;  // what each box holds; unseen when nothing
  Vec2 agent_pos;
  int agent_dir = 0;
  std::optional<Cell> carrying;
  Cell carrying_contents = Cell::unseen();
  int step_count = 0;
  int max_steps = 1;
  Family family = Family::MultiRoom;
  bool done = false;
  Rng rng;

  bool in_bounds(Vec2 p) const { return p.x >= 0 && p.y >= 0 && p.x < width && p.y < height; }
  std::size_t index(Vec2 p) const { return static_cast<std::size_t>(p.y) * width + p.x; }
  const Cell& at(Vec2 p) const { return cells[index(p)]; }
  Cell& at(Vec2 p) { return cells[index(p)]; }
  Vec2 front_pos() const { return agent_pos + dir_to_vec(agent_dir); }

  friend bool operator==(const GridState&, const GridState&) = default;
};

/// W x H x 3 integer tensor; element (x, y, c) lives at (y * width + x) * 3 + c.
struct EncodedTensor {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  EncodedTensor() = default;
  EncodedTensor(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0) {}

  Cell at(int x, int y) const {
    const std::size_t o = (static_cast<std::size_t>(y) * width + x) * 3;
    return {data[o], data[o + 1], data[o + 2]};
  }
  void set(int x, int y, Cell c) {
    const std::size_t o = (static_cast<std::size_t>(y) * width + x) * 3;
    data[o] = c.object;
    data[o + 1] = c.color;
    data[o + 2] = c.state;
  }

  friend bool operator==(const EncodedTensor&, const EncodedTensor&) = default;
};

/// 8-bit RGB, row-major, pixel (px, py) at (py * width + px) * 3.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

}  // namespace gridcurio

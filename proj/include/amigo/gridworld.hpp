#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace amigo {

enum class Object : std::uint8_t { Empty = 0, Wall, Door, Key, Ball, Box, Goal };
inline constexpr int kNumObjects = 7;

enum class Color : std::uint8_t { Red = 0, Green, Blue, Purple, Yellow, Grey };
inline constexpr int kNumColors = 6;

/// Door flag values. Every non-door tile carries flag 0.
enum class DoorState : std::uint8_t { Open = 0, Closed = 1, Locked = 2 };
inline constexpr int kNumFlags = 3;

enum class Direction : std::uint8_t { North = 0, East, South, West };
inline constexpr int kNumDirections = 4;

enum class Action : std::uint8_t { TurnLeft = 0, TurnRight, MoveForward, PickUp, Drop, Toggle };
inline constexpr int kNumActions = 6;

std::string_view to_string(Object o);
std::string_view to_string(Color c);
std::string_view to_string(Action a);

struct Pos {
  int x = 0;
  int y = 0;
  friend bool operator==(const Pos&, const Pos&) = default;
};

/// One grid cell. The visible part is the (object, color, flag) triple; a box
/// additionally hides what it contains.
struct Tile {
  Object object = Object::Empty;
  Color color = Color::Red;
  std::uint8_t flag = 0;
  Object content = Object::Empty;
  Color content_color = Color::Red;

  static Tile empty() { return {}; }
  static Tile wall() { return {Object::Wall}; }
  static Tile door(Color c, DoorState s) { return {Object::Door, c, static_cast<std::uint8_t>(s)}; }
  static Tile key(Color c) { return {Object::Key, c}; }
  static Tile ball(Color c) { return {Object::Ball, c}; }
  static Tile goal(Color c = Color::Green) { return {Object::Goal, c}; }
  static Tile box(Color c, std::optional<Tile> contents = std::nullopt) {
    Tile t{Object::Box, c};
    if (contents) {
      t.content = contents->object;
      t.content_color = contents->color;
    }
    return t;
  }

  bool is_door() const { return object == Object::Door; }
  bool is_open_door() const { return is_door() && flag == static_cast<std::uint8_t>(DoorState::Open); }
  bool carriable() const { return object == Object::Key || object == Object::Ball || object == Object::Box; }
  /// Whether the agent may stand on this tile.
  bool walkable() const { return object == Object::Empty || object == Object::Goal || is_open_door(); }

  friend bool operator==(const Tile&, const Tile&) = default;
};

/// Compares only what an observation can see.
inline bool same_triple(const Tile& a, const Tile& b) {
  return a.object == b.object && a.color == b.color && a.flag == b.flag;
}

struct GridState {
  int width = 0;
  int height = 0;
  std::vector<Tile> tiles;  // row-major, index y * width + x
  Pos agent_pos;
  Direction agent_dir = Direction::East;
  std::optional<Tile> carried;
  int step = 0;
  int t_max = 1;
  Pos extrinsic_goal_pos;
  bool done = false;

  bool in_bounds(Pos p) const { return p.x >= 0 && p.y >= 0 && p.x < width && p.y < height; }
  const Tile& at(Pos p) const { return tiles[static_cast<std::size_t>(p.y * width + p.x)]; }
  Tile& at(Pos p) { return tiles[static_cast<std::size_t>(p.y * width + p.x)]; }
  Pos front() const;

  friend bool operator==(const GridState&, const GridState&) = default;
};

enum class Family : std::uint8_t { KeyCorridor, ObstructedMaze, TwoRoom };

/// Parameters of a procedurally generated environment family.
///
/// KeyCorridor uses room_size and num_rows. ObstructedMaze uses room_size,
/// num_doors (1 or 2 locked doors), key_in_box and blocked. TwoRoom uses size
/// and door. A t_max of 0 selects the family default.
struct EnvSpec {
  Family family = Family::TwoRoom;
  int room_size = 3;
  int num_rows = 3;
  int num_doors = 1;
  bool key_in_box = false;
  bool blocked = false;
  int size = 8;
  DoorState door = DoorState::Locked;
  int t_max = 0;
  std::uint64_t seed = 0;

  int width() const;
  int height() const;
  int default_t_max() const;
  int effective_t_max() const { return t_max > 0 ? t_max : default_t_max(); }

  /// Canonical short name, e.g. "KeyCorridorS3R3", "ObstructedMaze-1Dlhb-S5", "TwoRoom-8".
  std::string name() const;
  /// Parses a canonical name (case-insensitive family prefix).
  static EnvSpec parse(std::string_view name);

  friend bool operator==(const EnvSpec&, const EnvSpec&) = default;
};

/// Builds the layout for one episode. Identical (spec, episode_seed) pairs give
/// identical states. Throws EnvError on unsupported parameters.
GridState generate(const EnvSpec& spec, std::uint64_t episode_seed);

struct StepOutcome {
  double reward = 0.0;
  bool done = false;
  bool reached_goal = false;
};

/// Applies one action in place. Throws EnvError if the episode already ended.
StepOutcome apply_action(GridState& state, Action action);

struct Transition {
  GridState state;
  double reward = 0.0;
  bool done = false;
};

/// Value-semantics wrapper over apply_action.
Transition step(const GridState& state, Action action);

/// Reward for reaching the extrinsic goal when `steps` actions have been taken.
double extrinsic_reward(int steps, int t_max);

inline constexpr int kObjectChannel = 0;
inline constexpr int kColorChannel = 1;
inline constexpr int kFlagChannel = 2;
inline constexpr int kAgentChannel = 3;
inline constexpr int kDirectionChannel = 4;
inline constexpr int kGoalChannel = 5;
inline constexpr int kBaseChannels = 5;

/// Symbolic full observation, laid out (channels, height, width).
///
/// Object/color/flag layers hold tile indices; the agent layer is 1 on the
/// agent cell; the direction layer holds direction+1 on the agent cell; the
/// optional goal layer is a one-hot over cells.
struct Observation {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<std::int32_t> data;

  bool has_goal() const { return channels > kBaseChannels; }
  std::int32_t at(int c, int y, int x) const {
    return data[static_cast<std::size_t>((c * height + y) * width + x)];
  }
  friend bool operator==(const Observation&, const Observation&) = default;
};

Observation encode_observation(const GridState& state, std::optional<Pos> goal = std::nullopt);

/// One character per tile. See render_legend().
std::string render_ascii(const GridState& state, std::optional<Pos> goal = std::nullopt);
std::string_view render_legend();

}  // namespace amigo

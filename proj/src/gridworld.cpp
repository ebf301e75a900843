#include "amigo/gridworld.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

#include "amigo/errors.hpp"
#include "amigo/rng.hpp"

namespace amigo {

std::string_view to_string(Object o) {
  switch (o) {
    case Object::Empty: return "empty";
    case Object::Wall: return "wall";
    case Object::Door: return "door";
    case Object::Key: return "key";
    case Object::Ball: return "ball";
    case Object::Box: return "box";
    case Object::Goal: return "goal";
  }
  return "?";
}

std::string_view to_string(Color c) {
  switch (c) {
    case Color::Red: return "red";
    case Color::Green: return "green";
    case Color::Blue: return "blue";
    case Color::Purple: return "purple";
    case Color::Yellow: return "yellow";
    case Color::Grey: return "grey";
  }
  return "?";
}

std::string_view to_string(Action a) {
  switch (a) {
    case Action::TurnLeft: return "left";
    case Action::TurnRight: return "right";
    case Action::MoveForward: return "forward";
    case Action::PickUp: return "pickup";
    case Action::Drop: return "drop";
    case Action::Toggle: return "toggle";
  }
  return "?";
}

namespace {

constexpr std::array<Pos, kNumDirections> kDirVec{{{0, -1}, {1, 0}, {0, 1}, {-1, 0}}};

struct Rect {
  int x0, y0, x1, y1;  // inclusive interior bounds
};

class Builder {
 public:
  Builder(int w, int h, Rng& rng) : rng_(rng) {
    st_.width = w;
    st_.height = h;
    st_.tiles.assign(static_cast<std::size_t>(w * h), Tile::empty());
    for (int x = 0; x < w; ++x) {
      set({x, 0}, Tile::wall());
      set({x, h - 1}, Tile::wall());
    }
    for (int y = 0; y < h; ++y) {
      set({0, y}, Tile::wall());
      set({w - 1, y}, Tile::wall());
    }
  }

  void set(Pos p, Tile t) { st_.at(p) = t; }
  const Tile& get(Pos p) const { return st_.at(p); }
  void vwall(int x) {
    for (int y = 0; y < st_.height; ++y) set({x, y}, Tile::wall());
  }
  void hwall(int y, int x0, int x1) {
    for (int x = x0; x <= x1; ++x) set({x, y}, Tile::wall());
  }
  void reserve(Pos p) { reserved_.push_back(p); }

  int rand_int(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(uniform_index(rng_, static_cast<std::uint64_t>(hi - lo + 1)));
  }
  Color rand_color() { return static_cast<Color>(rand_int(0, kNumColors - 1)); }
  Color rand_color_except(std::initializer_list<Color> taken) {
    std::vector<Color> pool;
    for (int c = 0; c < kNumColors; ++c) {
      if (std::find(taken.begin(), taken.end(), static_cast<Color>(c)) == taken.end())
        pool.push_back(static_cast<Color>(c));
    }
    return pool[uniform_index(rng_, pool.size())];
  }

  bool is_free(Pos p) const {
    if (st_.at(p).object != Object::Empty) return false;
    if (has_agent_ && st_.agent_pos == p) return false;
    return std::find(reserved_.begin(), reserved_.end(), p) == reserved_.end();
  }

  Pos free_cell(const Rect& r) {
    std::vector<Pos> cand;
    for (int y = r.y0; y <= r.y1; ++y)
      for (int x = r.x0; x <= r.x1; ++x)
        if (is_free({x, y})) cand.push_back({x, y});
    if (cand.empty()) throw EnvError("degenerate-size: no free cell left in room");
    return cand[uniform_index(rng_, cand.size())];
  }

  Pos place(const Rect& r, Tile t) {
    Pos p = free_cell(r);
    set(p, t);
    return p;
  }

  void place_agent(const Rect& r) {
    st_.agent_pos = free_cell(r);
    st_.agent_dir = static_cast<Direction>(rand_int(0, kNumDirections - 1));
    has_agent_ = true;
  }

  GridState finish(Pos goal_pos, int t_max) {
    st_.extrinsic_goal_pos = goal_pos;
    st_.t_max = t_max;
    return std::move(st_);
  }

 private:
  Rng& rng_;
  GridState st_;
  std::vector<Pos> reserved_;
  bool has_agent_ = false;
};

void check_grid(int w, int h) {
  if (w < 3 || h < 3) throw EnvError("degenerate-size: grid smaller than 3x3");
  if (w > 32 || h > 32) throw EnvError("degenerate-size: grid larger than 32x32");
}

GridState generate_two_room(const EnvSpec& spec, Rng& rng) {
  const int n = spec.size;
  if (n < 5) throw EnvError("degenerate-size: two-room needs size >= 5");
  check_grid(n, n);
  Builder b(n, n, rng);
  const int wall_x = b.rand_int(2, n - 3);
  b.vwall(wall_x);
  const Rect left{1, 1, wall_x - 1, n - 2};
  const Rect right{wall_x + 1, 1, n - 2, n - 2};
  const Pos door{wall_x, b.rand_int(1, n - 2)};
  const Color door_color = b.rand_color();
  b.set(door, Tile::door(door_color, spec.door));
  if (spec.door == DoorState::Locked) {
    // Keep the cell in front of the door clear so a dropped key cannot wall it off.
    b.reserve({wall_x - 1, door.y});
    b.place(left, Tile::key(door_color));
  }
  b.place_agent(left);
  const Pos goal = b.place(right, Tile::goal());
  return b.finish(goal, spec.effective_t_max());
}

GridState generate_key_corridor(const EnvSpec& spec, Rng& rng) {
  const int s = spec.room_size;
  const int rows = spec.num_rows;
  if (s < 3 || rows < 1) throw EnvError("degenerate-size: key corridor needs room_size >= 3 and num_rows >= 1");
  const int w = spec.width();
  const int h = spec.height();
  check_grid(w, h);
  Builder b(w, h, rng);
  const int step = s - 1;
  b.vwall(step);
  b.vwall(2 * step);
  for (int j = 1; j < rows; ++j) {
    b.hwall(j * step, 0, step);
    b.hwall(j * step, 2 * step, w - 1);
  }
  auto room = [&](int col, int row) {
    return Rect{col * step + 1, row * step + 1, col * step + s - 2, row * step + s - 2};
  };
  const Rect corridor{step + 1, 1, 2 * step - 1, h - 2};

  const int locked_row = b.rand_int(0, rows - 1);
  const Color locked_color = b.rand_color();
  for (int side = 0; side < 2; ++side) {
    for (int j = 0; j < rows; ++j) {
      const int wall_x = side == 0 ? step : 2 * step;
      const Pos door{wall_x, j * step + b.rand_int(1, s - 2)};
      if (side == 1 && j == locked_row) {
        b.set(door, Tile::door(locked_color, DoorState::Locked));
      } else {
        b.set(door, Tile::door(b.rand_color_except({locked_color}), DoorState::Closed));
      }
    }
  }
  const Pos ball = b.place(room(2, locked_row), Tile::ball(b.rand_color()));
  b.place(room(0, b.rand_int(0, rows - 1)), Tile::key(locked_color));
  const int mid = rows / 2;
  b.place_agent(Rect{corridor.x0, mid * step + 1, corridor.x1, mid * step + s - 2});
  return b.finish(ball, spec.effective_t_max());
}

GridState generate_obstructed_maze(const EnvSpec& spec, Rng& rng) {
  const int s = spec.room_size;
  const int doors = spec.num_doors;
  if (doors < 1 || doors > 2) throw EnvError("unsupported-family: obstructed maze supports 1 or 2 locked doors");
  if (s < 4) throw EnvError("degenerate-size: obstructed maze needs room_size >= 4");
  const int w = spec.width();
  const int h = spec.height();
  check_grid(w, h);
  const int interior = (s - 2) * (s - 2);
  // Agent room holds the agent plus, per door, a key and a blocker or a kept-clear approach cell.
  const int needed = 1 + 2 * doors;
  if (interior < needed) throw EnvError("degenerate-size: agent room too small for obstructed maze objects");

  Builder b(w, h, rng);
  const int step = s - 1;
  const int cols = doors + 1;
  for (int i = 1; i < cols; ++i) b.vwall(i * step);
  auto room = [&](int col) { return Rect{col * step + 1, 1, col * step + s - 2, s - 2}; };

  const int agent_col = doors == 1 ? 0 : 1;
  std::vector<int> side_cols;
  if (doors == 1) side_cols = {1};
  else side_cols = {0, 2};

  std::vector<Color> used;
  std::vector<std::pair<Pos, Color>> door_list;
  for (int col : side_cols) {
    const int wall_x = col > agent_col ? col * step : (col + 1) * step;
    const Pos door{wall_x, b.rand_int(1, s - 2)};
    Color c = b.rand_color();
    while (std::find(used.begin(), used.end(), c) != used.end()) c = b.rand_color();
    used.push_back(c);
    b.set(door, Tile::door(c, DoorState::Locked));
    door_list.push_back({door, c});
  }
  const Rect agent_room = room(agent_col);
  for (const auto& [door, c] : door_list) {
    const int dx = door.x < agent_room.x0 ? 1 : -1;
    const Pos approach{door.x + dx, door.y};
    if (spec.blocked) {
      b.set(approach, Tile::ball(b.rand_color()));
    } else {
      b.reserve(approach);
    }
  }
  for (const auto& [door, c] : door_list) {
    if (spec.key_in_box) {
      b.place(agent_room, Tile::box(b.rand_color(), Tile::key(c)));
    } else {
      b.place(agent_room, Tile::key(c));
    }
  }
  const int goal_col = side_cols[uniform_index(rng, side_cols.size())];
  const Pos ball = b.place(room(goal_col), Tile::ball(b.rand_color()));
  b.place_agent(agent_room);
  return b.finish(ball, spec.effective_t_max());
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

int parse_int(std::string_view s, std::string_view what) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw EnvError("cannot parse " + std::string(what) + " in env name");
  return v;
}

}  // namespace

Pos GridState::front() const {
  const Pos d = kDirVec[static_cast<std::size_t>(agent_dir)];
  return {agent_pos.x + d.x, agent_pos.y + d.y};
}

int EnvSpec::width() const {
  switch (family) {
    case Family::KeyCorridor: return (room_size - 1) * 3 + 1;
    case Family::ObstructedMaze: return (room_size - 1) * (num_doors + 1) + 1;
    case Family::TwoRoom: return size;
  }
  return 0;
}

int EnvSpec::height() const {
  switch (family) {
    case Family::KeyCorridor: return (room_size - 1) * num_rows + 1;
    case Family::ObstructedMaze: return room_size;
    case Family::TwoRoom: return size;
  }
  return 0;
}

int EnvSpec::default_t_max() const {
  switch (family) {
    case Family::KeyCorridor: return 10 * room_size * room_size * num_rows;
    case Family::ObstructedMaze: return 8 * room_size * room_size * (num_doors + 1);
    case Family::TwoRoom: return 100;
  }
  return 100;
}

std::string EnvSpec::name() const {
  std::ostringstream os;
  switch (family) {
    case Family::KeyCorridor: os << "KeyCorridorS" << room_size << "R" << num_rows; break;
    case Family::ObstructedMaze:
      os << "ObstructedMaze-" << num_doors << "Dl" << (key_in_box ? "h" : "") << (blocked ? "b" : "") << "-S"
         << room_size;
      break;
    case Family::TwoRoom:
      os << "TwoRoom-" << size;
      if (door != DoorState::Locked) os << (door == DoorState::Open ? "-open" : "-closed");
      break;
  }
  return os.str();
}

EnvSpec EnvSpec::parse(std::string_view name) {
  const std::string s = lower(name);
  EnvSpec spec;
  if (s.rfind("keycorridor", 0) == 0) {
    // keycorridorS<n>R<m>
    spec.family = Family::KeyCorridor;
    const auto spos = s.find('s', 11);
    const auto rpos = s.find('r', 11);
    if (spos == std::string::npos || rpos == std::string::npos || rpos < spos)
      throw EnvError("unsupported-family: expected KeyCorridorS<n>R<m>");
    spec.room_size = parse_int(std::string_view(s).substr(spos + 1, rpos - spos - 1), "room size");
    spec.num_rows = parse_int(std::string_view(s).substr(rpos + 1), "row count");
    return spec;
  }
  if (s.rfind("obstructedmaze-", 0) == 0) {
    // obstructedmaze-<d>dl[h][b][-s<n>]
    spec.family = Family::ObstructedMaze;
    spec.room_size = 6;
    std::string_view rest = std::string_view(s).substr(15);
    const auto dash = rest.find('-');
    std::string_view body = rest.substr(0, dash);
    if (dash != std::string_view::npos) {
      std::string_view size_part = rest.substr(dash + 1);
      if (size_part.empty() || size_part[0] != 's') throw EnvError("unsupported-family: expected -S<n> suffix");
      spec.room_size = parse_int(size_part.substr(1), "room size");
    }
    const auto dl = body.find("dl");
    if (dl == std::string_view::npos) throw EnvError("unsupported-family: expected ObstructedMaze-<n>Dl[h][b]");
    spec.num_doors = parse_int(body.substr(0, dl), "door count");
    for (char c : body.substr(dl + 2)) {
      if (c == 'h') spec.key_in_box = true;
      else if (c == 'b') spec.blocked = true;
      else throw EnvError("unsupported-family: unknown obstructed maze flag");
    }
    return spec;
  }
  if (s.rfind("tworoom-", 0) == 0) {
    spec.family = Family::TwoRoom;
    std::string_view rest = std::string_view(s).substr(8);
    const auto dash = rest.find('-');
    spec.size = parse_int(rest.substr(0, dash), "size");
    if (dash != std::string_view::npos) {
      const auto door = rest.substr(dash + 1);
      if (door == "open") spec.door = DoorState::Open;
      else if (door == "closed") spec.door = DoorState::Closed;
      else if (door == "locked") spec.door = DoorState::Locked;
      else throw EnvError("unsupported-family: unknown two-room door kind");
    }
    return spec;
  }
  throw EnvError("unsupported-family: " + std::string(name));
}

GridState generate(const EnvSpec& spec, std::uint64_t episode_seed) {
  Rng rng = make_rng(spec.seed, episode_seed);
  if (spec.t_max < 0) throw EnvError("degenerate-size: negative t_max");
  switch (spec.family) {
    case Family::TwoRoom: return generate_two_room(spec, rng);
    case Family::KeyCorridor: return generate_key_corridor(spec, rng);
    case Family::ObstructedMaze: return generate_obstructed_maze(spec, rng);
  }
  throw EnvError("unsupported-family");
}

double extrinsic_reward(int steps, int t_max) {
  return 1.0 - 0.9 * static_cast<double>(steps) / static_cast<double>(t_max);
}

StepOutcome apply_action(GridState& st, Action action) {
  if (st.done || st.step >= st.t_max) throw EnvError("step-after-done");
  StepOutcome out;
  const Pos fwd = st.front();
  const bool fwd_ok = st.in_bounds(fwd);
  switch (action) {
    case Action::TurnLeft:
      st.agent_dir = static_cast<Direction>((static_cast<int>(st.agent_dir) + 3) % kNumDirections);
      break;
    case Action::TurnRight:
      st.agent_dir = static_cast<Direction>((static_cast<int>(st.agent_dir) + 1) % kNumDirections);
      break;
    case Action::MoveForward:
      if (fwd_ok && fwd == st.extrinsic_goal_pos) {
        st.agent_pos = fwd;
        out.reached_goal = true;
      } else if (fwd_ok && st.at(fwd).walkable()) {
        st.agent_pos = fwd;
      }
      break;
    case Action::PickUp:
      if (fwd_ok && !st.carried && st.at(fwd).carriable()) {
        st.carried = st.at(fwd);
        st.at(fwd) = Tile::empty();
        if (fwd == st.extrinsic_goal_pos) out.reached_goal = true;
      }
      break;
    case Action::Drop:
      if (fwd_ok && st.carried && st.at(fwd).object == Object::Empty && fwd != st.extrinsic_goal_pos) {
        st.at(fwd) = *st.carried;
        st.carried.reset();
      }
      break;
    case Action::Toggle:
      if (fwd_ok) {
        Tile& t = st.at(fwd);
        if (t.is_door()) {
          const auto s = static_cast<DoorState>(t.flag);
          if (s == DoorState::Open) {
            t.flag = static_cast<std::uint8_t>(DoorState::Closed);
          } else if (s == DoorState::Closed) {
            t.flag = static_cast<std::uint8_t>(DoorState::Open);
          } else if (st.carried && st.carried->object == Object::Key && st.carried->color == t.color) {
            t.flag = static_cast<std::uint8_t>(DoorState::Open);
          }
        } else if (t.object == Object::Box) {
          t = t.content == Object::Empty ? Tile::empty() : Tile{t.content, t.content_color};
        }
      }
      break;
  }
  st.step += 1;
  if (out.reached_goal) {
    out.reward = extrinsic_reward(st.step, st.t_max);
    out.done = true;
  } else if (st.step >= st.t_max) {
    out.done = true;
  }
  st.done = out.done;
  return out;
}

Transition step(const GridState& state, Action action) {
  Transition tr{state};
  const StepOutcome o = apply_action(tr.state, action);
  tr.reward = o.reward;
  tr.done = o.done;
  return tr;
}

Observation encode_observation(const GridState& st, std::optional<Pos> goal) {
  Observation obs;
  obs.channels = goal ? kBaseChannels + 1 : kBaseChannels;
  obs.height = st.height;
  obs.width = st.width;
  const std::size_t plane = static_cast<std::size_t>(st.width * st.height);
  obs.data.assign(plane * static_cast<std::size_t>(obs.channels), 0);
  for (std::size_t i = 0; i < plane; ++i) {
    const Tile& t = st.tiles[i];
    obs.data[kObjectChannel * plane + i] = static_cast<std::int32_t>(t.object);
    obs.data[kColorChannel * plane + i] = static_cast<std::int32_t>(t.color);
    obs.data[kFlagChannel * plane + i] = t.flag;
  }
  const std::size_t agent = static_cast<std::size_t>(st.agent_pos.y * st.width + st.agent_pos.x);
  obs.data[kAgentChannel * plane + agent] = 1;
  obs.data[kDirectionChannel * plane + agent] = static_cast<std::int32_t>(st.agent_dir) + 1;
  if (goal) {
    obs.data[kGoalChannel * plane + static_cast<std::size_t>(goal->y * st.width + goal->x)] = 1;
  }
  return obs;
}

std::string_view render_legend() {
  return "# wall  . empty  D locked door  d closed door  / open door  k key  o ball  b box\n"
         "G goal square  * extrinsic goal object  X proposed goal cell  ^ > v < agent facing N/E/S/W\n";
}

std::string render_ascii(const GridState& st, std::optional<Pos> goal) {
  static constexpr std::array<char, kNumDirections> kAgent{'^', '>', 'v', '<'};
  std::string out;
  out.reserve(static_cast<std::size_t>((st.width + 1) * st.height));
  for (int y = 0; y < st.height; ++y) {
    for (int x = 0; x < st.width; ++x) {
      const Pos p{x, y};
      char ch = '?';
      const Tile& t = st.at(p);
      switch (t.object) {
        case Object::Empty: ch = '.'; break;
        case Object::Wall: ch = '#'; break;
        case Object::Door: ch = t.flag == 2 ? 'D' : (t.flag == 1 ? 'd' : '/'); break;
        case Object::Key: ch = 'k'; break;
        case Object::Ball: ch = 'o'; break;
        case Object::Box: ch = 'b'; break;
        case Object::Goal: ch = 'G'; break;
      }
      if (p == st.extrinsic_goal_pos && t.object != Object::Goal && t.object != Object::Empty) ch = '*';
      if (goal && *goal == p) ch = 'X';
      if (st.agent_pos == p) ch = kAgent[static_cast<std::size_t>(st.agent_dir)];
      out.push_back(ch);
    }
    out.push_back('\n');
  }
  return out;
}

}  // namespace amigo

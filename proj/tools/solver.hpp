#pragma once

// Breadth-first search over complete game states. Used as a solvability
// oracle for generated layouts; exponential in general, fine for small grids.

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "amigo/gridworld.hpp"

namespace amigo::oracle {

inline std::string state_key(const GridState& s) {
  std::string k;
  k.reserve(s.tiles.size() * 3 + 8);
  k.push_back(static_cast<char>(s.agent_pos.x));
  k.push_back(static_cast<char>(s.agent_pos.y));
  k.push_back(static_cast<char>(s.agent_dir));
  if (s.carried) {
    k.push_back(static_cast<char>(s.carried->object));
    k.push_back(static_cast<char>(s.carried->color));
    k.push_back(static_cast<char>(s.carried->content));
    k.push_back(static_cast<char>(s.carried->content_color));
  } else {
    k.push_back('-');
  }
  for (const Tile& t : s.tiles) {
    k.push_back(static_cast<char>(static_cast<int>(t.object) * 16 + static_cast<int>(t.flag)));
    k.push_back(static_cast<char>(static_cast<int>(t.color) * 16 + static_cast<int>(t.content)));
    k.push_back(static_cast<char>(t.content_color));
  }
  return k;
}

struct SolveResult {
  bool solved = false;
  int length = 0;           // actions in the shortest solution
  std::size_t expanded = 0;
  std::vector<Action> plan;
};

/// Shortest action sequence reaching the extrinsic goal, ignoring the step limit.
inline SolveResult solve(GridState start, std::size_t max_states = 2'000'000) {
  start.t_max = 1 << 30;
  start.step = 0;
  struct Node {
    GridState state;
    int parent;
    Action action;
  };
  std::vector<Node> nodes;
  std::unordered_set<std::string> seen;
  std::deque<int> frontier;
  nodes.push_back({start, -1, Action::TurnLeft});
  seen.insert(state_key(start));
  frontier.push_back(0);
  SolveResult res;
  while (!frontier.empty() && nodes.size() < max_states) {
    const int id = frontier.front();
    frontier.pop_front();
    ++res.expanded;
    for (int a = 0; a < 6; ++a) {
      GridState next = nodes[static_cast<std::size_t>(id)].state;
      const StepOutcome out = apply_action(next, static_cast<Action>(a));
      if (out.reached_goal) {
        std::vector<Action> plan{static_cast<Action>(a)};
        for (int cur = id; nodes[static_cast<std::size_t>(cur)].parent >= 0; cur = nodes[static_cast<std::size_t>(cur)].parent)
          plan.push_back(nodes[static_cast<std::size_t>(cur)].action);
        res.plan.assign(plan.rbegin(), plan.rend());
        res.solved = true;
        res.length = static_cast<int>(res.plan.size());
        return res;
      }
      std::string key = state_key(next);
      if (!seen.insert(std::move(key)).second) continue;
      next.step = 0;
      nodes.push_back({std::move(next), id, static_cast<Action>(a)});
      frontier.push_back(static_cast<int>(nodes.size()) - 1);
    }
  }
  return res;
}

}  // namespace amigo::oracle

#include "amigo/goals.hpp"

#include <algorithm>

#include "amigo/errors.hpp"

namespace amigo {

GoalEpisode begin_goal(const GridState& state, Goal goal) {
  if (!state.in_bounds(goal.cell())) throw EnvError("goal out of bounds");
  GoalEpisode ep;
  ep.goal = goal;
  ep.snapshot = state.at(goal.cell());
  ep.set_at_step = state.step;
  return ep;
}

bool verify(const GoalEpisode& episode, const GridState& state) {
  const Pos cell = episode.goal.cell();
  if (state.agent_pos == cell) return true;
  return !same_triple(state.at(cell), episode.snapshot);
}

double student_intrinsic_reward(const GridState& state, const GoalEpisode& episode, IntrinsicClock clock) {
  const int t = clock == IntrinsicClock::EpisodeStep ? state.step : state.step - episode.set_at_step;
  return 1.0 - 0.9 * static_cast<double>(t) / static_cast<double>(state.t_max);
}

int mark_reached(GoalEpisode& episode, const GridState& state) {
  episode.status = GoalStatus::Reached;
  // A goal verified on its proposal step still took one action to reach.
  episode.t_plus = std::max(1, state.step - episode.set_at_step);
  return episode.t_plus;
}

void mark_expired(GoalEpisode& episode) {
  episode.status = GoalStatus::Expired;
  episode.t_plus = 0;
}

}  // namespace amigo

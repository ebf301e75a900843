#pragma once

#include <cstdint>

#include "amigo/gridworld.hpp"

namespace amigo {

/// A target cell proposed by the teacher.
struct Goal {
  int x = 0;
  int y = 0;

  Pos cell() const { return {x, y}; }
  friend bool operator==(const Goal&, const Goal&) = default;
};

enum class GoalStatus : std::uint8_t { Pending, Reached, Expired };

/// A goal together with what is needed to verify and score it.
struct GoalEpisode {
  Goal goal;
  Tile snapshot;        // goal cell content when the goal was proposed
  int set_at_step = 0;  // episode step at proposal time
  GoalStatus status = GoalStatus::Pending;
  int t_plus = 0;  // steps from proposal to completion; 0 unless reached

  bool resolved() const { return status != GoalStatus::Pending; }
};

/// Starts a goal episode at the current state of the environment.
GoalEpisode begin_goal(const GridState& state, Goal goal);

/// True when the goal cell's visible triple differs from the snapshot, or the
/// agent stands on the goal cell.
bool verify(const GoalEpisode& episode, const GridState& state);

/// Which step count discounts the student's intrinsic reward.
enum class IntrinsicClock : std::uint8_t { EpisodeStep, SinceProposal };

/// Reward issued on the step where verify() first holds: 1 - 0.9 t / t_max.
double student_intrinsic_reward(const GridState& state, const GoalEpisode& episode,
                                IntrinsicClock clock = IntrinsicClock::EpisodeStep);

/// Marks the episode reached at the state's step. Returns t_plus.
int mark_reached(GoalEpisode& episode, const GridState& state);
void mark_expired(GoalEpisode& episode);

}  // namespace amigo

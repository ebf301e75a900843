#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

#include "amigo/goals.hpp"
#include "amigo/gridworld.hpp"
#include "amigo/rng.hpp"

namespace amigo {

enum class RewardForm : std::uint8_t { Threshold, Gaussian, LinearExponential };

std::string_view to_string(RewardForm f);
RewardForm parse_reward_form(std::string_view s);

struct TeacherConfig {
  RewardForm reward_form = RewardForm::Threshold;
  double alpha = 0.7;
  double beta = 0.3;
  double sigma = 0.0;  // Gaussian width; 0 means t_star / 2
  double c = 10.0;     // linear-exponential decay length in steps
  int initial_t_star = 1;
  int streak_length = 10;
  bool boundary_bonus = true;
  double b_env = 0.1;
  bool novelty_bonus = false;
  double b_nov = 0.1;
  double extrinsic_weight = 1.0;  // 0 disables the extrinsic bonus
};

/// Learner-owned teacher bookkeeping.
struct TeacherState {
  TeacherConfig config;
  int t_star = 1;
  int streak = 0;
  std::array<std::uint64_t, kNumObjects> goal_counts{};  // per goal descriptor

  TeacherState() = default;
  explicit TeacherState(TeacherConfig cfg) : config(cfg), t_star(cfg.initial_t_star) {}

  double effective_sigma() const { return config.sigma > 0.0 ? config.sigma : 0.5 * t_star; }
};

struct TeacherBonuses {
  double boundary = 0.0;
  double novelty = 0.0;
  double extrinsic = 0.0;

  double total() const { return boundary + novelty + extrinsic; }
};

/// One scored goal. `reward` is the reward-form value; the teacher is trained on
/// reward + bonuses.total().
struct TeacherEvent {
  GoalEpisode goal_episode;
  double reward = 0.0;
  TeacherBonuses bonuses;

  double total_reward() const { return reward + bonuses.total(); }
};

double reward_threshold(int t_plus, const TeacherState& st);
double reward_gaussian(int t_plus, const TeacherState& st);
double reward_linexp(int t_plus, const TeacherState& st);
/// Dispatches on st.config.reward_form.
double teacher_reward(int t_plus, const TeacherState& st);

/// Streak bookkeeping; raises t_star by one after `streak_length` consecutive
/// completions with t_plus >= t_star.
TeacherState update_threshold(TeacherState st, const GoalEpisode& outcome);

/// b_env when the goal cell's visible triple differs across an episode reset.
double boundary_bonus(const Tile& prev_episode_final, const Tile& new_episode_initial, double b_env);

/// Object type under the goal cell at proposal time.
Object goal_descriptor(const GridState& state, Goal goal);
void record_proposal(TeacherState& st, Object descriptor);
/// b_nov / sqrt(count); 0 when novelty is disabled or the descriptor was never proposed.
double novelty_bonus(const TeacherState& st, Object descriptor);

struct GoalSample {
  Goal goal;
  double log_prob = 0.0;
  double entropy = 0.0;
};

/// Samples a cell from softmax(cell_logits) over a height x width grid.
GoalSample sample_goal(std::span<const float> cell_logits, int height, int width, Rng& rng);

}  // namespace amigo

#include "amigo/teacher.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "amigo/errors.hpp"

namespace amigo {

std::string_view to_string(RewardForm f) {
  switch (f) {
    case RewardForm::Threshold: return "threshold";
    case RewardForm::Gaussian: return "gaussian";
    case RewardForm::LinearExponential: return "linear-exponential";
  }
  return "?";
}

RewardForm parse_reward_form(std::string_view s) {
  if (s == "threshold") return RewardForm::Threshold;
  if (s == "gaussian") return RewardForm::Gaussian;
  if (s == "linear-exponential" || s == "linexp") return RewardForm::LinearExponential;
  throw ConfigError("unknown reward form: " + std::string(s));
}

double reward_threshold(int t_plus, const TeacherState& st) {
  if (t_plus > 0 && t_plus >= st.t_star) return st.config.alpha;
  return -st.config.beta;
}

double reward_gaussian(int t_plus, const TeacherState& st) {
  if (t_plus == 0) return -1.0;
  // 1 + log N(t+; t*, s) - log N(t*; t*, s); the normalizers cancel.
  const double sigma = st.effective_sigma();
  const double d = static_cast<double>(t_plus - st.t_star);
  return 1.0 - d * d / (2.0 * sigma * sigma);
}

double reward_linexp(int t_plus, const TeacherState& st) {
  if (t_plus < st.t_star) return static_cast<double>(t_plus) / static_cast<double>(st.t_star);
  return std::exp(-static_cast<double>(t_plus - st.t_star) / st.config.c);
}

double teacher_reward(int t_plus, const TeacherState& st) {
  switch (st.config.reward_form) {
    case RewardForm::Threshold: return reward_threshold(t_plus, st);
    case RewardForm::Gaussian: return reward_gaussian(t_plus, st);
    case RewardForm::LinearExponential: return reward_linexp(t_plus, st);
  }
  return 0.0;
}

TeacherState update_threshold(TeacherState st, const GoalEpisode& outcome) {
  if (outcome.status == GoalStatus::Reached && outcome.t_plus >= st.t_star) {
    st.streak += 1;
  } else {
    st.streak = 0;
  }
  if (st.streak >= st.config.streak_length) {
    st.t_star += 1;
    st.streak = 0;
  }
  return st;
}

double boundary_bonus(const Tile& prev_episode_final, const Tile& new_episode_initial, double b_env) {
  return same_triple(prev_episode_final, new_episode_initial) ? 0.0 : b_env;
}

Object goal_descriptor(const GridState& state, Goal goal) { return state.at(goal.cell()).object; }

void record_proposal(TeacherState& st, Object descriptor) { st.goal_counts[static_cast<std::size_t>(descriptor)] += 1; }

double novelty_bonus(const TeacherState& st, Object descriptor) {
  if (!st.config.novelty_bonus) return 0.0;
  const auto n = st.goal_counts[static_cast<std::size_t>(descriptor)];
  if (n == 0) return 0.0;
  return st.config.b_nov / std::sqrt(static_cast<double>(n));
}

GoalSample sample_goal(std::span<const float> cell_logits, int height, int width, Rng& rng) {
  const std::size_t n = static_cast<std::size_t>(height * width);
  if (cell_logits.size() != n) throw ShapeError("sample_goal: logit count does not match grid");
  const float mx = *std::max_element(cell_logits.begin(), cell_logits.end());
  std::vector<double> p(n);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = std::exp(static_cast<double>(cell_logits[i] - mx));
    z += p[i];
  }
  const double log_z = std::log(z) + mx;
  double entropy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    p[i] /= z;
    if (p[i] > 0.0) entropy -= p[i] * (static_cast<double>(cell_logits[i]) - log_z);
  }
  const std::size_t idx = sample_categorical<double>(rng, p);
  GoalSample s;
  s.goal = {static_cast<int>(idx % static_cast<std::size_t>(width)), static_cast<int>(idx / static_cast<std::size_t>(width))};
  s.log_prob = static_cast<double>(cell_logits[idx]) - log_z;
  s.entropy = entropy;
  return s;
}

}  // namespace amigo

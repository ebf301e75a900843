#include "verify.hpp"

#include <cmath>
#include <functional>
#include <ostream>
#include <sstream>
#include <string>

#include "amigo/errors.hpp"
#include "amigo/goals.hpp"
#include "amigo/teacher.hpp"
#include "amigo/trainer.hpp"
#include "solver.hpp"

namespace amigo {

namespace {

using Check = std::function<std::string()>;  // empty string on success

std::string formulas() {
  TeacherState st;
  st.t_star = 10;
  if (reward_threshold(12, st) != st.config.alpha) return "threshold above t*";
  if (reward_threshold(3, st) != -st.config.beta) return "threshold below t*";
  if (reward_threshold(0, st) != -st.config.beta) return "threshold expired";
  if (std::abs(reward_linexp(10 + 10, st) - std::exp(-1.0)) > 1e-12) return "linexp tail";
  if (std::abs(extrinsic_reward(1, 100) - 0.991) > 1e-12) return "extrinsic reward";
  TeacherState s;
  GoalEpisode ok;
  ok.status = GoalStatus::Reached;
  ok.t_plus = 1;
  for (int i = 0; i < s.config.streak_length; ++i) s = update_threshold(s, ok);
  if (s.t_star != 2 || s.streak != 0) return "threshold schedule";
  return {};
}

std::string solvable(const std::string& env_name, int generations) {
  const EnvSpec spec = EnvSpec::parse(env_name);
  for (int i = 0; i < generations; ++i) {
    const auto res = oracle::solve(generate(spec, static_cast<std::uint64_t>(i)));
    if (!res.solved) return env_name + " layout " + std::to_string(i) + " has no solution";
  }
  return {};
}

std::string replay_determinism() {
  const EnvSpec spec = EnvSpec::parse("KeyCorridorS3R3");
  Rng rng = make_rng(7, 1);
  for (int ep = 0; ep < 20; ++ep) {
    GridState a = generate(spec, static_cast<std::uint64_t>(ep));
    GridState b = generate(spec, static_cast<std::uint64_t>(ep));
    while (!a.done) {
      const auto act = static_cast<Action>(uniform_index(rng, 6));
      const auto ra = apply_action(a, act);
      const auto rb = apply_action(b, act);
      if (!(a == b) || ra.reward != rb.reward || ra.done != rb.done) return "replay diverged";
    }
  }
  return {};
}

std::string training_accounting(long steps) {
  TrainConfig tc;
  tc.total_steps = steps;
  tc.num_workers = 1;
  tc.student_batch = 1;
  tc.metrics_interval = 5000;
  tc.seed = 3;
  auto run = [&] {
    std::ostringstream os;
    Trainer t(EnvSpec::parse("TwoRoom-8"), NetConfig::desk(), tc);
    t.train(&os);
    if (t.goals_proposed() != t.goals_resolved() + t.goals_pending()) throw InvariantError("accounting at run end");
    if (t.teacher_rewards_issued() != t.goals_resolved()) throw InvariantError("one reward per resolved goal");
    const auto& h = t.t_star_history();
    for (std::size_t i = 1; i < h.size(); ++i)
      if (h[i] < h[i - 1]) throw InvariantError("t* decreased");
    return os.str();
  };
  if (run() != run()) return "metrics streams differ between identical runs";
  return {};
}

}  // namespace

bool run_verify(const VerifyOptions& opt, std::ostream& out) {
  const std::vector<std::pair<std::string, Check>> checks = {
      {"reward formulas and threshold schedule", formulas},
      {"TwoRoom-8 layouts solvable", [&] { return solvable("TwoRoom-8", opt.generations); }},
      {"KeyCorridorS3R3 layouts solvable", [&] { return solvable("KeyCorridorS3R3", opt.generations); }},
      {"ObstructedMaze-1Dlhb-S5 layouts solvable", [&] { return solvable("ObstructedMaze-1Dlhb-S5", opt.generations); }},
      {"seeded replay is deterministic", replay_determinism},
      {"event accounting and metrics determinism", [&] { return training_accounting(opt.train_steps); }},
  };
  bool all = true;
  for (const auto& [name, check] : checks) {
    std::string err;
    try {
      err = check();
    } catch (const std::exception& e) {
      err = e.what();
    }
    out << (err.empty() ? "PASS " : "FAIL ") << name << (err.empty() ? "" : ": " + err) << '\n';
    all = all && err.empty();
  }
  return all;
}

}  // namespace amigo

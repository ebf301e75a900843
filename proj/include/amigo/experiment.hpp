#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "amigo/config.hpp"
#include "amigo/policies.hpp"

namespace amigo {

struct RunResult {
  std::filesystem::path dir;
  std::int64_t steps = 0;
  std::int64_t episodes = 0;
  double mean_return_last100 = 0.0;
  std::vector<int> t_star_history;
  std::int64_t goals_proposed = 0;
  std::int64_t goals_resolved = 0;
  std::int64_t goals_pending = 0;
};

/// Trains one seed and writes config.json, metrics.jsonl, summary.json,
/// student.ckpt and (for the teacher method) teacher.ckpt into the run directory.
RunResult run_training(const ExperimentConfig& cfg, std::uint64_t seed);

/// The six ablation variants keyed by name: Full, NoExtrinsic, NoEnvChange,
/// withNovelty, Gaussian, Linear-Exp.
std::vector<std::pair<std::string, ExperimentConfig>> ablation_grid(const ExperimentConfig& base);

struct Agent {
  StudentNet<float> student;
  std::optional<TeacherNet<float>> teacher;
};

/// Loads student.ckpt (and teacher.ckpt if present) from a run directory, or a
/// single student checkpoint file.
Agent load_agent(const std::filesystem::path& path, const EnvSpec& env);

struct EvalSummary {
  int episodes = 0;
  double mean_return = 0.0;
  double stddev_return = 0.0;
  double success_rate = 0.0;
  double mean_length = 0.0;
};

/// Runs fresh episodes (layouts disjoint from training seeds). With a teacher
/// the student is conditioned on proposed goals, otherwise on an empty goal plane.
EvalSummary evaluate(Agent& agent, const EnvSpec& env, int episodes, std::uint64_t seed, bool greedy);

/// ASCII transcript of one episode: a frame per step with the proposed goal.
std::string render_episode(Agent& agent, const EnvSpec& env, std::uint64_t seed, bool greedy, int max_steps = 0);

/// Fraction of sampled states whose greedy action changes when the goal plane
/// is moved to a different random cell.
double goal_sensitivity(StudentNet<float>& student, const EnvSpec& env, int states, std::uint64_t seed);

}  // namespace amigo

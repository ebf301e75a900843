#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "amigo/goals.hpp"
#include "amigo/gridworld.hpp"
#include "amigo/nn/rmsprop.hpp"
#include "amigo/policies.hpp"
#include "amigo/teacher.hpp"

namespace amigo {

enum class Method : std::uint8_t { Amigo, Count, Vanilla };

std::string_view to_string(Method m);
Method parse_method(std::string_view s);

struct Ablations {
  bool no_extrinsic = false;   // teacher gets no extrinsic bonus
  bool no_env_change = false;  // no episode-boundary bonus
  bool with_novelty = false;   // add the goal novelty bonus
  friend bool operator==(const Ablations&, const Ablations&) = default;
};

struct TrainConfig {
  std::int64_t total_steps = 2'000'000;
  int num_workers = 8;
  int unroll_length = 100;
  int student_batch = 8;  // unrolls per student update
  int teacher_batch = 150;  // events per teacher update
  double student_lr = 1e-3;
  double teacher_lr = 1e-3;
  double student_entropy_cost = 5e-4;
  double teacher_entropy_cost = 1e-2;
  double value_cost = 0.5;
  double discount = 0.99;
  double max_grad_norm = 40.0;
  double rms_alpha = 0.99;
  double rms_eps = 0.01;
  double rms_momentum = 0.0;
  Method method = Method::Amigo;
  Ablations ablation;
  TeacherConfig teacher;
  int teacher_baseline_window = 500;
  double count_coef = 0.1;
  IntrinsicClock intrinsic_clock = IntrinsicClock::EpisodeStep;
  std::int64_t metrics_interval = 50'000;
  std::int64_t checkpoint_interval = 0;  // 0: final checkpoint only
  std::uint64_t seed = 0;

  void validate() const;
  /// Teacher constants with the ablation switches applied.
  TeacherConfig resolved_teacher() const;
};

/// Unroll-major storage: index b * unroll_length + t.
struct RolloutBatch {
  int unroll_length = 0;
  int num_unrolls = 0;
  std::vector<Observation> observations;
  std::vector<int> actions;
  std::vector<float> log_probs;
  std::vector<float> values;
  std::vector<float> intrinsic;
  std::vector<float> extrinsic;
  std::vector<std::uint8_t> done;
  std::vector<float> bootstrap;  // one per unroll

  std::size_t size() const { return actions.size(); }
  float reward(std::size_t i) const { return intrinsic[i] + extrinsic[i]; }
};

struct Returns {
  std::vector<float> value_targets;
  std::vector<float> advantages;
};

/// n-step discounted returns with bootstrapping, cut at done flags. Inputs use
/// the unroll-major layout of RolloutBatch.
Returns compute_returns(std::span<const float> rewards, std::span<const std::uint8_t> done,
                        std::span<const float> values, std::span<const float> bootstrap, int unroll_length,
                        double discount);
Returns compute_returns(const RolloutBatch& batch, double discount);

/// Scalar pieces of an actor-critic loss.
struct A2CLossValues {
  double total = 0.0;
  double policy = 0.0;
  double value = 0.0;
  double entropy = 0.0;
};

/// loss = -sum(adv * log pi(a)) + value_cost * sum((target - v)^2) - entropy_cost * sum(H)
template <class T>
nn::Var<T> a2c_loss(nn::Var<T> logits, nn::Var<T> values, std::span<const int> actions,
                    std::span<const T> value_targets, std::span<const T> advantages, double value_cost,
                    double entropy_cost, A2CLossValues* report = nullptr);

/// One proposal used to train the teacher.
struct TeacherSample {
  Observation observation;  // goal-free view the teacher acted on
  int cell = 0;             // y * width + x
  double reward = 0.0;      // reward form value plus bonuses
};

/// Visitation counts for the count-based exploration baseline.
class StateCounter {
 public:
  explicit StateCounter(double coef) : coef_(coef) {}
  static std::uint64_t key(const Observation& obs);
  /// Increments N(key) and returns coef / sqrt(N(key)).
  double visit(std::uint64_t key);
  std::uint64_t count(std::uint64_t key) const;

 private:
  double coef_;
  std::unordered_map<std::uint64_t, std::uint64_t> counts_;
};

/// Per-interval training summary; one JSON line in the metrics stream.
struct MetricsRecord {
  std::int64_t step = 0;
  std::int64_t episodes = 0;
  std::optional<double> mean_extrinsic_return;  // episodes finished in the interval
  std::optional<double> mean_extrinsic_return_last100;
  std::optional<double> success_rate;
  std::optional<double> mean_intrinsic_return;
  std::optional<double> mean_teacher_reward;
  std::optional<double> mean_teacher_extrinsic_bonus;
  std::optional<double> mean_goal_t_plus;
  int t_star = 0;
  std::int64_t goals_proposed = 0;
  std::int64_t goals_reached = 0;
  std::int64_t goals_expired = 0;
  std::int64_t goals_pending = 0;
  std::int64_t teacher_rewards_issued = 0;
  double student_entropy = 0.0;
  double teacher_entropy = 0.0;
  double student_loss = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double teacher_loss = 0.0;
  std::int64_t student_updates = 0;
  std::int64_t teacher_updates = 0;
};

inline constexpr int kMetricsSchemaVersion = 1;

std::string metrics_to_json_line(const MetricsRecord& r);

/// Synchronous actor-critic training of student and teacher.
///
/// Workers are environment slots stepped in lockstep against the current
/// network snapshot; the trainer is the single owner of parameters and of the
/// teacher state.
class Trainer {
 public:
  Trainer(EnvSpec env, NetConfig net, TrainConfig cfg);
  ~Trainer();
  Trainer(const Trainer&) = delete;
  Trainer& operator=(const Trainer&) = delete;

  /// Steps every worker unroll_length times and returns one unroll per worker.
  /// Teacher samples completed during collection are appended to the queue.
  RolloutBatch collect_rollouts();

  A2CLossValues student_update(const RolloutBatch& batch);
  A2CLossValues teacher_update(std::span<const TeacherSample> samples);

  /// One collect/update cycle (student_batch unrolls). Returns env steps taken.
  std::int64_t iterate();
  /// Runs until total_steps; writes metrics to `metrics` if given.
  void train(std::ostream* metrics = nullptr);
  /// Trains the teacher on any queued samples regardless of batch size.
  void flush_teacher();

  /// Called after each checkpoint interval with the current step.
  void set_checkpoint_callback(std::function<void(std::int64_t)> cb) { checkpoint_cb_ = std::move(cb); }

  const TrainConfig& config() const { return cfg_; }
  const EnvSpec& env_spec() const { return env_; }
  StudentNet<float>& student() { return student_; }
  TeacherNet<float>& teacher() { return teacher_; }
  const TeacherState& teacher_state() const { return teacher_state_; }
  std::int64_t steps() const { return steps_; }
  std::int64_t episodes() const { return episodes_; }
  std::int64_t goals_proposed() const { return goals_proposed_; }
  std::int64_t goals_resolved() const { return goals_resolved_; }
  std::int64_t goals_pending() const;
  std::int64_t teacher_rewards_issued() const { return teacher_rewards_issued_; }
  std::size_t queued_teacher_samples() const { return teacher_queue_.size(); }
  const std::vector<int>& t_star_history() const { return t_star_history_; }
  /// Extrinsic returns of the most recent (up to 100) finished episodes.
  std::vector<double> recent_extrinsic_returns() const;
  const std::vector<TeacherEvent>& resolved_events_log() const { return event_log_; }
  void keep_event_log(bool keep) { keep_event_log_ = keep; }
  /// Snapshot of the current metrics counters.
  MetricsRecord snapshot_metrics();

 private:
  struct Worker;

  void start_episode(Worker& w);
  void propose(Worker& w);
  void resolve_goal(Worker& w, bool reached);
  void finish_episode(Worker& w);
  void check_conservation() const;
  Observation student_observation(const Worker& w) const;
  void emit_metrics(std::ostream& out);

  EnvSpec env_;
  NetConfig net_cfg_;
  TrainConfig cfg_;
  StudentNet<float> student_;
  TeacherNet<float> teacher_;
  TeacherState teacher_state_;
  StateCounter counter_;
  std::vector<Worker> workers_;
  std::deque<TeacherSample> teacher_queue_;
  std::deque<double> teacher_reward_window_;
  Rng teacher_rng_;
  std::function<void(std::int64_t)> checkpoint_cb_;

  std::int64_t steps_ = 0;
  std::int64_t episodes_ = 0;
  std::int64_t goals_proposed_ = 0;
  std::int64_t goals_resolved_ = 0;
  std::int64_t goals_reached_ = 0;
  std::int64_t goals_expired_ = 0;
  std::int64_t teacher_rewards_issued_ = 0;
  std::int64_t student_updates_ = 0;
  std::int64_t teacher_updates_ = 0;
  std::vector<int> t_star_history_;
  std::deque<double> last_returns_;
  std::vector<TeacherEvent> event_log_;
  bool keep_event_log_ = false;

  // interval accumulators
  struct Interval {
    double extrinsic_sum = 0, intrinsic_sum = 0, success = 0;
    std::int64_t episodes = 0;
    double teacher_reward_sum = 0, teacher_extrinsic_sum = 0, t_plus_sum = 0;
    std::int64_t teacher_events = 0, reached = 0;
    double student_entropy = 0, student_loss = 0, policy_loss = 0, value_loss = 0;
    std::int64_t student_updates = 0;
    double teacher_entropy = 0, teacher_loss = 0;
    std::int64_t teacher_updates = 0;
  } interval_;
};

/// Result of the two-armed bandit harness.
struct BanditResult {
  double best_arm_fraction = 0.0;  // over the last 1000 pulls
  double final_best_prob = 0.0;
};

/// Trains a logits-only actor-critic on a Bernoulli bandit with the same loss
/// and optimizer as the student.
BanditResult run_bandit(std::uint64_t seed, int steps, std::array<double, 2> arm_means = {0.9, 0.1},
                        int batch = 10, double lr = 0.01, double entropy_cost = 0.0);

}  // namespace amigo

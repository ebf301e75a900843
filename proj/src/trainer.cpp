#include "amigo/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

#include "amigo/errors.hpp"
#include "json.hpp"

namespace amigo {

using nn::Tape;
using nn::Tensor;
using nn::Var;

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Amigo: return "amigo";
    case Method::Count: return "count";
    case Method::Vanilla: return "vanilla";
  }
  return "?";
}

Method parse_method(std::string_view s) {
  if (s == "amigo") return Method::Amigo;
  if (s == "count") return Method::Count;
  if (s == "vanilla") return Method::Vanilla;
  throw ConfigError("unknown method: " + std::string(s));
}

void TrainConfig::validate() const {
  if (total_steps < 0) throw ConfigError("train.total_steps must be >= 0");
  if (num_workers < 1 || unroll_length < 1 || student_batch < 1 || teacher_batch < 1)
    throw ConfigError("train: worker count, unroll length and batch sizes must be positive");
  if (student_batch % num_workers != 0) throw ConfigError("train.student_batch must be a multiple of num_workers");
  if (!(discount >= 0.0 && discount < 1.0)) throw ConfigError("train.discount must lie in [0, 1)");
  if (!(student_lr > 0.0) || !(teacher_lr > 0.0)) throw ConfigError("train: learning rates must be positive");
  if (student_entropy_cost < 0.0 || teacher_entropy_cost < 0.0) throw ConfigError("train: entropy costs must be >= 0");
  if (!(max_grad_norm > 0.0)) throw ConfigError("train.max_grad_norm must be positive");
  if (!(rms_eps > 0.0) || !(rms_alpha >= 0.0 && rms_alpha < 1.0)) throw ConfigError("train: bad RMSProp constants");
  if (teacher_baseline_window < 1) throw ConfigError("train.teacher_baseline_window must be >= 1");
  if (metrics_interval < 1) throw ConfigError("train.metrics_interval must be >= 1");
  if (checkpoint_interval < 0) throw ConfigError("train.checkpoint_interval must be >= 0");
  if (teacher.alpha < 0.0 || teacher.beta < 0.0) throw ConfigError("teacher: alpha and beta must be >= 0");
  if (teacher.sigma < 0.0 || !(teacher.c > 0.0)) throw ConfigError("teacher: sigma must be >= 0 and c > 0");
  if (teacher.initial_t_star < 1 || teacher.streak_length < 1) throw ConfigError("teacher: t_star and streak length must be >= 1");
}

TeacherConfig TrainConfig::resolved_teacher() const {
  TeacherConfig t = teacher;
  if (ablation.no_extrinsic) t.extrinsic_weight = 0.0;
  if (ablation.no_env_change) t.boundary_bonus = false;
  if (ablation.with_novelty) t.novelty_bonus = true;
  return t;
}

Returns compute_returns(std::span<const float> rewards, std::span<const std::uint8_t> done,
                        std::span<const float> values, std::span<const float> bootstrap, int unroll_length,
                        double discount) {
  const std::size_t t_len = static_cast<std::size_t>(unroll_length);
  if (rewards.size() != done.size() || rewards.size() != values.size() ||
      rewards.size() != t_len * bootstrap.size())
    throw ShapeError("compute_returns: inconsistent sizes");
  Returns out;
  out.value_targets.resize(rewards.size());
  out.advantages.resize(rewards.size());
  for (std::size_t b = 0; b < bootstrap.size(); ++b) {
    double ret = bootstrap[b];
    for (std::size_t t = t_len; t-- > 0;) {
      const std::size_t i = b * t_len + t;
      ret = rewards[i] + (done[i] ? 0.0 : discount * ret);
      out.value_targets[i] = static_cast<float>(ret);
      out.advantages[i] = static_cast<float>(ret - values[i]);
    }
  }
  return out;
}

Returns compute_returns(const RolloutBatch& batch, double discount) {
  std::vector<float> rewards(batch.size());
  for (std::size_t i = 0; i < rewards.size(); ++i) rewards[i] = batch.reward(i);
  return compute_returns(rewards, batch.done, batch.values, batch.bootstrap, batch.unroll_length, discount);
}

template <class T>
Var<T> a2c_loss(Var<T> logits, Var<T> values, std::span<const int> actions, std::span<const T> value_targets,
                std::span<const T> advantages, double value_cost, double entropy_cost, A2CLossValues* report) {
  Tape<T>& tape = *logits.tape;
  std::vector<T> neg_adv(advantages.size());
  std::transform(advantages.begin(), advantages.end(), neg_adv.begin(), [](T a) { return -a; });
  Var<T> chosen = nn::gather_last(nn::log_softmax(logits), actions);
  Var<T> pg = nn::weighted_sum<T>(chosen, neg_adv);
  Var<T> targets = tape.constant(Tensor<T>(values.shape(), std::vector<T>(value_targets.begin(), value_targets.end())));
  Var<T> vloss = nn::sum(nn::square(nn::sub(targets, values)));
  Var<T> ent = nn::sum(nn::entropy_from_logits(logits));
  Var<T> loss = nn::add(nn::add(pg, nn::scale(vloss, static_cast<T>(value_cost))), nn::scale(ent, static_cast<T>(-entropy_cost)));
  if (report != nullptr) {
    report->total = loss.value().item();
    report->policy = pg.value().item();
    report->value = vloss.value().item();
    report->entropy = ent.value().item();
  }
  return loss;
}

template Var<float> a2c_loss<float>(Var<float>, Var<float>, std::span<const int>, std::span<const float>,
                                    std::span<const float>, double, double, A2CLossValues*);
template Var<double> a2c_loss<double>(Var<double>, Var<double>, std::span<const int>, std::span<const double>,
                                      std::span<const double>, double, double, A2CLossValues*);

std::uint64_t StateCounter::key(const Observation& obs) {
  std::vector<unsigned char> bytes;
  bytes.reserve(obs.data.size());
  for (auto v : obs.data) bytes.push_back(static_cast<unsigned char>(v));
  return fnv1a64(bytes);
}

double StateCounter::visit(std::uint64_t key) {
  const auto n = ++counts_[key];
  return coef_ / std::sqrt(static_cast<double>(n));
}

std::uint64_t StateCounter::count(std::uint64_t key) const {
  auto it = counts_.find(key);
  return it == counts_.end() ? 0 : it->second;
}

std::string metrics_to_json_line(const MetricsRecord& r) {
  nlohmann::ordered_json j;
  auto opt = [](const std::optional<double>& v) -> nlohmann::ordered_json {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  j["schema"] = kMetricsSchemaVersion;
  j["step"] = r.step;
  j["episodes"] = r.episodes;
  j["mean_extrinsic_return"] = opt(r.mean_extrinsic_return);
  j["mean_extrinsic_return_last100"] = opt(r.mean_extrinsic_return_last100);
  j["success_rate"] = opt(r.success_rate);
  j["mean_intrinsic_return"] = opt(r.mean_intrinsic_return);
  j["mean_teacher_reward"] = opt(r.mean_teacher_reward);
  j["mean_teacher_extrinsic_bonus"] = opt(r.mean_teacher_extrinsic_bonus);
  j["mean_goal_t_plus"] = opt(r.mean_goal_t_plus);
  j["t_star"] = r.t_star;
  j["goals_proposed"] = r.goals_proposed;
  j["goals_reached"] = r.goals_reached;
  j["goals_expired"] = r.goals_expired;
  j["goals_pending"] = r.goals_pending;
  j["teacher_rewards_issued"] = r.teacher_rewards_issued;
  j["student_entropy"] = r.student_entropy;
  j["teacher_entropy"] = r.teacher_entropy;
  j["student_loss"] = r.student_loss;
  j["policy_loss"] = r.policy_loss;
  j["value_loss"] = r.value_loss;
  j["teacher_loss"] = r.teacher_loss;
  j["student_updates"] = r.student_updates;
  j["teacher_updates"] = r.teacher_updates;
  return j.dump();
}

struct Trainer::Worker {
  int index = 0;
  GridState env;
  std::uint64_t episode_counter = 0;
  bool has_goal = false;
  GoalEpisode goal;
  Observation teacher_view;
  Object descriptor = Object::Empty;
  int proposed_this_episode = 0;
  std::vector<std::pair<TeacherEvent, TeacherSample>> episode_events;
  double ep_extrinsic = 0.0;
  double ep_intrinsic = 0.0;
};

namespace {

constexpr std::uint64_t kActionStream = 0xAC7;
constexpr std::uint64_t kTeacherStream = 0x7EA;

std::uint64_t episode_seed(int worker, std::uint64_t counter) {
  return (static_cast<std::uint64_t>(worker) << 40) ^ counter;
}

Observation with_empty_goal(Observation obs) {
  obs.data.resize(obs.data.size() + static_cast<std::size_t>(obs.height * obs.width), 0);
  obs.channels += 1;
  return obs;
}

}  // namespace

Trainer::Trainer(EnvSpec env, NetConfig net, TrainConfig cfg)
    : env_(env),
      net_cfg_(net),
      cfg_(cfg),
      student_(net, env.height(), env.width()),
      teacher_(net, env.height(), env.width()),
      counter_(cfg.count_coef),
      teacher_rng_(make_rng(cfg.seed, kTeacherStream)) {
  cfg_.validate();
  env_.seed = cfg_.seed;
  teacher_state_ = TeacherState(cfg_.resolved_teacher());
  t_star_history_.push_back(teacher_state_.t_star);
  student_.init(cfg_.seed);
  teacher_.init(cfg_.seed);
  workers_.resize(static_cast<std::size_t>(cfg_.num_workers));
  for (int i = 0; i < cfg_.num_workers; ++i) {
    workers_[static_cast<std::size_t>(i)].index = i;
    start_episode(workers_[static_cast<std::size_t>(i)]);
  }
}

Trainer::~Trainer() = default;

std::int64_t Trainer::goals_pending() const {
  return std::count_if(workers_.begin(), workers_.end(), [](const Worker& w) { return w.has_goal; });
}

void Trainer::start_episode(Worker& w) {
  w.env = generate(env_, episode_seed(w.index, w.episode_counter++));
  w.ep_extrinsic = 0.0;
  w.ep_intrinsic = 0.0;
  w.proposed_this_episode = 0;
  w.episode_events.clear();
  if (cfg_.method == Method::Amigo) propose(w);
}

void Trainer::propose(Worker& w) {
  w.teacher_view = encode_observation(w.env);
  const GoalSample s = propose_goal(teacher_, w.teacher_view, teacher_rng_);
  w.goal = begin_goal(w.env, s.goal);
  w.descriptor = goal_descriptor(w.env, s.goal);
  record_proposal(teacher_state_, w.descriptor);
  w.has_goal = true;
  w.proposed_this_episode += 1;
  goals_proposed_ += 1;
}

void Trainer::resolve_goal(Worker& w, bool reached) {
  if (!w.has_goal) throw InvariantError("resolving a goal that was never proposed");
  if (reached) {
    mark_reached(w.goal, w.env);
    goals_reached_ += 1;
  } else {
    mark_expired(w.goal);
    goals_expired_ += 1;
  }
  TeacherEvent ev;
  ev.goal_episode = w.goal;
  ev.reward = teacher_reward(w.goal.t_plus, teacher_state_);
  ev.bonuses.novelty = novelty_bonus(teacher_state_, w.descriptor);
  teacher_rewards_issued_ += 1;
  const int before = teacher_state_.t_star;
  teacher_state_ = update_threshold(teacher_state_, w.goal);
  if (teacher_state_.t_star != before) t_star_history_.push_back(teacher_state_.t_star);
  TeacherSample sample;
  sample.observation = std::move(w.teacher_view);
  sample.cell = w.goal.goal.y * w.env.width + w.goal.goal.x;
  w.episode_events.emplace_back(ev, std::move(sample));
  w.has_goal = false;
  goals_resolved_ += 1;
  if (reached) {
    interval_.reached += 1;
    interval_.t_plus_sum += w.goal.t_plus;
  }
}

void Trainer::finish_episode(Worker& w) {
  std::optional<Pos> expired_cell;
  Tile final_tile;
  if (w.has_goal) {
    expired_cell = w.goal.goal.cell();
    final_tile = w.env.at(*expired_cell);
    resolve_goal(w, false);
  }
  if (static_cast<int>(w.episode_events.size()) != w.proposed_this_episode)
    throw InvariantError("event conservation: goals proposed in episode != teacher events");

  const double ep_return = w.ep_extrinsic;
  last_returns_.push_back(ep_return);
  if (last_returns_.size() > 100) last_returns_.pop_front();
  interval_.extrinsic_sum += ep_return;
  interval_.intrinsic_sum += w.ep_intrinsic;
  interval_.success += ep_return > 0.0 ? 1.0 : 0.0;
  interval_.episodes += 1;
  episodes_ += 1;

  auto events = std::move(w.episode_events);
  w.episode_events.clear();
  GridState next = generate(env_, episode_seed(w.index, w.episode_counter++));
  const TeacherConfig& tc = teacher_state_.config;
  for (std::size_t i = 0; i < events.size(); ++i) {
    auto& [ev, sample] = events[i];
    if (expired_cell && i + 1 == events.size() && tc.boundary_bonus) {
      ev.bonuses.boundary = boundary_bonus(final_tile, next.at(*expired_cell), tc.b_env);
    }
    ev.bonuses.extrinsic = tc.extrinsic_weight * ep_return;
    sample.reward = ev.total_reward();
    interval_.teacher_reward_sum += sample.reward;
    interval_.teacher_extrinsic_sum += ev.bonuses.extrinsic;
    interval_.teacher_events += 1;
    if (keep_event_log_) event_log_.push_back(ev);
    if (cfg_.method == Method::Amigo) teacher_queue_.push_back(std::move(sample));
  }

  w.env = std::move(next);
  w.ep_extrinsic = 0.0;
  w.ep_intrinsic = 0.0;
  w.proposed_this_episode = 0;
  if (cfg_.method == Method::Amigo) propose(w);
}

void Trainer::check_conservation() const {
  if (goals_proposed_ != goals_resolved_ + goals_pending())
    throw InvariantError("event conservation: proposed " + std::to_string(goals_proposed_) + " != resolved " +
                         std::to_string(goals_resolved_) + " + pending " + std::to_string(goals_pending()));
  if (teacher_rewards_issued_ != goals_resolved_)
    throw InvariantError("event conservation: teacher rewards issued != goals resolved");
}

Observation Trainer::student_observation(const Worker& w) const {
  if (cfg_.method == Method::Amigo && w.has_goal) return encode_observation(w.env, w.goal.goal.cell());
  return with_empty_goal(encode_observation(w.env));
}

RolloutBatch Trainer::collect_rollouts() {
  const int t_len = cfg_.unroll_length;
  const int n_workers = cfg_.num_workers;
  RolloutBatch batch;
  batch.unroll_length = t_len;
  batch.num_unrolls = n_workers;
  const std::size_t total = static_cast<std::size_t>(t_len * n_workers);
  batch.observations.resize(total);
  batch.actions.resize(total);
  batch.log_probs.resize(total);
  batch.values.resize(total);
  batch.intrinsic.resize(total);
  batch.extrinsic.resize(total);
  batch.done.resize(total);
  batch.bootstrap.resize(static_cast<std::size_t>(n_workers));

  Rng act_rng = make_rng(cfg_.seed ^ static_cast<std::uint64_t>(steps_), kActionStream);
  for (int t = 0; t < t_len; ++t) {
    ObsBatch ob(env_.height(), env_.width(), true);
    std::vector<Observation> views(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) {
      views[static_cast<std::size_t>(w)] = student_observation(workers_[static_cast<std::size_t>(w)]);
      ob.append(views[static_cast<std::size_t>(w)]);
    }
    const auto samples = act(student_, ob, act_rng);
    for (int w = 0; w < n_workers; ++w) {
      Worker& wk = workers_[static_cast<std::size_t>(w)];
      const std::size_t i = static_cast<std::size_t>(w * t_len + t);
      const auto& s = samples[static_cast<std::size_t>(w)];
      batch.observations[i] = std::move(views[static_cast<std::size_t>(w)]);
      batch.actions[i] = s.action;
      batch.log_probs[i] = static_cast<float>(s.log_prob);
      batch.values[i] = static_cast<float>(s.value);

      const StepOutcome out = apply_action(wk.env, static_cast<Action>(s.action));
      double r_g = 0.0;
      if (cfg_.method == Method::Amigo && wk.has_goal && verify(wk.goal, wk.env)) {
        r_g = student_intrinsic_reward(wk.env, wk.goal, cfg_.intrinsic_clock);
        resolve_goal(wk, true);
        if (!out.done) propose(wk);
      } else if (cfg_.method == Method::Count) {
        r_g = counter_.visit(StateCounter::key(encode_observation(wk.env)));
      }
      wk.ep_extrinsic += out.reward;
      wk.ep_intrinsic += r_g;
      batch.intrinsic[i] = static_cast<float>(r_g);
      batch.extrinsic[i] = static_cast<float>(out.reward);
      batch.done[i] = out.done ? 1 : 0;
      steps_ += 1;
      if (out.done) finish_episode(wk);
    }
    check_conservation();
  }

  ObsBatch ob(env_.height(), env_.width(), true);
  for (const auto& w : workers_) ob.append(student_observation(w));
  Tape<float> tape(false);
  const auto out = student_.forward(tape, ob);
  for (int w = 0; w < n_workers; ++w)
    batch.bootstrap[static_cast<std::size_t>(w)] = out.value.value().values[static_cast<std::size_t>(w)];
  return batch;
}

A2CLossValues Trainer::student_update(const RolloutBatch& batch) {
  const Returns ret = compute_returns(batch, cfg_.discount);
  const ObsBatch ob = make_batch(batch.observations);
  Tape<float> tape;
  const auto out = student_.forward(tape, ob);
  A2CLossValues rep;
  Var<float> loss = a2c_loss<float>(out.logits, out.value, batch.actions, ret.value_targets, ret.advantages,
                                    cfg_.value_cost, cfg_.student_entropy_cost, &rep);
  if (!std::isfinite(rep.total)) throw NumericError("student loss is not finite");
  auto& ps = student_.params();
  ps.zero_grad();
  tape.backward(loss);
  const double norm = ps.clip_grad_norm(cfg_.max_grad_norm);
  if (!std::isfinite(norm)) throw NumericError("student gradient norm is not finite");
  nn::rmsprop_step(ps, {cfg_.student_lr, cfg_.rms_alpha, cfg_.rms_eps, cfg_.rms_momentum});
  student_updates_ += 1;
  interval_.student_updates += 1;
  interval_.student_loss += rep.total;
  interval_.policy_loss += rep.policy;
  interval_.value_loss += rep.value;
  interval_.student_entropy += rep.entropy / static_cast<double>(batch.size());
  return rep;
}

A2CLossValues Trainer::teacher_update(std::span<const TeacherSample> samples) {
  if (samples.empty()) return {};
  double baseline = 0.0;
  if (!teacher_reward_window_.empty()) {
    baseline = std::accumulate(teacher_reward_window_.begin(), teacher_reward_window_.end(), 0.0) /
               static_cast<double>(teacher_reward_window_.size());
  }
  ObsBatch ob(samples[0].observation.height, samples[0].observation.width, false);
  std::vector<int> cells;
  std::vector<float> weights;
  for (const auto& s : samples) {
    ob.append(s.observation);
    cells.push_back(s.cell);
    weights.push_back(static_cast<float>(-(s.reward - baseline)));
  }
  Tape<float> tape;
  Var<float> logits = teacher_.forward(tape, ob);
  Var<float> pg = nn::weighted_sum<float>(nn::gather_last(nn::log_softmax(logits), cells), weights);
  Var<float> ent = nn::sum(nn::entropy_from_logits(logits));
  Var<float> loss = nn::add(pg, nn::scale(ent, static_cast<float>(-cfg_.teacher_entropy_cost)));
  A2CLossValues rep;
  rep.total = loss.value().item();
  rep.policy = pg.value().item();
  rep.entropy = ent.value().item();
  if (!std::isfinite(rep.total)) throw NumericError("teacher loss is not finite");
  auto& ps = teacher_.params();
  ps.zero_grad();
  tape.backward(loss);
  const double norm = ps.clip_grad_norm(cfg_.max_grad_norm);
  if (!std::isfinite(norm)) throw NumericError("teacher gradient norm is not finite");
  nn::rmsprop_step(ps, {cfg_.teacher_lr, cfg_.rms_alpha, cfg_.rms_eps, cfg_.rms_momentum});
  for (const auto& s : samples) {
    teacher_reward_window_.push_back(s.reward);
    if (static_cast<int>(teacher_reward_window_.size()) > cfg_.teacher_baseline_window) teacher_reward_window_.pop_front();
  }
  teacher_updates_ += 1;
  interval_.teacher_updates += 1;
  interval_.teacher_loss += rep.total;
  interval_.teacher_entropy += rep.entropy / static_cast<double>(samples.size());
  return rep;
}

std::int64_t Trainer::iterate() {
  const std::int64_t before = steps_;
  const int rounds = cfg_.student_batch / cfg_.num_workers;
  RolloutBatch merged;
  for (int r = 0; r < rounds; ++r) {
    RolloutBatch b = collect_rollouts();
    if (r == 0) {
      merged = std::move(b);
      continue;
    }
    merged.num_unrolls += b.num_unrolls;
    auto append = [](auto& dst, auto& src) { dst.insert(dst.end(), std::make_move_iterator(src.begin()), std::make_move_iterator(src.end())); };
    append(merged.observations, b.observations);
    append(merged.actions, b.actions);
    append(merged.log_probs, b.log_probs);
    append(merged.values, b.values);
    append(merged.intrinsic, b.intrinsic);
    append(merged.extrinsic, b.extrinsic);
    append(merged.done, b.done);
    append(merged.bootstrap, b.bootstrap);
  }
  student_update(merged);
  while (cfg_.method == Method::Amigo && static_cast<int>(teacher_queue_.size()) >= cfg_.teacher_batch) {
    std::vector<TeacherSample> chunk(std::make_move_iterator(teacher_queue_.begin()),
                                     std::make_move_iterator(teacher_queue_.begin() + cfg_.teacher_batch));
    teacher_queue_.erase(teacher_queue_.begin(), teacher_queue_.begin() + cfg_.teacher_batch);
    teacher_update(chunk);
  }
  return steps_ - before;
}

void Trainer::flush_teacher() {
  if (teacher_queue_.empty()) return;
  std::vector<TeacherSample> chunk(std::make_move_iterator(teacher_queue_.begin()),
                                   std::make_move_iterator(teacher_queue_.end()));
  teacher_queue_.clear();
  teacher_update(chunk);
}

std::vector<double> Trainer::recent_extrinsic_returns() const {
  return {last_returns_.begin(), last_returns_.end()};
}

MetricsRecord Trainer::snapshot_metrics() {
  MetricsRecord r;
  const Interval& iv = interval_;
  r.step = steps_;
  r.episodes = episodes_;
  if (iv.episodes > 0) {
    const double n = static_cast<double>(iv.episodes);
    r.mean_extrinsic_return = iv.extrinsic_sum / n;
    r.mean_intrinsic_return = iv.intrinsic_sum / n;
    r.success_rate = iv.success / n;
  }
  if (!last_returns_.empty()) {
    r.mean_extrinsic_return_last100 =
        std::accumulate(last_returns_.begin(), last_returns_.end(), 0.0) / static_cast<double>(last_returns_.size());
  }
  if (iv.teacher_events > 0) {
    r.mean_teacher_reward = iv.teacher_reward_sum / static_cast<double>(iv.teacher_events);
    r.mean_teacher_extrinsic_bonus = iv.teacher_extrinsic_sum / static_cast<double>(iv.teacher_events);
  }
  if (iv.reached > 0) r.mean_goal_t_plus = iv.t_plus_sum / static_cast<double>(iv.reached);
  r.t_star = teacher_state_.t_star;
  r.goals_proposed = goals_proposed_;
  r.goals_reached = goals_reached_;
  r.goals_expired = goals_expired_;
  r.goals_pending = goals_pending();
  r.teacher_rewards_issued = teacher_rewards_issued_;
  if (iv.student_updates > 0) {
    const double n = static_cast<double>(iv.student_updates);
    r.student_entropy = iv.student_entropy / n;
    r.student_loss = iv.student_loss / n;
    r.policy_loss = iv.policy_loss / n;
    r.value_loss = iv.value_loss / n;
  }
  if (iv.teacher_updates > 0) {
    const double n = static_cast<double>(iv.teacher_updates);
    r.teacher_entropy = iv.teacher_entropy / n;
    r.teacher_loss = iv.teacher_loss / n;
  }
  r.student_updates = student_updates_;
  r.teacher_updates = teacher_updates_;
  return r;
}

void Trainer::emit_metrics(std::ostream& out) {
  out << metrics_to_json_line(snapshot_metrics()) << '\n';
  out.flush();
  interval_ = Interval{};
}

void Trainer::train(std::ostream* metrics) {
  std::int64_t next_metrics = steps_ + cfg_.metrics_interval;
  std::int64_t next_ckpt = cfg_.checkpoint_interval > 0 ? steps_ + cfg_.checkpoint_interval : INT64_MAX;
  std::int64_t last_emit = -1;
  while (steps_ < cfg_.total_steps) {
    iterate();
    if (steps_ >= next_metrics) {
      if (metrics != nullptr) emit_metrics(*metrics);
      else interval_ = Interval{};
      last_emit = steps_;
      while (next_metrics <= steps_) next_metrics += cfg_.metrics_interval;
    }
    if (steps_ >= next_ckpt) {
      if (checkpoint_cb_) checkpoint_cb_(steps_);
      while (next_ckpt <= steps_) next_ckpt += cfg_.checkpoint_interval;
    }
  }
  if (cfg_.method == Method::Amigo) flush_teacher();
  if (metrics != nullptr && last_emit != steps_) emit_metrics(*metrics);
}

BanditResult run_bandit(std::uint64_t seed, int steps, std::array<double, 2> arm_means, int batch, double lr,
                        double entropy_cost) {
  nn::ParamSet<float> ps;
  ps.add("policy.weight", Tensor<float>({2, 1}));
  ps.add("policy.bias", Tensor<float>({2}));
  ps.add("value.weight", Tensor<float>({1, 1}));
  ps.add("value.bias", Tensor<float>({1}));
  Rng rng = make_rng(seed, 0xBA4D17);
  const int best = arm_means[0] >= arm_means[1] ? 0 : 1;
  std::vector<int> pulls;
  pulls.reserve(static_cast<std::size_t>(steps));
  while (static_cast<int>(pulls.size()) < steps) {
    const int n = std::min(batch, steps - static_cast<int>(pulls.size()));
    Tape<float> tape;
    Var<float> ones = tape.constant(Tensor<float>({n, 1}, 1.0f));
    Var<float> logits = nn::linear(ones, tape.param(ps[0]), tape.param(ps[1]));
    Var<float> values = nn::reshape(nn::linear(ones, tape.param(ps[2]), tape.param(ps[3])), nn::Shape{n});
    const auto& lv = logits.value().values;
    std::array<double, 2> p{};
    const double mx = std::max(lv[0], lv[1]);
    p[0] = std::exp(lv[0] - mx);
    p[1] = std::exp(lv[1] - mx);
    const double z = p[0] + p[1];
    p[0] /= z;
    p[1] /= z;
    std::vector<int> actions(static_cast<std::size_t>(n));
    std::vector<float> targets(static_cast<std::size_t>(n)), adv(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const int a = static_cast<int>(sample_categorical<double>(rng, p));
      const float r = uniform01(rng) < arm_means[static_cast<std::size_t>(a)] ? 1.0f : 0.0f;
      actions[static_cast<std::size_t>(i)] = a;
      // Every pull is a one-step episode, so the return is the reward itself.
      targets[static_cast<std::size_t>(i)] = r;
      adv[static_cast<std::size_t>(i)] = r - values.value().values[static_cast<std::size_t>(i)];
      pulls.push_back(a);
    }
    Var<float> loss = a2c_loss<float>(logits, values, actions, targets, adv, 0.5, entropy_cost);
    ps.zero_grad();
    tape.backward(loss);
    ps.clip_grad_norm(40.0);
    nn::rmsprop_step(ps, {lr, 0.99, 0.01, 0.0});
  }
  BanditResult res;
  const std::size_t window = std::min<std::size_t>(1000, pulls.size());
  res.best_arm_fraction =
      static_cast<double>(std::count(pulls.end() - static_cast<std::ptrdiff_t>(window), pulls.end(), best)) /
      static_cast<double>(window);
  const float l0 = ps[1].value.values[0] + ps[0].value.values[0];
  const float l1 = ps[1].value.values[1] + ps[0].value.values[1];
  const double pb = 1.0 / (1.0 + std::exp(static_cast<double>(best == 0 ? l1 - l0 : l0 - l1)));
  res.final_best_prob = pb;
  return res;
}

}  // namespace amigo

#include "amigo/experiment.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "amigo/errors.hpp"
#include "amigo/goals.hpp"
#include "amigo/nn/checkpoint.hpp"
#include "amigo/trainer.hpp"

namespace amigo {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kEvalOffset = 1ULL << 62;

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write " + p.string());
  out << text;
  if (!out) throw IoError("write failed for " + p.string());
}

void save_nets(Trainer& t, const fs::path& dir) {
  nn::save_checkpoint(dir / "student.ckpt", t.student().params());
  if (t.config().method == Method::Amigo) nn::save_checkpoint(dir / "teacher.ckpt", t.teacher().params());
}

Observation empty_goal_view(const GridState& s) {
  Observation o = encode_observation(s);
  o.data.resize(o.data.size() + static_cast<std::size_t>(o.height * o.width), 0);
  o.channels += 1;
  return o;
}

int greedy_action(StudentNet<float>& net, const Observation& obs, Rng& rng) {
  ObsBatch b(obs.height, obs.width, true);
  b.append(obs);
  return act(net, b, rng, true)[0].action;
}

}  // namespace

RunResult run_training(const ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  RunResult res;
  res.dir = run_directory(cfg, seed);
  fs::create_directories(res.dir);

  TrainConfig tc = cfg.train;
  tc.seed = seed;
  auto snapshot = to_json(cfg);
  snapshot["seeds"] = {seed};
  snapshot["seed"] = seed;
  snapshot["code_version"] = std::string(code_version());
  snapshot["metrics_schema"] = kMetricsSchemaVersion;
  write_text(res.dir / "config.json", snapshot.dump(2) + "\n");

  Trainer trainer(cfg.env, cfg.net, tc);
  trainer.set_checkpoint_callback([&](std::int64_t) { save_nets(trainer, res.dir); });
  std::ofstream metrics(res.dir / "metrics.jsonl", std::ios::binary);
  if (!metrics) throw IoError("cannot write metrics in " + res.dir.string());
  trainer.train(&metrics);
  save_nets(trainer, res.dir);

  const auto returns = trainer.recent_extrinsic_returns();
  res.steps = trainer.steps();
  res.episodes = trainer.episodes();
  res.mean_return_last100 =
      returns.empty() ? 0.0 : std::accumulate(returns.begin(), returns.end(), 0.0) / static_cast<double>(returns.size());
  res.t_star_history = trainer.t_star_history();
  res.goals_proposed = trainer.goals_proposed();
  res.goals_resolved = trainer.goals_resolved();
  res.goals_pending = trainer.goals_pending();

  nlohmann::ordered_json summary;
  summary["steps"] = res.steps;
  summary["episodes"] = res.episodes;
  summary["mean_extrinsic_return_last100"] = res.mean_return_last100;
  summary["final_t_star"] = trainer.teacher_state().t_star;
  summary["t_star_history"] = res.t_star_history;
  summary["goals_proposed"] = res.goals_proposed;
  summary["goals_resolved"] = res.goals_resolved;
  summary["goals_pending"] = res.goals_pending;
  write_text(res.dir / "summary.json", summary.dump(2) + "\n");
  return res;
}

std::vector<std::pair<std::string, ExperimentConfig>> ablation_grid(const ExperimentConfig& base) {
  std::vector<std::pair<std::string, ExperimentConfig>> out;
  auto variant = [&](std::string name, auto&& edit) {
    ExperimentConfig c = base;
    c.train.method = Method::Amigo;
    c.train.ablation = {};
    c.train.teacher.reward_form = RewardForm::Threshold;
    edit(c.train);
    c.name = base.name + "-" + name;
    out.emplace_back(std::move(name), std::move(c));
  };
  variant("Full", [](TrainConfig&) {});
  variant("NoExtrinsic", [](TrainConfig& t) { t.ablation.no_extrinsic = true; });
  variant("NoEnvChange", [](TrainConfig& t) { t.ablation.no_env_change = true; });
  variant("withNovelty", [](TrainConfig& t) { t.ablation.with_novelty = true; });
  variant("Gaussian", [](TrainConfig& t) { t.teacher.reward_form = RewardForm::Gaussian; });
  variant("Linear-Exp", [](TrainConfig& t) { t.teacher.reward_form = RewardForm::LinearExponential; });
  return out;
}

Agent load_agent(const fs::path& path, const EnvSpec& env) {
  fs::path student_path = path;
  std::optional<fs::path> teacher_path;
  if (fs::is_directory(path)) {
    student_path = path / "student.ckpt";
    if (fs::exists(path / "teacher.ckpt")) teacher_path = path / "teacher.ckpt";
  }
  const auto sp = nn::load_checkpoint(student_path);
  const NetConfig net = infer_net_config(sp);
  Agent agent{StudentNet<float>(net, env.height(), env.width()), std::nullopt};
  try {
    nn::assign_values(agent.student.params(), sp);
  } catch (const Error& e) {
    throw ConfigError(std::string("student checkpoint does not fit ") + env.name() + ": " + e.what());
  }
  if (teacher_path) {
    const auto tp = nn::load_checkpoint(*teacher_path);
    agent.teacher.emplace(infer_net_config(tp), env.height(), env.width());
    try {
      nn::assign_values(agent.teacher->params(), tp);
    } catch (const Error& e) {
      throw ConfigError(std::string("teacher checkpoint does not fit ") + env.name() + ": " + e.what());
    }
  }
  return agent;
}

namespace {

// Plays one episode; `frame` is called before every action and at the end.
template <class Frame>
std::pair<double, int> play(Agent& agent, const EnvSpec& env, std::uint64_t episode, Rng& rng, bool greedy,
                            int max_steps, Frame&& frame) {
  GridState s = generate(env, kEvalOffset + episode);
  std::optional<GoalEpisode> goal;
  auto propose = [&] {
    if (agent.teacher) goal = begin_goal(s, propose_goal(*agent.teacher, encode_observation(s), rng).goal);
  };
  propose();
  double ret = 0.0;
  int steps = 0;
  while (!s.done && (max_steps <= 0 || steps < max_steps)) {
    const std::optional<Pos> g = goal ? std::optional<Pos>(goal->goal.cell()) : std::nullopt;
    frame(s, g);
    const Observation obs = g ? encode_observation(s, g) : empty_goal_view(s);
    ObsBatch b(obs.height, obs.width, true);
    b.append(obs);
    const int a = act(agent.student, b, rng, greedy)[0].action;
    const StepOutcome out = apply_action(s, static_cast<Action>(a));
    ret += out.reward;
    ++steps;
    if (goal && verify(*goal, s) && !out.done) propose();
  }
  frame(s, goal ? std::optional<Pos>(goal->goal.cell()) : std::nullopt);
  return {ret, steps};
}

}  // namespace

EvalSummary evaluate(Agent& agent, const EnvSpec& env_in, int episodes, std::uint64_t seed, bool greedy) {
  if (episodes < 1) throw ConfigError("eval: episodes must be >= 1");
  EnvSpec env = env_in;
  env.seed = seed;
  Rng rng = make_rng(seed, 0xE7A1);
  std::vector<double> returns;
  double length = 0.0;
  for (int i = 0; i < episodes; ++i) {
    auto [ret, steps] = play(agent, env, static_cast<std::uint64_t>(i), rng, greedy, 0, [](const GridState&, auto) {});
    returns.push_back(ret);
    length += steps;
  }
  EvalSummary s;
  s.episodes = episodes;
  const double n = static_cast<double>(episodes);
  s.mean_return = std::accumulate(returns.begin(), returns.end(), 0.0) / n;
  double var = 0.0;
  for (double r : returns) var += (r - s.mean_return) * (r - s.mean_return);
  s.stddev_return = std::sqrt(var / n);
  s.success_rate = static_cast<double>(std::count_if(returns.begin(), returns.end(), [](double r) { return r > 0.0; })) / n;
  s.mean_length = length / n;
  return s;
}

std::string render_episode(Agent& agent, const EnvSpec& env_in, std::uint64_t seed, bool greedy, int max_steps) {
  EnvSpec env = env_in;
  env.seed = seed;
  Rng rng = make_rng(seed, 0x4E4D);
  std::ostringstream os;
  os << env.name() << " seed " << seed << (agent.teacher ? "" : " (no teacher)") << '\n' << render_legend() << '\n';
  auto [ret, steps] = play(agent, env, 0, rng, greedy, max_steps, [&](const GridState& s, std::optional<Pos> g) {
    os << "step " << s.step;
    if (g) os << " goal (" << g->x << "," << g->y << ")";
    if (s.carried) os << " carrying " << to_string(s.carried->object);
    os << '\n' << render_ascii(s, g) << '\n';
  });
  os << "return " << ret << " after " << steps << " steps\n";
  return os.str();
}

double goal_sensitivity(StudentNet<float>& student, const EnvSpec& env_in, int states, std::uint64_t seed) {
  if (states < 1) throw ConfigError("goal_sensitivity: states must be >= 1");
  EnvSpec env = env_in;
  env.seed = seed;
  Rng rng = make_rng(seed, 0x6055);
  int changed = 0;
  for (int i = 0; i < states; ++i) {
    GridState s = generate(env, kEvalOffset + static_cast<std::uint64_t>(i));
    const int walk = static_cast<int>(uniform_index(rng, 20));
    for (int k = 0; k < walk && !s.done; ++k) apply_action(s, static_cast<Action>(uniform_index(rng, 3)));
    if (s.done) s = generate(env, kEvalOffset + static_cast<std::uint64_t>(i));
    std::vector<Pos> open;
    for (int y = 0; y < s.height; ++y)
      for (int x = 0; x < s.width; ++x)
        if (s.at({x, y}).object != Object::Wall) open.push_back({x, y});
    const Pos g1 = open[uniform_index(rng, open.size())];
    Pos g2 = g1;
    while (g2 == g1) g2 = open[uniform_index(rng, open.size())];
    if (greedy_action(student, encode_observation(s, g1), rng) != greedy_action(student, encode_observation(s, g2), rng))
      ++changed;
  }
  return static_cast<double>(changed) / static_cast<double>(states);
}

}  // namespace amigo

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "amigo/config.hpp"
#include "amigo/errors.hpp"
#include "amigo/experiment.hpp"
#include "amigo/nn/checkpoint.hpp"
#include "doctest.h"

using namespace amigo;
using nlohmann::json;

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("amigo-test-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("config round trips through json") {
  ExperimentConfig c;
  c.name = "rt";
  c.seeds = {1, 4};
  c.env = EnvSpec::parse("ObstructedMaze-1Dlhb-S5");
  c.net = NetConfig::full();
  c.train.method = Method::Count;
  c.train.ablation.with_novelty = true;
  c.train.teacher.reward_form = RewardForm::Gaussian;
  c.train.intrinsic_clock = IntrinsicClock::SinceProposal;
  c.train.student_lr = 3e-4;
  const auto j = to_json(c);
  const ExperimentConfig back = experiment_from_json(json::parse(j.dump()));
  CHECK(to_json(back).dump() == j.dump());
  CHECK(to_json(back.env) == to_json(c.env));
  CHECK(back.net == c.net);
  CHECK(back.train.method == Method::Count);
  CHECK(back.train.teacher.reward_form == RewardForm::Gaussian);
  CHECK(back.seeds == c.seeds);
}

TEST_CASE("unknown keys and bad types are rejected") {
  CHECK_THROWS_AS(experiment_from_json(json::parse(R"({"nmae": "x"})")), ConfigError);
  CHECK_THROWS_AS(experiment_from_json(json::parse(R"({"train": {"lr": 1}})")), ConfigError);
  CHECK_THROWS_AS(experiment_from_json(json::parse(R"({"train": {"unroll_length": "long"}})")), ConfigError);
  CHECK_THROWS_AS(experiment_from_json(json::parse(R"({"env": "Montezuma"})")), std::exception);
  CHECK_THROWS_AS(experiment_from_json(json::parse(R"({"seeds": [1, 1]})")), ConfigError);
  try {
    experiment_from_json(json::parse(R"({"train": {"teacher": {"alpah": 1}}})"));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("train.teacher.alpah") != std::string::npos);
  }
}

TEST_CASE("env accepts a name or an object with overrides") {
  const auto a = env_from_json(json("KeyCorridorS3R3"));
  CHECK(a == EnvSpec::parse("KeyCorridorS3R3"));
  const auto b = env_from_json(json::parse(R"({"name": "TwoRoom-8", "door": "closed", "t_max": 64})"));
  CHECK(b.door == DoorState::Closed);
  CHECK(b.effective_t_max() == 64);
  CHECK(net_from_json(json("desk")) == NetConfig::desk());
  CHECK(net_from_json(json::parse(R"({"preset": "desk", "hidden": 32})")).hidden == 32);
}

TEST_CASE("dotted overrides") {
  json j = json::parse(R"({"name": "x", "train": {"unroll_length": 100}})");
  apply_overrides(j, {"train.unroll_length=20", "train.method=count", "env.door=open", "seeds=[2,3]"});
  CHECK(j["train"]["unroll_length"] == 20);
  CHECK(j["train"]["method"] == "count");
  CHECK(j["env"]["door"] == "open");
  const auto c = experiment_from_json(j);
  CHECK(c.train.unroll_length == 20);
  CHECK(c.seeds == std::vector<std::uint64_t>{2, 3});
  CHECK_THROWS_AS(apply_overrides(j, {"no_equals_sign"}), ConfigError);
}

TEST_CASE("shipped config loads") {
  const auto c = load_experiment(fs::path(AMIGO_SOURCE_DIR) / "configs" / "two_room_desk.json");
  CHECK(c.env == EnvSpec::parse("TwoRoom-8"));
  CHECK(c.net == NetConfig::desk());
  CHECK(c.train.method == Method::Amigo);
}

TEST_CASE("a short run writes every artifact and reloads") {
  const fs::path root = scratch("run");
  setenv("AMIGO_OUTPUT_ROOT", root.c_str(), 1);
  ExperimentConfig c;
  c.name = "tiny";
  c.env = EnvSpec::parse("TwoRoom-6");
  c.train.num_workers = 2;
  c.train.student_batch = 2;
  c.train.unroll_length = 10;
  c.train.teacher_batch = 10;
  c.train.total_steps = 400;
  c.train.metrics_interval = 200;
  const RunResult r = run_training(c, 3);
  unsetenv("AMIGO_OUTPUT_ROOT");
  CHECK(r.dir == root / "runs" / "tiny" / "seed-3");
  for (const char* f : {"config.json", "metrics.jsonl", "summary.json", "student.ckpt", "teacher.ckpt"})
    CHECK(fs::exists(r.dir / f));
  CHECK(r.steps == 400);
  CHECK(r.goals_proposed == r.goals_resolved + r.goals_pending);

  std::ifstream cf(r.dir / "config.json");
  json snap = json::parse(cf);
  CHECK(snap.at("seed") == 3);
  CHECK(snap.at("metrics_schema") == kMetricsSchemaVersion);
  for (const char* k : {"seed", "code_version", "metrics_schema"}) snap.erase(k);
  ExperimentConfig again = experiment_from_json(snap);
  CHECK(again.env.name() == c.env.name());
  CHECK(again.env.effective_t_max() == c.env.effective_t_max());

  Agent agent = load_agent(r.dir, c.env);
  CHECK(agent.teacher.has_value());
  const EvalSummary ev = evaluate(agent, c.env, 5, 11, true);
  CHECK(ev.episodes == 5);
  CHECK(ev.mean_return >= 0.0);
  CHECK(ev.mean_return <= 1.0);
  const std::string txt = render_episode(agent, c.env, 2, true, 3);
  CHECK(txt.find('#') != std::string::npos);
  const double gs = goal_sensitivity(agent.student, c.env, 20, 1);
  CHECK(gs >= 0.0);
  CHECK(gs <= 1.0);
  fs::remove_all(root);
}

TEST_CASE("untrained agent scores about zero on a harder layout") {
  const EnvSpec env = EnvSpec::parse("KeyCorridorS4R3");
  Agent agent{StudentNet<float>(NetConfig::desk(), env.height(), env.width()), std::nullopt};
  agent.student.init(0);
  const EvalSummary ev = evaluate(agent, env, 10, 0, false);
  CHECK(ev.mean_return < 0.05);
}

TEST_CASE("ablation grid names its variants") {
  ExperimentConfig base;
  base.name = "om";
  const auto grid = ablation_grid(base);
  REQUIRE(grid.size() == 6);
  CHECK(grid[0].first == "Full");
  CHECK(grid[1].second.train.resolved_teacher().extrinsic_weight == 0.0);
  CHECK_FALSE(grid[2].second.train.resolved_teacher().boundary_bonus);
  CHECK(grid[3].second.train.resolved_teacher().novelty_bonus);
  CHECK(grid[4].second.train.teacher.reward_form == RewardForm::Gaussian);
  CHECK(grid[5].second.train.teacher.reward_form == RewardForm::LinearExponential);
  CHECK(grid[5].second.name == "om-Linear-Exp");
}

TEST_CASE("missing checkpoint raises IoError") {
  CHECK_THROWS_AS(load_agent("/nonexistent/student.ckpt", EnvSpec::parse("TwoRoom-8")), IoError);
}

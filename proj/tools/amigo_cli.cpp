#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "amigo/config.hpp"
#include "amigo/errors.hpp"
#include "amigo/experiment.hpp"
#include "verify.hpp"

namespace fs = std::filesystem;
using namespace amigo;

namespace {

std::vector<std::uint64_t> select_seeds(const ExperimentConfig& cfg, const std::vector<std::uint64_t>& only) {
  return only.empty() ? cfg.seeds : only;
}

void print_run(const std::string& label, std::uint64_t seed, const RunResult& r) {
  std::cout << label << " seed " << seed << ": steps " << r.steps << ", episodes " << r.episodes
            << ", mean return (last 100) " << std::fixed << std::setprecision(3) << r.mean_return_last100
            << ", t* " << (r.t_star_history.empty() ? 0 : r.t_star_history.back()) << "\n  -> " << r.dir.string()
            << std::endl;
  std::cout.unsetf(std::ios::floatfield);
}

int cmd_train(const fs::path& config, const std::vector<std::string>& overrides, const std::vector<std::uint64_t>& only) {
  const ExperimentConfig cfg = load_experiment(config, overrides);
  for (auto seed : select_seeds(cfg, only)) print_run(cfg.name, seed, run_training(cfg, seed));
  return 0;
}

int cmd_ablate(const fs::path& config, const std::vector<std::string>& overrides, const std::vector<std::uint64_t>& only) {
  const ExperimentConfig base = load_experiment(config, overrides);
  for (const auto& [variant, cfg] : ablation_grid(base))
    for (auto seed : select_seeds(cfg, only)) print_run(variant, seed, run_training(cfg, seed));
  return 0;
}

int cmd_eval(const fs::path& checkpoint, const std::string& env_name, int episodes, std::uint64_t seed, bool no_teacher) {
  const EnvSpec env = EnvSpec::parse(env_name);
  Agent agent = load_agent(checkpoint, env);
  if (no_teacher) agent.teacher.reset();
  std::cout << "env " << env.name() << ", " << episodes << " episodes"
            << (agent.teacher ? ", goals from teacher" : ", empty goal plane") << '\n';
  for (bool greedy : {true, false}) {
    const EvalSummary s = evaluate(agent, env, episodes, seed, greedy);
    std::cout << std::left << std::setw(8) << (greedy ? "greedy" : "sampled") << std::fixed << std::setprecision(3)
              << " mean return " << s.mean_return << " +- " << s.stddev_return << ", success " << s.success_rate
              << ", mean length " << std::setprecision(1) << s.mean_length << '\n';
  }
  return 0;
}

int cmd_render(const fs::path& checkpoint, const std::string& env_name, std::uint64_t seed, bool greedy, int max_steps) {
  const EnvSpec env = EnvSpec::parse(env_name);
  Agent agent = load_agent(checkpoint, env);
  std::cout << render_episode(agent, env, seed, greedy, max_steps);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Teacher/student goal curriculum experiments on procedural gridworlds.\n"
               "Relative output directories are resolved against $AMIGO_OUTPUT_ROOT (default: working directory)."};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(code_version()));

  fs::path config;
  std::vector<std::string> overrides;
  std::vector<std::uint64_t> only_seeds;

  auto* train = app.add_subcommand("train", "Train every seed listed in the config");
  train->add_option("config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  train->add_option("--set", overrides, "Override a config value, e.g. --set train.total_steps=100000");
  train->add_option("--seed", only_seeds, "Run only these seeds instead of the config's list");

  auto* ablate = app.add_subcommand("ablate", "Run Full, NoExtrinsic, NoEnvChange, withNovelty, Gaussian and Linear-Exp");
  ablate->add_option("config", config, "Base experiment config (JSON)")->required()->check(CLI::ExistingFile);
  ablate->add_option("--set", overrides, "Override a config value");
  ablate->add_option("--seed", only_seeds, "Run only these seeds");

  fs::path checkpoint;
  std::string env_name = "TwoRoom-8";
  int episodes = 100;
  std::uint64_t seed = 0;
  bool no_teacher = false;
  auto* eval = app.add_subcommand("eval", "Mean extrinsic return of a checkpoint, greedy and sampled");
  eval->add_option("checkpoint", checkpoint, "Run directory or student checkpoint file")->required()->check(CLI::ExistingPath);
  eval->add_option("--env", env_name, "Environment name")->capture_default_str();
  eval->add_option("--episodes", episodes, "Episode count")->capture_default_str()->check(CLI::PositiveNumber);
  eval->add_option("--seed", seed, "Evaluation seed")->capture_default_str();
  eval->add_flag("--no-teacher", no_teacher, "Ignore teacher.ckpt and use an empty goal plane");

  bool sampled = false;
  int max_steps = 0;
  auto* render = app.add_subcommand("render", "Print an ASCII transcript of one episode");
  render->add_option("checkpoint", checkpoint, "Run directory or student checkpoint file")->required()->check(CLI::ExistingPath);
  render->add_option("--env", env_name, "Environment name")->capture_default_str();
  render->add_option("--seed", seed, "Layout seed")->capture_default_str();
  render->add_flag("--sampled", sampled, "Sample actions instead of taking the argmax");
  render->add_option("--max-steps", max_steps, "Stop after this many steps (0: episode limit)");

  VerifyOptions vopt;
  auto* verify_cmd = app.add_subcommand("verify", "Run the built-in invariant checks");
  verify_cmd->add_option("--generations", vopt.generations, "Seeded layouts per family for the solvability check")
      ->capture_default_str();
  verify_cmd->add_option("--train-steps", vopt.train_steps, "Length of the accounting/determinism training check")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return cmd_train(config, overrides, only_seeds);
    if (*ablate) return cmd_ablate(config, overrides, only_seeds);
    if (*eval) return cmd_eval(checkpoint, env_name, episodes, seed, no_teacher);
    if (*render) return cmd_render(checkpoint, env_name, seed, !sampled, max_steps);
    if (*verify_cmd) return run_verify(vopt, std::cout) ? 0 : 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const InvariantError& e) {
    std::cerr << "invariant violated: " << e.what() << '\n';
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

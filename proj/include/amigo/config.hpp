#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "amigo/gridworld.hpp"
#include "amigo/policies.hpp"
#include "amigo/trainer.hpp"
#include "json.hpp"

namespace amigo {

/// Everything needed to reproduce a set of runs.
struct ExperimentConfig {
  std::string name = "experiment";
  std::vector<std::uint64_t> seeds{0};
  std::string output_dir = "runs";
  EnvSpec env;
  NetConfig net = NetConfig::desk();
  TrainConfig train;

  void validate() const;
};

nlohmann::ordered_json to_json(const EnvSpec& e);
nlohmann::ordered_json to_json(const NetConfig& n);
nlohmann::ordered_json to_json(const TrainConfig& t);
nlohmann::ordered_json to_json(const ExperimentConfig& c);

/// Strict readers: unknown keys and wrong types raise ConfigError. Missing
/// keys keep the defaults.
EnvSpec env_from_json(const nlohmann::json& j);
NetConfig net_from_json(const nlohmann::json& j);
TrainConfig train_from_json(const nlohmann::json& j);
ExperimentConfig experiment_from_json(const nlohmann::json& j);

/// Applies "a.b.c=value" overrides. The value is parsed as JSON when possible
/// and taken as a plain string otherwise.
void apply_overrides(nlohmann::json& j, const std::vector<std::string>& overrides);

ExperimentConfig load_experiment(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

/// Root for relative output directories: $AMIGO_OUTPUT_ROOT or the working directory.
std::filesystem::path output_root();
std::filesystem::path run_directory(const ExperimentConfig& c, std::uint64_t seed);

std::string_view code_version();

}  // namespace amigo

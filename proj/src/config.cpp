#include "amigo/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "amigo/errors.hpp"

namespace amigo {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Reads fields from one JSON object and rejects whatever was not consumed.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  template <class T>
  bool get(const char* key, T& out) {
    auto it = j_.find(key);
    seen_.insert(key);
    if (it == j_.end()) return false;
    try {
      out = it->template get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(path_ + "." + key + ": " + e.what());
    }
    return true;
  }

  const json* sub(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError("unknown config key: " + path_ + "." + it.key());
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::string_view family_name(Family f) {
  switch (f) {
    case Family::KeyCorridor: return "KeyCorridor";
    case Family::ObstructedMaze: return "ObstructedMaze";
    case Family::TwoRoom: return "TwoRoom";
  }
  return "?";
}

Family parse_family(const std::string& s) {
  if (s == "KeyCorridor") return Family::KeyCorridor;
  if (s == "ObstructedMaze") return Family::ObstructedMaze;
  if (s == "TwoRoom" || s == "custom-two-room") return Family::TwoRoom;
  throw ConfigError("env.family: unknown family " + s);
}

std::string_view door_name(DoorState d) {
  switch (d) {
    case DoorState::Open: return "open";
    case DoorState::Closed: return "closed";
    case DoorState::Locked: return "locked";
  }
  return "?";
}

DoorState parse_door(const std::string& s) {
  if (s == "open") return DoorState::Open;
  if (s == "closed") return DoorState::Closed;
  if (s == "locked") return DoorState::Locked;
  throw ConfigError("env.door: unknown door kind " + s);
}

std::string_view clock_name(IntrinsicClock c) {
  return c == IntrinsicClock::EpisodeStep ? "episode" : "since-proposal";
}

IntrinsicClock parse_clock(const std::string& s) {
  if (s == "episode") return IntrinsicClock::EpisodeStep;
  if (s == "since-proposal") return IntrinsicClock::SinceProposal;
  throw ConfigError("train.intrinsic_clock: expected episode or since-proposal");
}

TeacherConfig teacher_from_json(const json& j, const std::string& path) {
  TeacherConfig t;
  Reader r(j, path);
  std::string form;
  if (r.get("reward_form", form)) {
    try {
      t.reward_form = parse_reward_form(form);
    } catch (const Error& e) {
      throw ConfigError(path + ".reward_form: " + e.what());
    }
  }
  r.get("alpha", t.alpha);
  r.get("beta", t.beta);
  r.get("sigma", t.sigma);
  r.get("c", t.c);
  r.get("initial_t_star", t.initial_t_star);
  r.get("streak_length", t.streak_length);
  r.get("boundary_bonus", t.boundary_bonus);
  r.get("b_env", t.b_env);
  r.get("novelty_bonus", t.novelty_bonus);
  r.get("b_nov", t.b_nov);
  r.get("extrinsic_weight", t.extrinsic_weight);
  r.finish();
  return t;
}

ordered_json teacher_to_json(const TeacherConfig& t) {
  ordered_json j;
  j["reward_form"] = std::string(to_string(t.reward_form));
  j["alpha"] = t.alpha;
  j["beta"] = t.beta;
  j["sigma"] = t.sigma;
  j["c"] = t.c;
  j["initial_t_star"] = t.initial_t_star;
  j["streak_length"] = t.streak_length;
  j["boundary_bonus"] = t.boundary_bonus;
  j["b_env"] = t.b_env;
  j["novelty_bonus"] = t.novelty_bonus;
  j["b_nov"] = t.b_nov;
  j["extrinsic_weight"] = t.extrinsic_weight;
  return j;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (name.empty()) throw ConfigError("name must not be empty");
  if (name.find('/') != std::string::npos) throw ConfigError("name must not contain '/'");
  if (seeds.empty()) throw ConfigError("seeds must list at least one seed");
  std::set<std::uint64_t> uniq(seeds.begin(), seeds.end());
  if (uniq.size() != seeds.size()) throw ConfigError("seeds must be distinct");
  net.validate();
  train.validate();
  try {
    (void)generate(env, 0);
  } catch (const EnvError& e) {
    throw ConfigError(std::string("env: ") + e.what());
  }
}

ordered_json to_json(const EnvSpec& e) {
  ordered_json j;
  j["name"] = e.name();
  j["family"] = std::string(family_name(e.family));
  j["room_size"] = e.room_size;
  j["num_rows"] = e.num_rows;
  j["num_doors"] = e.num_doors;
  j["key_in_box"] = e.key_in_box;
  j["blocked"] = e.blocked;
  j["size"] = e.size;
  j["door"] = std::string(door_name(e.door));
  j["t_max"] = e.effective_t_max();
  return j;
}

ordered_json to_json(const NetConfig& n) {
  ordered_json j;
  j["conv_channels"] = n.conv_channels;
  j["embed_dim"] = n.embed_dim;
  j["hidden"] = n.hidden;
  j["kernel"] = n.kernel;
  return j;
}

ordered_json to_json(const TrainConfig& t) {
  ordered_json j;
  j["method"] = std::string(to_string(t.method));
  j["total_steps"] = t.total_steps;
  j["num_workers"] = t.num_workers;
  j["unroll_length"] = t.unroll_length;
  j["student_batch"] = t.student_batch;
  j["teacher_batch"] = t.teacher_batch;
  j["student_lr"] = t.student_lr;
  j["teacher_lr"] = t.teacher_lr;
  j["student_entropy_cost"] = t.student_entropy_cost;
  j["teacher_entropy_cost"] = t.teacher_entropy_cost;
  j["value_cost"] = t.value_cost;
  j["discount"] = t.discount;
  j["max_grad_norm"] = t.max_grad_norm;
  j["rms_alpha"] = t.rms_alpha;
  j["rms_eps"] = t.rms_eps;
  j["rms_momentum"] = t.rms_momentum;
  j["ablation"] = {{"no_extrinsic", t.ablation.no_extrinsic},
                   {"no_env_change", t.ablation.no_env_change},
                   {"with_novelty", t.ablation.with_novelty}};
  j["teacher"] = teacher_to_json(t.teacher);
  j["teacher_baseline_window"] = t.teacher_baseline_window;
  j["count_coef"] = t.count_coef;
  j["intrinsic_clock"] = std::string(clock_name(t.intrinsic_clock));
  j["metrics_interval"] = t.metrics_interval;
  j["checkpoint_interval"] = t.checkpoint_interval;
  return j;
}

ordered_json to_json(const ExperimentConfig& c) {
  ordered_json j;
  j["name"] = c.name;
  j["seeds"] = c.seeds;
  j["output_dir"] = c.output_dir;
  j["env"] = to_json(c.env);
  j["net"] = to_json(c.net);
  j["train"] = to_json(c.train);
  return j;
}

EnvSpec env_from_json(const json& j) {
  if (j.is_string()) {
    try {
      return EnvSpec::parse(j.get<std::string>());
    } catch (const EnvError& e) {
      throw ConfigError(std::string("env: ") + e.what());
    }
  }
  Reader r(j, "env");
  EnvSpec e;
  std::string s;
  if (r.get("name", s)) {
    try {
      e = EnvSpec::parse(s);
    } catch (const EnvError& err) {
      throw ConfigError(std::string("env.name: ") + err.what());
    }
  }
  if (r.get("family", s)) e.family = parse_family(s);
  r.get("room_size", e.room_size);
  r.get("num_rows", e.num_rows);
  r.get("num_doors", e.num_doors);
  r.get("key_in_box", e.key_in_box);
  r.get("blocked", e.blocked);
  r.get("size", e.size);
  if (r.get("door", s)) e.door = parse_door(s);
  r.get("t_max", e.t_max);
  r.finish();
  return e;
}

NetConfig net_from_json(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "desk") return NetConfig::desk();
    if (s == "full") return NetConfig::full();
    throw ConfigError("net: expected desk, full or an object");
  }
  Reader r(j, "net");
  NetConfig n = NetConfig::desk();
  std::string preset;
  if (r.get("preset", preset)) n = net_from_json(json(preset));
  r.get("conv_channels", n.conv_channels);
  r.get("embed_dim", n.embed_dim);
  r.get("hidden", n.hidden);
  r.get("kernel", n.kernel);
  r.finish();
  return n;
}

TrainConfig train_from_json(const json& j) {
  Reader r(j, "train");
  TrainConfig t;
  std::string s;
  if (r.get("method", s)) t.method = parse_method(s);
  r.get("total_steps", t.total_steps);
  r.get("num_workers", t.num_workers);
  r.get("unroll_length", t.unroll_length);
  r.get("student_batch", t.student_batch);
  r.get("teacher_batch", t.teacher_batch);
  r.get("student_lr", t.student_lr);
  r.get("teacher_lr", t.teacher_lr);
  r.get("student_entropy_cost", t.student_entropy_cost);
  r.get("teacher_entropy_cost", t.teacher_entropy_cost);
  r.get("value_cost", t.value_cost);
  r.get("discount", t.discount);
  r.get("max_grad_norm", t.max_grad_norm);
  r.get("rms_alpha", t.rms_alpha);
  r.get("rms_eps", t.rms_eps);
  r.get("rms_momentum", t.rms_momentum);
  if (const json* a = r.sub("ablation")) {
    Reader ra(*a, "train.ablation");
    ra.get("no_extrinsic", t.ablation.no_extrinsic);
    ra.get("no_env_change", t.ablation.no_env_change);
    ra.get("with_novelty", t.ablation.with_novelty);
    ra.finish();
  }
  if (const json* tj = r.sub("teacher")) t.teacher = teacher_from_json(*tj, "train.teacher");
  r.get("teacher_baseline_window", t.teacher_baseline_window);
  r.get("count_coef", t.count_coef);
  if (r.get("intrinsic_clock", s)) t.intrinsic_clock = parse_clock(s);
  r.get("metrics_interval", t.metrics_interval);
  r.get("checkpoint_interval", t.checkpoint_interval);
  r.finish();
  return t;
}

ExperimentConfig experiment_from_json(const json& j) {
  Reader r(j, "config");
  ExperimentConfig c;
  r.get("name", c.name);
  r.get("seeds", c.seeds);
  r.get("output_dir", c.output_dir);
  if (const json* e = r.sub("env")) c.env = env_from_json(*e);
  if (const json* n = r.sub("net")) c.net = net_from_json(*n);
  if (const json* t = r.sub("train")) c.train = train_from_json(*t);
  r.finish();
  c.validate();
  return c;
}

void apply_overrides(json& j, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key.path=value: " + o);
    const std::string key = o.substr(0, eq);
    const std::string raw = o.substr(eq + 1);
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;
    json* node = &j;
    std::size_t start = 0;
    while (true) {
      const auto dot = key.find('.', start);
      const std::string part = key.substr(start, dot - start);
      if (part.empty()) throw ConfigError("override has an empty key segment: " + o);
      if (!node->is_object()) {
        if (!node->is_null()) throw ConfigError("override descends into a non-object: " + o);
        *node = json::object();
      }
      node = &(*node)[part];
      if (dot == std::string::npos) break;
      start = dot + 1;
    }
    *node = std::move(value);
  }
}

ExperimentConfig load_experiment(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  json j = json::parse(in, nullptr, false, true);
  if (j.is_discarded()) throw ConfigError("config is not valid JSON: " + path.string());
  apply_overrides(j, overrides);
  return experiment_from_json(j);
}

std::filesystem::path output_root() {
  if (const char* env = std::getenv("AMIGO_OUTPUT_ROOT"); env != nullptr && *env != '\0') return env;
  return std::filesystem::current_path();
}

std::filesystem::path run_directory(const ExperimentConfig& c, std::uint64_t seed) {
  std::filesystem::path base = c.output_dir;
  if (base.is_relative()) base = output_root() / base;
  return base / c.name / ("seed-" + std::to_string(seed));
}

std::string_view code_version() { return AMIGO_VERSION; }

}  // namespace amigo

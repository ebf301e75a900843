#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "amigo/config.hpp"
#include "amigo/errors.hpp"
#include "amigo/experiment.hpp"
#include "amigo/goals.hpp"
#include "amigo/gridworld.hpp"
#include "amigo/nn/checkpoint.hpp"
#include "amigo/teacher.hpp"
#include "amigo/trainer.hpp"

namespace py = pybind11;
using namespace amigo;

namespace {

// json -> python via the json module; configs are small.
py::object to_py(const nlohmann::ordered_json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

nlohmann::json from_py(const py::object& o) {
  return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

// Stateful episode wrapper over the pure gridworld functions.
class Env {
 public:
  Env(const std::string& name, std::uint64_t seed) : spec_(EnvSpec::parse(name)) { reset(seed); }

  void reset(std::uint64_t seed) { state_ = generate(spec_, seed); }

  py::tuple step(int action) {
    if (action < 0 || action >= kNumActions) throw py::value_error("action out of range");
    const StepOutcome out = apply_action(state_, static_cast<Action>(action));
    return py::make_tuple(out.reward, out.done, out.reached_goal);
  }

  py::array_t<std::int32_t> observation(std::optional<std::pair<int, int>> goal) const {
    std::optional<Pos> g;
    if (goal) g = Pos{goal->first, goal->second};
    const Observation obs = encode_observation(state_, g);
    py::array_t<std::int32_t> arr({obs.channels, obs.height, obs.width});
    std::copy(obs.data.begin(), obs.data.end(), arr.mutable_data());
    return arr;
  }

  std::string render(std::optional<std::pair<int, int>> goal) const {
    std::optional<Pos> g;
    if (goal) g = Pos{goal->first, goal->second};
    return render_ascii(state_, g);
  }

  const EnvSpec& spec() const { return spec_; }
  const GridState& state() const { return state_; }

 private:
  EnvSpec spec_;
  GridState state_;
};

TeacherState teacher_state(int t_star, double alpha, double beta, double sigma, double c) {
  TeacherConfig cfg;
  cfg.alpha = alpha;
  cfg.beta = beta;
  cfg.sigma = sigma;
  cfg.c = c;
  TeacherState st(cfg);
  st.t_star = t_star;
  return st;
}

py::dict run_result(const RunResult& r) {
  py::dict d;
  d["dir"] = r.dir;
  d["steps"] = r.steps;
  d["episodes"] = r.episodes;
  d["mean_return_last100"] = r.mean_return_last100;
  d["t_star_history"] = r.t_star_history;
  d["goals_proposed"] = r.goals_proposed;
  d["goals_resolved"] = r.goals_resolved;
  d["goals_pending"] = r.goals_pending;
  return d;
}

}  // namespace

PYBIND11_MODULE(_amigo, m) {
  m.doc() = "Teacher-student goal curriculum on procedural gridworlds";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<EnvError>(m, "EnvError", PyExc_RuntimeError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  m.attr("METRICS_SCHEMA") = kMetricsSchemaVersion;
  m.attr("CHECKPOINT_VERSION") = nn::kCheckpointVersion;
  m.attr("NUM_ACTIONS") = kNumActions;
  m.def("code_version", [] { return std::string(code_version()); });

  py::class_<Env>(m, "Env")
      .def(py::init<const std::string&, std::uint64_t>(), py::arg("name"), py::arg("seed") = 0)
      .def("reset", &Env::reset, py::arg("seed"))
      .def("step", &Env::step, py::arg("action"), "Returns (reward, done, reached_goal).")
      .def("observation", &Env::observation, py::arg("goal") = py::none())
      .def("render", &Env::render, py::arg("goal") = py::none())
      .def_property_readonly("name", [](const Env& e) { return e.spec().name(); })
      .def_property_readonly("width", [](const Env& e) { return e.state().width; })
      .def_property_readonly("height", [](const Env& e) { return e.state().height; })
      .def_property_readonly("t_max", [](const Env& e) { return e.state().t_max; })
      .def_property_readonly("step_count", [](const Env& e) { return e.state().step; })
      .def_property_readonly("done", [](const Env& e) { return e.state().done; })
      .def_property_readonly("agent_pos", [](const Env& e) {
        return std::make_pair(e.state().agent_pos.x, e.state().agent_pos.y);
      });

  m.def("extrinsic_reward", &extrinsic_reward, py::arg("steps"), py::arg("t_max"));
  m.def(
      "reward_threshold",
      [](int t_plus, int t_star, double alpha, double beta) {
        return reward_threshold(t_plus, teacher_state(t_star, alpha, beta, 0.0, 10.0));
      },
      py::arg("t_plus"), py::arg("t_star"), py::arg("alpha") = 0.7, py::arg("beta") = 0.3);
  m.def(
      "reward_gaussian",
      [](int t_plus, int t_star, double sigma) {
        return reward_gaussian(t_plus, teacher_state(t_star, 0.7, 0.3, sigma, 10.0));
      },
      py::arg("t_plus"), py::arg("t_star"), py::arg("sigma") = 0.0);
  m.def(
      "reward_linexp",
      [](int t_plus, int t_star, double c) {
        return reward_linexp(t_plus, teacher_state(t_star, 0.7, 0.3, 0.0, c));
      },
      py::arg("t_plus"), py::arg("t_star"), py::arg("c") = 10.0);

  m.def(
      "load_config",
      [](const std::filesystem::path& path, const std::vector<std::string>& overrides) {
        return to_py(to_json(load_experiment(path, overrides)));
      },
      py::arg("path"), py::arg("overrides") = std::vector<std::string>{},
      "Validated experiment config as a dict, with defaults filled in.");
  m.def(
      "train",
      [](const py::object& config, std::uint64_t seed) {
        const ExperimentConfig cfg = experiment_from_json(from_py(config));
        py::gil_scoped_release release;
        const RunResult r = run_training(cfg, seed);
        py::gil_scoped_acquire acquire;
        return run_result(r);
      },
      py::arg("config"), py::arg("seed"), "Trains one seed from a config dict and returns a summary.");
  m.def(
      "evaluate",
      [](const std::filesystem::path& run, const std::string& env_name, int episodes, std::uint64_t seed,
         bool greedy) {
        const EnvSpec env = EnvSpec::parse(env_name);
        Agent agent = load_agent(run, env);
        const EvalSummary s = evaluate(agent, env, episodes, seed, greedy);
        py::dict d;
        d["episodes"] = s.episodes;
        d["mean_return"] = s.mean_return;
        d["stddev_return"] = s.stddev_return;
        d["success_rate"] = s.success_rate;
        d["mean_length"] = s.mean_length;
        return d;
      },
      py::arg("run"), py::arg("env"), py::arg("episodes") = 100, py::arg("seed") = 0, py::arg("greedy") = true);
  m.def(
      "read_checkpoint",
      [](const std::filesystem::path& path) {
        const auto ps = nn::load_checkpoint(path);
        py::dict out;
        for (int i = 0; i < ps.size(); ++i) {
          const auto& t = ps[i].value;
          std::vector<py::ssize_t> shape(t.shape.begin(), t.shape.end());
          py::array_t<float> arr(shape);
          std::copy(t.values.begin(), t.values.end(), arr.mutable_data());
          out[py::str(ps[i].name)] = arr;
        }
        return out;
      },
      py::arg("path"), "Tensors of a checkpoint keyed by parameter name.");
}

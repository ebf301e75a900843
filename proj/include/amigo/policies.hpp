#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "amigo/gridworld.hpp"
#include "amigo/nn/ops.hpp"
#include "amigo/rng.hpp"
#include "amigo/teacher.hpp"

namespace amigo {

/// Layer sizes shared by the student and teacher networks.
struct NetConfig {
  std::array<int, 4> conv_channels{16, 32, 32, 32};
  int embed_dim = 5;
  int hidden = 256;
  int kernel = 3;

  static NetConfig full() { return {}; }
  static NetConfig desk() { return {{8, 8, 8, 8}, 5, 64, 3}; }
  void validate() const;
  friend bool operator==(const NetConfig&, const NetConfig&) = default;
};

/// Indicator planes per cell: agent, four direction one-hots, optional goal.
inline constexpr int kIndicatorChannels = 5;

/// A batch of observations packed for the networks.
struct ObsBatch {
  int n = 0;
  int height = 0;
  int width = 0;
  bool with_goal = false;
  std::vector<std::int32_t> object, color, flag;  // [N,H,W]
  std::vector<std::uint8_t> indicators;           // [N, 5 or 6, H, W]

  ObsBatch() = default;
  ObsBatch(int h, int w, bool goal) : height(h), width(w), with_goal(goal) {}
  void append(const Observation& obs);
  int indicator_channels() const { return kIndicatorChannels + (with_goal ? 1 : 0); }
};

ObsBatch make_batch(std::span<const Observation> observations);

/// Goal-conditioned actor-critic: 4 conv-ELU blocks, 2 linear-ReLU layers,
/// then a 6-way policy head and a scalar value head.
template <class T>
class StudentNet {
 public:
  StudentNet(NetConfig cfg, int height, int width);

  struct Output {
    nn::Var<T> logits;  // [N, 6]
    nn::Var<T> value;   // [N]
  };
  Output forward(nn::Tape<T>& tape, const ObsBatch& batch);

  void init(std::uint64_t seed);
  nn::ParamSet<T>& params() { return params_; }
  const nn::ParamSet<T>& params() const { return params_; }
  const NetConfig& config() const { return cfg_; }
  int height() const { return height_; }
  int width() const { return width_; }

  static std::size_t param_count(const NetConfig& cfg, int height, int width);

 private:
  NetConfig cfg_;
  int height_, width_;
  nn::ParamSet<T> params_;
};

/// Goal generator: 4 dimensionality-preserving conv-ELU blocks followed by a
/// one-channel conv head giving one logit per cell.
template <class T>
class TeacherNet {
 public:
  TeacherNet(NetConfig cfg, int height, int width);

  /// Returns [N, H*W] cell logits.
  nn::Var<T> forward(nn::Tape<T>& tape, const ObsBatch& batch);

  void init(std::uint64_t seed);
  nn::ParamSet<T>& params() { return params_; }
  const nn::ParamSet<T>& params() const { return params_; }
  const NetConfig& config() const { return cfg_; }
  int height() const { return height_; }
  int width() const { return width_; }

  static std::size_t param_count(const NetConfig& cfg, int height, int width);

 private:
  NetConfig cfg_;
  int height_, width_;
  nn::ParamSet<T> params_;
};

extern template class StudentNet<float>;
extern template class StudentNet<double>;
extern template class TeacherNet<float>;
extern template class TeacherNet<double>;

/// Recovers the layer sizes from a checkpoint's parameter shapes.
NetConfig infer_net_config(const nn::ParamSet<float>& params);

/// Samples a goal for one goal-free observation.
GoalSample propose_goal(TeacherNet<float>& net, const Observation& observation, Rng& rng);

struct ActionSample {
  int action = 0;
  double log_prob = 0.0;
  double value = 0.0;
};

/// Runs the student on a batch without recording gradients and samples one
/// action per row (greedy picks the argmax instead).
std::vector<ActionSample> act(StudentNet<float>& net, const ObsBatch& batch, Rng& rng, bool greedy = false);

}  // namespace amigo

#include "amigo/policies.hpp"

#include <algorithm>
#include <cmath>

#include "amigo/errors.hpp"

namespace amigo {

using nn::Shape;
using nn::Tape;
using nn::Tensor;
using nn::Var;

void NetConfig::validate() const {
  for (int c : conv_channels)
    if (c < 1) throw ConfigError("net: conv channel widths must be >= 1");
  if (embed_dim < 1) throw ConfigError("net: embed_dim must be >= 1");
  if (hidden < 1) throw ConfigError("net: hidden must be >= 1");
  if (kernel < 1 || kernel % 2 == 0) throw ConfigError("net: kernel must be odd and >= 1");
}

void ObsBatch::append(const Observation& obs) {
  if (obs.height != height || obs.width != width) throw ShapeError("ObsBatch: observation grid size mismatch");
  if (obs.has_goal() != with_goal) throw ShapeError("ObsBatch: goal channel presence mismatch");
  const std::size_t plane = static_cast<std::size_t>(height * width);
  auto channel = [&](int c) { return obs.data.begin() + static_cast<std::ptrdiff_t>(c * plane); };
  object.insert(object.end(), channel(kObjectChannel), channel(kObjectChannel + 1));
  color.insert(color.end(), channel(kColorChannel), channel(kColorChannel + 1));
  flag.insert(flag.end(), channel(kFlagChannel), channel(kFlagChannel + 1));
  const std::size_t base = indicators.size();
  indicators.resize(base + static_cast<std::size_t>(indicator_channels()) * plane, 0);
  for (std::size_t i = 0; i < plane; ++i) {
    indicators[base + i] = static_cast<std::uint8_t>(obs.data[kAgentChannel * plane + i]);
    const int dir = obs.data[kDirectionChannel * plane + i];
    if (dir > 0) indicators[base + static_cast<std::size_t>(dir) * plane + i] = 1;
    if (with_goal) indicators[base + 5 * plane + i] = static_cast<std::uint8_t>(obs.data[kGoalChannel * plane + i]);
  }
  ++n;
}

ObsBatch make_batch(std::span<const Observation> observations) {
  if (observations.empty()) throw ShapeError("make_batch: empty batch");
  ObsBatch b(observations[0].height, observations[0].width, observations[0].has_goal());
  for (const auto& o : observations) b.append(o);
  return b;
}

namespace {

enum StudentParam { kEmbObj, kEmbColor, kEmbFlag, kConv1W, kConv1B, kConv4B = kConv1W + 7, kFc1W, kFc1B, kFc2W, kFc2B, kPolW, kPolB, kValW, kValB };
enum TeacherParam { kHeadW = kConv4B + 1, kHeadB };

template <class T>
void add_trunk(nn::ParamSet<T>& ps, const NetConfig& cfg, int in_channels) {
  ps.add("emb.object", Tensor<T>({kNumObjects, cfg.embed_dim}));
  ps.add("emb.color", Tensor<T>({kNumColors, cfg.embed_dim}));
  ps.add("emb.flag", Tensor<T>({kNumFlags, cfg.embed_dim}));
  int prev = in_channels;
  for (int i = 0; i < 4; ++i) {
    const int c = cfg.conv_channels[static_cast<std::size_t>(i)];
    ps.add("conv" + std::to_string(i + 1) + ".weight", Tensor<T>({c, prev, cfg.kernel, cfg.kernel}));
    ps.add("conv" + std::to_string(i + 1) + ".bias", Tensor<T>({c}));
    prev = c;
  }
}

template <class T>
Var<T> trunk_forward(Tape<T>& tape, nn::ParamSet<T>& ps, const ObsBatch& b) {
  const int n = b.n, h = b.height, w = b.width;
  Var<T> emb = nn::add(nn::add(nn::embedding_nchw(tape.param(ps[kEmbObj]), std::span<const std::int32_t>(b.object), n, h, w),
                               nn::embedding_nchw(tape.param(ps[kEmbColor]), std::span<const std::int32_t>(b.color), n, h, w)),
                       nn::embedding_nchw(tape.param(ps[kEmbFlag]), std::span<const std::int32_t>(b.flag), n, h, w));
  Tensor<T> ind({n, b.indicator_channels(), h, w});
  std::transform(b.indicators.begin(), b.indicators.end(), ind.values.begin(), [](std::uint8_t v) { return T(v); });
  Var<T> x = nn::concat_channels<T>({emb, tape.constant(std::move(ind))});
  for (int i = 0; i < 4; ++i) {
    x = nn::elu(nn::conv2d_same(x, tape.param(ps[kConv1W + 2 * i]), tape.param(ps[kConv1B + 2 * i])));
  }
  return x;
}

/// U(-a, a) with a = gain * sqrt(3 / fan_in), so the variance is gain^2 / fan_in.
template <class T>
void fan_in_uniform(Tensor<T>& t, int fan_in, double gain, Rng& rng) {
  const double a = gain * std::sqrt(3.0 / static_cast<double>(fan_in));
  for (T& v : t.values) v = static_cast<T>(uniform(rng, -a, a));
}

template <class T>
void init_trunk(nn::ParamSet<T>& ps, const NetConfig& cfg, Rng& rng) {
  for (int i = kEmbObj; i <= kEmbFlag; ++i) fan_in_uniform(ps[i].value, 1, 1.0, rng);
  for (int i = 0; i < 4; ++i) {
    auto& wt = ps[kConv1W + 2 * i].value;
    fan_in_uniform(wt, wt.dim(1) * cfg.kernel * cfg.kernel, std::sqrt(2.0), rng);
    ps[kConv1B + 2 * i].value.fill(T(0));
  }
}

constexpr std::uint64_t kStudentStream = 0x5354;
constexpr std::uint64_t kTeacherStream = 0x5445;

}  // namespace

template <class T>
StudentNet<T>::StudentNet(NetConfig cfg, int height, int width) : cfg_(cfg), height_(height), width_(width) {
  cfg_.validate();
  add_trunk(params_, cfg_, cfg_.embed_dim + kIndicatorChannels + 1);
  const int flat = cfg_.conv_channels[3] * height * width;
  params_.add("fc1.weight", Tensor<T>({cfg_.hidden, flat}));
  params_.add("fc1.bias", Tensor<T>({cfg_.hidden}));
  params_.add("fc2.weight", Tensor<T>({cfg_.hidden, cfg_.hidden}));
  params_.add("fc2.bias", Tensor<T>({cfg_.hidden}));
  params_.add("policy.weight", Tensor<T>({kNumActions, cfg_.hidden}));
  params_.add("policy.bias", Tensor<T>({kNumActions}));
  params_.add("value.weight", Tensor<T>({1, cfg_.hidden}));
  params_.add("value.bias", Tensor<T>({1}));
}

template <class T>
void StudentNet<T>::init(std::uint64_t seed) {
  Rng rng = make_rng(seed, kStudentStream);
  init_trunk(params_, cfg_, rng);
  fan_in_uniform(params_[kFc1W].value, params_[kFc1W].value.dim(1), std::sqrt(2.0), rng);
  fan_in_uniform(params_[kFc2W].value, cfg_.hidden, std::sqrt(2.0), rng);
  fan_in_uniform(params_[kPolW].value, cfg_.hidden, 0.01, rng);
  fan_in_uniform(params_[kValW].value, cfg_.hidden, 1.0, rng);
  for (int i : {kFc1B, kFc2B, kPolB, kValB}) params_[i].value.fill(T(0));
}

template <class T>
typename StudentNet<T>::Output StudentNet<T>::forward(Tape<T>& tape, const ObsBatch& b) {
  if (b.height != height_ || b.width != width_) throw ShapeError("student_forward: grid size mismatch");
  if (!b.with_goal) throw ShapeError("student_forward: observation lacks the goal channel");
  Var<T> x = trunk_forward(tape, params_, b);
  x = nn::reshape(x, Shape{b.n, cfg_.conv_channels[3] * height_ * width_});
  x = nn::relu(nn::linear(x, tape.param(params_[kFc1W]), tape.param(params_[kFc1B])));
  x = nn::relu(nn::linear(x, tape.param(params_[kFc2W]), tape.param(params_[kFc2B])));
  Output out;
  out.logits = nn::linear(x, tape.param(params_[kPolW]), tape.param(params_[kPolB]));
  out.value = nn::reshape(nn::linear(x, tape.param(params_[kValW]), tape.param(params_[kValB])), Shape{b.n});
  return out;
}

template <class T>
std::size_t StudentNet<T>::param_count(const NetConfig& cfg, int height, int width) {
  const std::size_t e = static_cast<std::size_t>(cfg.embed_dim);
  const std::size_t kk = static_cast<std::size_t>(cfg.kernel * cfg.kernel);
  std::size_t n = (kNumObjects + kNumColors + kNumFlags) * e;
  std::size_t prev = e + kIndicatorChannels + 1;
  for (int c : cfg.conv_channels) {
    n += static_cast<std::size_t>(c) * prev * kk + static_cast<std::size_t>(c);
    prev = static_cast<std::size_t>(c);
  }
  const std::size_t hid = static_cast<std::size_t>(cfg.hidden);
  const std::size_t flat = prev * static_cast<std::size_t>(height * width);
  n += hid * flat + hid;              // fc1
  n += hid * hid + hid;               // fc2
  n += kNumActions * hid + kNumActions;  // policy head
  n += hid + 1;                       // value head
  return n;
}

template <class T>
TeacherNet<T>::TeacherNet(NetConfig cfg, int height, int width) : cfg_(cfg), height_(height), width_(width) {
  cfg_.validate();
  add_trunk(params_, cfg_, cfg_.embed_dim + kIndicatorChannels);
  params_.add("head.weight", Tensor<T>({1, cfg_.conv_channels[3], cfg_.kernel, cfg_.kernel}));
  params_.add("head.bias", Tensor<T>({1}));
}

template <class T>
void TeacherNet<T>::init(std::uint64_t seed) {
  Rng rng = make_rng(seed, kTeacherStream);
  init_trunk(params_, cfg_, rng);
  fan_in_uniform(params_[kHeadW].value, cfg_.conv_channels[3] * cfg_.kernel * cfg_.kernel, 0.01, rng);
  params_[kHeadB].value.fill(T(0));
}

template <class T>
Var<T> TeacherNet<T>::forward(Tape<T>& tape, const ObsBatch& b) {
  if (b.height != height_ || b.width != width_) throw ShapeError("teacher_forward: grid size mismatch");
  if (b.with_goal) throw ShapeError("teacher_forward: observation must not carry a goal channel");
  Var<T> x = trunk_forward(tape, params_, b);
  x = nn::conv2d_same(x, tape.param(params_[kHeadW]), tape.param(params_[kHeadB]));
  return nn::reshape(x, Shape{b.n, height_ * width_});
}

template <class T>
std::size_t TeacherNet<T>::param_count(const NetConfig& cfg, int, int) {
  const std::size_t e = static_cast<std::size_t>(cfg.embed_dim);
  const std::size_t kk = static_cast<std::size_t>(cfg.kernel * cfg.kernel);
  std::size_t n = (kNumObjects + kNumColors + kNumFlags) * e;
  std::size_t prev = e + kIndicatorChannels;
  for (int c : cfg.conv_channels) {
    n += static_cast<std::size_t>(c) * prev * kk + static_cast<std::size_t>(c);
    prev = static_cast<std::size_t>(c);
  }
  return n + prev * kk + 1;
}

template class StudentNet<float>;
template class StudentNet<double>;
template class TeacherNet<float>;
template class TeacherNet<double>;

NetConfig infer_net_config(const nn::ParamSet<float>& params) {
  NetConfig cfg;
  const auto* emb = params.find("emb.object");
  if (emb == nullptr) throw ConfigError("checkpoint lacks emb.object");
  cfg.embed_dim = emb->value.dim(1);
  for (int i = 0; i < 4; ++i) {
    const auto* w = params.find("conv" + std::to_string(i + 1) + ".weight");
    if (w == nullptr) throw ConfigError("checkpoint lacks conv weights");
    cfg.conv_channels[static_cast<std::size_t>(i)] = w->value.dim(0);
    cfg.kernel = w->value.dim(2);
  }
  if (const auto* fc = params.find("fc1.weight")) cfg.hidden = fc->value.dim(0);
  return cfg;
}

GoalSample propose_goal(TeacherNet<float>& net, const Observation& observation, Rng& rng) {
  Tape<float> tape(false);
  ObsBatch b(observation.height, observation.width, false);
  b.append(observation);
  Var<float> logits = net.forward(tape, b);
  return sample_goal(logits.value().span(), observation.height, observation.width, rng);
}

std::vector<ActionSample> act(StudentNet<float>& net, const ObsBatch& batch, Rng& rng, bool greedy) {
  Tape<float> tape(false);
  auto out = net.forward(tape, batch);
  const auto& logits = out.logits.value().values;
  std::vector<ActionSample> samples(static_cast<std::size_t>(batch.n));
  for (std::size_t r = 0; r < samples.size(); ++r) {
    const float* row = logits.data() + r * kNumActions;
    const float mx = *std::max_element(row, row + kNumActions);
    std::array<double, kNumActions> p{};
    double z = 0.0;
    for (int a = 0; a < kNumActions; ++a) z += p[static_cast<std::size_t>(a)] = std::exp(static_cast<double>(row[a] - mx));
    for (double& v : p) v /= z;
    int a = 0;
    if (greedy) {
      a = static_cast<int>(std::max_element(row, row + kNumActions) - row);
    } else {
      a = static_cast<int>(sample_categorical<double>(rng, p));
    }
    samples[r].action = a;
    samples[r].log_prob = static_cast<double>(row[a] - mx) - std::log(z);
    samples[r].value = static_cast<double>(out.value.value().values[r]);
  }
  return samples;
}

}  // namespace amigo

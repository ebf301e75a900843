#include <cmath>
#include <numeric>

#include "amigo/errors.hpp"
#include "amigo/policies.hpp"
#include "doctest.h"
#include "support/grad_suite.hpp"

using namespace amigo;

namespace {

double variance(const std::vector<double>& v) {
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size());
}

}  // namespace

TEST_CASE("parameter counts") {
  // Desk student on 8x8: embeddings 16*5, conv 11->8 then 3x 8->8 (3x3),
  // fc 512->64->64, heads 6 and 1.
  const int emb = (7 + 6 + 3) * 5;
  const int convs = (8 * 11 * 9 + 8) + 3 * (8 * 8 * 9 + 8);
  const int student = emb + convs + (64 * 8 * 64 + 64) + (64 * 64 + 64) + (6 * 64 + 6) + (64 + 1);
  StudentNet<float> s(NetConfig::desk(), 8, 8);
  CHECK(s.params().total_count() == static_cast<std::size_t>(student));
  CHECK(StudentNet<float>::param_count(NetConfig::desk(), 8, 8) == static_cast<std::size_t>(student));

  const int teacher = emb + (8 * 10 * 9 + 8) + 3 * (8 * 8 * 9 + 8) + (8 * 9 + 1);
  TeacherNet<float> t(NetConfig::desk(), 8, 8);
  CHECK(t.params().total_count() == static_cast<std::size_t>(teacher));
  CHECK(TeacherNet<float>::param_count(NetConfig::desk(), 8, 8) == static_cast<std::size_t>(teacher));

  for (int hw : {5, 7, 10}) {
    StudentNet<float> full(NetConfig::full(), hw, hw);
    CHECK(full.params().total_count() == StudentNet<float>::param_count(NetConfig::full(), hw, hw));
    TeacherNet<float> tf(NetConfig::full(), hw, hw);
    CHECK(tf.params().total_count() == TeacherNet<float>::param_count(NetConfig::full(), hw, hw));
  }
}

TEST_CASE("initialization is deterministic per seed") {
  StudentNet<float> a(NetConfig::desk(), 8, 8), b(NetConfig::desk(), 8, 8), c(NetConfig::desk(), 8, 8);
  a.init(5);
  b.init(5);
  c.init(6);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < a.params().size(); ++i) {
    all_equal = all_equal && a.params()[i].value.values == b.params()[i].value.values;
    any_diff = any_diff || a.params()[i].value.values != c.params()[i].value.values;
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("conv weight variance is gain^2 / fan_in") {
  StudentNet<float> net(NetConfig::full(), 8, 8);
  net.init(1);
  std::vector<double> w;
  for (const char* name : {"conv3.weight", "conv4.weight"}) {
    const auto* p = net.params().find(name);
    REQUIRE(p != nullptr);
    w.insert(w.end(), p->value.values.begin(), p->value.values.end());
  }
  REQUIRE(w.size() >= 10000);
  const double expected = 2.0 / (32 * 9);
  CHECK(std::abs(variance(w) / expected - 1.0) < 0.2);
  CHECK(net.params().find("value.bias")->value.values[0] == 0.0f);
  CHECK(net.params().find("policy.bias")->value.values[0] == 0.0f);
}

TEST_CASE("forward shapes and goal requirements") {
  const EnvSpec spec = EnvSpec::parse("TwoRoom-8");
  Rng rng = make_rng(1, 0);
  StudentNet<float> student(NetConfig::desk(), 8, 8);
  student.init(0);
  TeacherNet<float> teacher(NetConfig::desk(), 8, 8);
  teacher.init(0);
  const ObsBatch with = amigo::testing::random_obs_batch(spec, 4, true, rng);
  const ObsBatch without = amigo::testing::random_obs_batch(spec, 3, false, rng);
  {
    nn::Tape<float> tape(false);
    auto out = student.forward(tape, with);
    CHECK(out.logits.value().shape == nn::Shape{4, 6});
    CHECK(out.value.value().shape == nn::Shape{4});
    CHECK(teacher.forward(tape, without).value().shape == nn::Shape{3, 64});
    CHECK_THROWS_AS(student.forward(tape, without), ShapeError);
    CHECK_THROWS_AS(teacher.forward(tape, with), ShapeError);
  }
  StudentNet<float> other(NetConfig::desk(), 9, 9);
  nn::Tape<float> tape(false);
  CHECK_THROWS_AS(other.forward(tape, with), ShapeError);
}

TEST_CASE("batched forward equals per-row forward") {
  const EnvSpec spec = EnvSpec::parse("KeyCorridorS3R3");
  Rng rng = make_rng(2, 0);
  StudentNet<double> net(NetConfig::desk(), spec.height(), spec.width());
  net.init(3);
  const ObsBatch batch = amigo::testing::random_obs_batch(spec, 5, true, rng);
  nn::Tape<double> tape(false);
  const auto all = net.forward(tape, batch);
  for (int i = 0; i < 5; ++i) {
    ObsBatch one(batch.height, batch.width, true);
    one.n = 1;
    const std::size_t plane = static_cast<std::size_t>(batch.height * batch.width);
    auto slice = [&](const std::vector<std::int32_t>& v) {
      return std::vector<std::int32_t>(v.begin() + static_cast<std::ptrdiff_t>(i * plane),
                                       v.begin() + static_cast<std::ptrdiff_t>((i + 1) * plane));
    };
    one.object = slice(batch.object);
    one.color = slice(batch.color);
    one.flag = slice(batch.flag);
    const std::size_t ind = plane * static_cast<std::size_t>(batch.indicator_channels());
    one.indicators.assign(batch.indicators.begin() + static_cast<std::ptrdiff_t>(i * ind),
                          batch.indicators.begin() + static_cast<std::ptrdiff_t>((i + 1) * ind));
    const auto single = net.forward(tape, one);
    for (int a = 0; a < 6; ++a)
      CHECK(single.logits.value().values[static_cast<std::size_t>(a)] ==
            doctest::Approx(all.logits.value().values[static_cast<std::size_t>(i * 6 + a)]).epsilon(1e-12));
    CHECK(single.value.value().values[0] == doctest::Approx(all.value.value().values[static_cast<std::size_t>(i)]).epsilon(1e-12));
  }
}

TEST_CASE("network config is recovered from parameter shapes") {
  StudentNet<float> s(NetConfig::desk(), 7, 7);
  CHECK(infer_net_config(s.params()) == NetConfig::desk());
  TeacherNet<float> t(NetConfig::full(), 9, 9);
  CHECK(infer_net_config(t.params()) == NetConfig::full());
}

TEST_CASE("invalid network configs are rejected") {
  NetConfig c = NetConfig::desk();
  c.kernel = 2;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = NetConfig::desk();
  c.hidden = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("act samples valid actions and greedy picks the argmax") {
  const EnvSpec spec = EnvSpec::parse("TwoRoom-8");
  Rng rng = make_rng(3, 0);
  StudentNet<float> net(NetConfig::desk(), 8, 8);
  net.init(0);
  const ObsBatch batch = amigo::testing::random_obs_batch(spec, 6, true, rng);
  const auto samples = act(net, batch, rng);
  REQUIRE(samples.size() == 6);
  nn::Tape<float> tape(false);
  const auto out = net.forward(tape, batch);
  const auto greedy = act(net, batch, rng, true);
  for (int i = 0; i < 6; ++i) {
    CHECK(samples[static_cast<std::size_t>(i)].action >= 0);
    CHECK(samples[static_cast<std::size_t>(i)].action < 6);
    CHECK(samples[static_cast<std::size_t>(i)].log_prob <= 0.0);
    const auto* row = out.logits.value().data() + i * 6;
    const int best = static_cast<int>(std::max_element(row, row + 6) - row);
    CHECK(greedy[static_cast<std::size_t>(i)].action == best);
    CHECK(greedy[static_cast<std::size_t>(i)].value == doctest::Approx(out.value.value().values[static_cast<std::size_t>(i)]));
  }
}

TEST_CASE("propose_goal stays in bounds") {
  const EnvSpec spec = EnvSpec::parse("KeyCorridorS3R3");
  TeacherNet<float> net(NetConfig::desk(), spec.height(), spec.width());
  net.init(0);
  Rng rng = make_rng(4, 0);
  for (int i = 0; i < 50; ++i) {
    const GridState s = generate(spec, static_cast<std::uint64_t>(i));
    const GoalSample g = propose_goal(net, encode_observation(s), rng);
    CHECK(s.in_bounds(g.goal.cell()));
    CHECK(g.log_prob <= 0.0);
    CHECK(g.entropy <= std::log(spec.height() * spec.width()) + 1e-9);
  }
}

#include <cmath>
#include <sstream>

#include "amigo/errors.hpp"
#include "amigo/nn/checkpoint.hpp"
#include "amigo/nn/ops.hpp"
#include "amigo/nn/rmsprop.hpp"
#include "doctest.h"
#include "support/grad_suite.hpp"

using namespace amigo;
using namespace amigo::nn;
using amigo::testing::random_tensor;

namespace {

// Direct 7-loop convolution with zero padding.
Tensor<double> naive_conv(const Tensor<double>& x, const Tensor<double>& w, const Tensor<double>& b) {
  const int n = x.dim(0), c = x.dim(1), h = x.dim(2), wd = x.dim(3), o = w.dim(0), k = w.dim(2), pad = k / 2;
  Tensor<double> out({n, o, h, wd});
  for (int ni = 0; ni < n; ++ni)
    for (int oi = 0; oi < o; ++oi)
      for (int y = 0; y < h; ++y)
        for (int xx = 0; xx < wd; ++xx) {
          double acc = b.values[static_cast<std::size_t>(oi)];
          for (int ci = 0; ci < c; ++ci)
            for (int ky = 0; ky < k; ++ky)
              for (int kx = 0; kx < k; ++kx) {
                const int sy = y + ky - pad, sx = xx + kx - pad;
                if (sy < 0 || sy >= h || sx < 0 || sx >= wd) continue;
                acc += w.values[static_cast<std::size_t>(((oi * c + ci) * k + ky) * k + kx)] *
                       x.values[static_cast<std::size_t>(((ni * c + ci) * h + sy) * wd + sx)];
              }
          out.values[static_cast<std::size_t>(((ni * o + oi) * h + y) * wd + xx)] = acc;
        }
  return out;
}

}  // namespace

TEST_CASE("every op matches central finite differences") {
  Rng rng = make_rng(11, 0);
  for (const auto& [name, check] : amigo::testing::op_grad_cases()) {
    for (int trial = 0; trial < 3; ++trial) {
      const auto r = check(rng);
      INFO(name << " trial " << trial << " worst " << r.worst);
      CHECK(r.max_rel_error < 1e-3);
    }
  }
}

TEST_CASE("both networks match central finite differences") {
  Rng rng = make_rng(12, 0);
  for (const auto& [name, check] : amigo::testing::network_grad_cases(15)) {
    const auto r = check(rng);
    INFO(name << " worst " << r.worst);
    CHECK(r.max_rel_error < 1e-3);
  }
}

TEST_CASE("convolution agrees with the direct loop") {
  Rng rng = make_rng(3, 0);
  for (int k : {1, 3, 5}) {
    auto x = random_tensor({2, 3, 5, 6}, rng);
    auto w = random_tensor({4, 3, k, k}, rng);
    auto b = random_tensor({4}, rng);
    Tape<double> tape(false);
    auto y = conv2d_same(tape.constant(x), tape.constant(w), tape.constant(b));
    const auto ref = naive_conv(x, w, b);
    REQUIRE(y.value().shape == ref.shape);
    for (std::size_t i = 0; i < ref.numel(); ++i) CHECK(std::abs(y.value().values[i] - ref.values[i]) < 1e-12);
  }
}

TEST_CASE("forward values of small ops") {
  Tape<double> tape(false);
  auto x = tape.constant(Tensor<double>({2, 3}, std::vector<double>{1, 2, 3, 0, 0, 0}));
  auto sm = softmax(x).value().values;
  const double z = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
  CHECK(sm[0] == doctest::Approx(std::exp(1.0) / z).epsilon(1e-12));
  CHECK(sm[3] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  auto ent = entropy_from_logits(x).value().values;
  CHECK(ent[1] == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  auto probs = tape.constant(Tensor<double>({1, 3}, std::vector<double>{1.0, 0.0, 0.0}));
  CHECK(entropy(probs).value().values[0] == 0.0);
  CHECK(elu(tape.constant(Tensor<double>({2}, std::vector<double>{-1.0, 2.0}))).value().values[0] ==
        doctest::Approx(std::exp(-1.0) - 1.0));
  std::vector<int> idx{2, 0};
  auto g = gather_last<double>(x, idx).value().values;
  CHECK(g[0] == 3.0);
  CHECK(g[1] == 0.0);
}

TEST_CASE("shape mismatches raise ShapeError") {
  Tape<double> tape(false);
  auto a = tape.constant(Tensor<double>({2, 3}));
  auto b = tape.constant(Tensor<double>({3, 2}));
  CHECK_THROWS_AS(add(a, b), ShapeError);
  CHECK_THROWS_AS(linear(a, tape.constant(Tensor<double>({4, 2})), tape.constant(Tensor<double>({4}))), ShapeError);
  CHECK_THROWS_AS(conv2d_same(tape.constant(Tensor<double>({1, 2, 3, 3})), tape.constant(Tensor<double>({1, 3, 3, 3})),
                              tape.constant(Tensor<double>({1}))),
                  ShapeError);
  CHECK_THROWS_AS(reshape(a, Shape{5}), ShapeError);
  std::vector<int> bad{0, 7};
  CHECK_THROWS_AS(gather_last<double>(a, bad), ShapeError);
}

TEST_CASE("non-scalar loss is rejected") {
  Tape<double> tape;
  ParamSet<double> ps;
  ps.add("w", Tensor<double>({3}, 1.0));
  auto v = tape.param(ps[0]);
  CHECK_THROWS_AS(tape.backward(v), ShapeError);
}

TEST_CASE("non-finite values abort") {
  Tape<double> tape(false);
  auto x = tape.constant(Tensor<double>({1}, 1000.0));
  CHECK_THROWS_AS(nn::exp(x), NumericError);
}

TEST_CASE("gradients accumulate when a value is used twice") {
  ParamSet<double> ps;
  ps.add("w", Tensor<double>({1}, 3.0));
  Tape<double> tape;
  auto w = tape.param(ps[0]);
  tape.backward(sum(mul(w, w)));
  CHECK(ps[0].grad.values[0] == doctest::Approx(6.0));
}

TEST_CASE("rmsprop matches the closed-form update") {
  ParamSet<double> ps;
  ps.add("w", Tensor<double>({2}, std::vector<double>{1.0, -2.0}));
  RmsPropOptions opt{0.1, 0.9, 0.01, 0.0};
  double sq0 = 0, sq1 = 0, w0 = 1.0, w1 = -2.0;
  for (int it = 0; it < 3; ++it) {
    const double g0 = 0.5 * (it + 1), g1 = -1.0;
    ps[0].grad.values = {g0, g1};
    rmsprop_step(ps, opt);
    sq0 = 0.9 * sq0 + 0.1 * g0 * g0;
    sq1 = 0.9 * sq1 + 0.1 * g1 * g1;
    w0 -= 0.1 * g0 / (std::sqrt(sq0) + 0.01);
    w1 -= 0.1 * g1 / (std::sqrt(sq1) + 0.01);
    CHECK(ps[0].value.values[0] == doctest::Approx(w0).epsilon(1e-12));
    CHECK(ps[0].value.values[1] == doctest::Approx(w1).epsilon(1e-12));
  }
}

TEST_CASE("gradient clipping scales to the target norm") {
  ParamSet<double> ps;
  ps.add("a", Tensor<double>({2}));
  ps[0].grad.values = {30.0, 40.0};
  CHECK(ps.clip_grad_norm(5.0) == doctest::Approx(50.0));
  CHECK(ps.grad_norm() == doctest::Approx(5.0));
  CHECK(ps[0].grad.values[0] == doctest::Approx(3.0));
  CHECK(ps.clip_grad_norm(10.0) == doctest::Approx(5.0));
  CHECK(ps[0].grad.values[0] == doctest::Approx(3.0));
}

TEST_CASE("checkpoint round trip is exact") {
  Rng rng = make_rng(5, 0);
  ParamSet<float> ps;
  ps.add("layer.weight", random_tensor({3, 4, 2}, rng).cast<float>());
  ps.add("layer.bias", random_tensor({3}, rng).cast<float>());
  ps.add("scalar", Tensor<float>({1}, 0.25f));
  std::stringstream buf;
  write_checkpoint(buf, ps);
  const auto back = read_checkpoint(buf);
  REQUIRE(back.size() == ps.size());
  for (int i = 0; i < ps.size(); ++i) {
    CHECK(back[i].name == ps[i].name);
    CHECK(back[i].value.shape == ps[i].value.shape);
    CHECK(back[i].value.values == ps[i].value.values);
  }
}

TEST_CASE("checkpoint header is little-endian with magic and version") {
  ParamSet<float> ps;
  ps.add("x", Tensor<float>({1}, 1.0f));
  std::stringstream buf;
  write_checkpoint(buf, ps);
  const std::string bytes = buf.str();
  REQUIRE(bytes.size() == 8 + 4 + 4 + 4 + 1 + 4 + 4 + 4);
  CHECK(bytes.substr(0, 8) == "AMIGOCKP");
  CHECK(static_cast<unsigned char>(bytes[8]) == 1);
  CHECK(static_cast<unsigned char>(bytes[12]) == 1);
  // 1.0f is 0x3f800000
  CHECK(static_cast<unsigned char>(bytes[bytes.size() - 1]) == 0x3f);
  CHECK(static_cast<unsigned char>(bytes[bytes.size() - 2]) == 0x80);
}

TEST_CASE("corrupt checkpoints are rejected") {
  std::stringstream bad("NOTACKPT");
  CHECK_THROWS_AS(read_checkpoint(bad), IoError);
  ParamSet<float> ps;
  ps.add("x", Tensor<float>({4}, 1.0f));
  std::stringstream buf;
  write_checkpoint(buf, ps);
  std::string truncated = buf.str().substr(0, buf.str().size() - 3);
  std::stringstream tb(truncated);
  CHECK_THROWS_AS(read_checkpoint(tb), IoError);
}

TEST_CASE("assign_values enforces names and shapes") {
  ParamSet<float> a, b, c;
  a.add("w", Tensor<float>({2}));
  b.add("w", Tensor<float>({2}, 3.0f));
  c.add("w", Tensor<float>({3}));
  assign_values(a, b);
  CHECK(a[0].value.values[1] == 3.0f);
  CHECK_THROWS(assign_values(a, c));
}

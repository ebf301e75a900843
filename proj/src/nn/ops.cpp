#include "amigo/nn/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

namespace amigo::nn {

namespace {

template <class T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using MapMat = Eigen::Map<RowMat<T>>;
template <class T>
using CMapMat = Eigen::Map<const RowMat<T>>;

void require(bool cond, const char* op, const std::string& what) {
  if (!cond) throw ShapeError(std::string(op) + ": " + what);
}

template <class T>
void require_same_tape(Var<T> a, Var<T> b, const char* op) {
  require(a.tape == b.tape, op, "operands recorded on different tapes");
}

/// Elementwise unary op; `fwd` maps x -> y and `deriv` maps (x, y) -> dy/dx.
template <class T, class F, class D>
Var<T> unary(const char* op, Var<T> x, F fwd, D deriv) {
  Tape<T>& tape = *x.tape;
  const Tensor<T>& xv = x.value();
  Tensor<T> out(xv.shape);
  for (std::size_t i = 0; i < xv.numel(); ++i) out.values[i] = fwd(xv.values[i]);
  const int xid = x.id;
  return tape.push(op, std::move(out), {xid}, [xid, deriv](Tape<T>& t, int self) {
    const auto& xv2 = t.value(xid).values;
    const auto& yv = t.value(self).values;
    const auto& g = t.grad(self).values;
    auto& dx = t.grad(xid).values;
    for (std::size_t i = 0; i < g.size(); ++i) dx[i] += g[i] * deriv(xv2[i], yv[i]);
  });
}

template <class T>
std::size_t last_dim(const Tensor<T>& x, const char* op) {
  require(x.rank() >= 1 && x.dim(-1) > 0, op, "needs a nonempty last axis");
  return static_cast<std::size_t>(x.dim(-1));
}

}  // namespace

template <class T>
Var<T> conv2d_same(Var<T> x, Var<T> w, Var<T> b) {
  static constexpr const char* op = "conv2d_same";
  require_same_tape(x, w, op);
  require_same_tape(x, b, op);
  const Tensor<T>& xv = x.value();
  const Tensor<T>& wv = w.value();
  const Tensor<T>& bv = b.value();
  require(xv.rank() == 4, op, "input must be [N,C,H,W], got " + shape_string(xv.shape));
  require(wv.rank() == 4, op, "weights must be [O,C,k,k], got " + shape_string(wv.shape));
  const int n = xv.dim(0), c = xv.dim(1), h = xv.dim(2), wd = xv.dim(3);
  const int o = wv.dim(0), k = wv.dim(2);
  require(wv.dim(1) == c, op, "weight input channels " + std::to_string(wv.dim(1)) + " != " + std::to_string(c));
  require(wv.dim(3) == k && k % 2 == 1, op, "kernel must be square and odd-sized");
  require(bv.rank() == 1 && bv.dim(0) == o, op, "bias must be [O]");
  const int pad = k / 2;
  const int plane = h * wd;
  const int ckk = c * k * k;
  const std::size_t np = static_cast<std::size_t>(n) * static_cast<std::size_t>(plane);

  auto cols = std::make_shared<Buffer<T>>(static_cast<std::size_t>(ckk) * np, T(0));
  {
    T* cp = cols->data();
    const T* xp = xv.data();
    for (int ci = 0; ci < c; ++ci)
      for (int ky = 0; ky < k; ++ky)
        for (int kx = 0; kx < k; ++kx) {
          T* row = cp + static_cast<std::size_t>((ci * k + ky) * k + kx) * np;
          for (int ni = 0; ni < n; ++ni) {
            const T* src = xp + (static_cast<std::size_t>(ni) * c + ci) * plane;
            T* dst = row + static_cast<std::size_t>(ni) * plane;
            for (int y = 0; y < h; ++y) {
              const int sy = y + ky - pad;
              if (sy < 0 || sy >= h) continue;
              const int x0 = std::max(0, pad - kx);
              const int x1 = std::min(wd, wd + pad - kx);
              for (int xx = x0; xx < x1; ++xx) dst[y * wd + xx] = src[sy * wd + xx + kx - pad];
            }
          }
        }
  }
  RowMat<T> y(o, static_cast<Eigen::Index>(np));
  y.noalias() = CMapMat<T>(wv.data(), o, ckk) * CMapMat<T>(cols->data(), ckk, static_cast<Eigen::Index>(np));
  Tensor<T> out({n, o, h, wd});
  for (int ni = 0; ni < n; ++ni)
    for (int oi = 0; oi < o; ++oi) {
      T* dst = out.data() + (static_cast<std::size_t>(ni) * o + oi) * plane;
      const T* src = y.data() + static_cast<std::size_t>(oi) * np + static_cast<std::size_t>(ni) * plane;
      const T bias = bv.values[static_cast<std::size_t>(oi)];
      for (int p = 0; p < plane; ++p) dst[p] = src[p] + bias;
    }

  const int xid = x.id, wid = w.id, bid = b.id;
  return x.tape->push(op, std::move(out), {xid, wid, bid}, [=](Tape<T>& t, int self) {
    const auto& g = t.grad(self);
    RowMat<T> dy(o, static_cast<Eigen::Index>(np));
    for (int ni = 0; ni < n; ++ni)
      for (int oi = 0; oi < o; ++oi) {
        const T* src = g.data() + (static_cast<std::size_t>(ni) * o + oi) * plane;
        T* dst = dy.data() + static_cast<std::size_t>(oi) * np + static_cast<std::size_t>(ni) * plane;
        std::copy(src, src + plane, dst);
      }
    if (t.needs_grad(wid)) {
      MapMat<T> dw(t.grad(wid).data(), o, ckk);
      dw.noalias() += dy * CMapMat<T>(cols->data(), ckk, static_cast<Eigen::Index>(np)).transpose();
    }
    if (t.needs_grad(bid)) {
      auto& db = t.grad(bid).values;
      for (int oi = 0; oi < o; ++oi) db[static_cast<std::size_t>(oi)] += dy.row(oi).sum();
    }
    if (t.needs_grad(xid)) {
      RowMat<T> dcols(ckk, static_cast<Eigen::Index>(np));
      dcols.noalias() = CMapMat<T>(t.value(wid).data(), o, ckk).transpose() * dy;
      T* dx = t.grad(xid).data();
      for (int ci = 0; ci < c; ++ci)
        for (int ky = 0; ky < k; ++ky)
          for (int kx = 0; kx < k; ++kx) {
            const T* row = dcols.data() + static_cast<std::size_t>((ci * k + ky) * k + kx) * np;
            for (int ni = 0; ni < n; ++ni) {
              T* dst = dx + (static_cast<std::size_t>(ni) * c + ci) * plane;
              const T* src = row + static_cast<std::size_t>(ni) * plane;
              for (int yy = 0; yy < h; ++yy) {
                const int sy = yy + ky - pad;
                if (sy < 0 || sy >= h) continue;
                const int x0 = std::max(0, pad - kx);
                const int x1 = std::min(wd, wd + pad - kx);
                for (int xx = x0; xx < x1; ++xx) dst[sy * wd + xx + kx - pad] += src[yy * wd + xx];
              }
            }
          }
    }
  });
}

template <class T>
Var<T> linear(Var<T> x, Var<T> w, Var<T> b) {
  static constexpr const char* op = "linear";
  require_same_tape(x, w, op);
  require_same_tape(x, b, op);
  const Tensor<T>& xv = x.value();
  const Tensor<T>& wv = w.value();
  const Tensor<T>& bv = b.value();
  require(xv.rank() == 2, op, "input must be [N,I], got " + shape_string(xv.shape));
  require(wv.rank() == 2 && wv.dim(1) == xv.dim(1), op,
          "weights " + shape_string(wv.shape) + " do not match input " + shape_string(xv.shape));
  const int n = xv.dim(0), in = xv.dim(1), o = wv.dim(0);
  require(bv.rank() == 1 && bv.dim(0) == o, op, "bias must be [O]");
  Tensor<T> out({n, o});
  MapMat<T> y(out.data(), n, o);
  y.noalias() = CMapMat<T>(xv.data(), n, in) * CMapMat<T>(wv.data(), o, in).transpose();
  y.rowwise() += Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>>(bv.data(), o);
  const int xid = x.id, wid = w.id, bid = b.id;
  return x.tape->push(op, std::move(out), {xid, wid, bid}, [=](Tape<T>& t, int self) {
    CMapMat<T> g(t.grad(self).data(), n, o);
    if (t.needs_grad(xid)) {
      MapMat<T>(t.grad(xid).data(), n, in).noalias() += g * CMapMat<T>(t.value(wid).data(), o, in);
    }
    if (t.needs_grad(wid)) {
      MapMat<T>(t.grad(wid).data(), o, in).noalias() += g.transpose() * CMapMat<T>(t.value(xid).data(), n, in);
    }
    if (t.needs_grad(bid)) {
      Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>>(t.grad(bid).data(), o) += g.colwise().sum();
    }
  });
}

template <class T>
Var<T> elu(Var<T> x) {
  return unary<T>(
      "elu", x, [](T v) { return v > T(0) ? v : std::expm1(v); },
      [](T v, T yv) { return v > T(0) ? T(1) : yv + T(1); });
}

template <class T>
Var<T> relu(Var<T> x) {
  return unary<T>(
      "relu", x, [](T v) { return v > T(0) ? v : T(0); }, [](T v, T) { return v > T(0) ? T(1) : T(0); });
}

template <class T>
Var<T> exp(Var<T> x) {
  return unary<T>(
      "exp", x, [](T v) { return std::exp(v); }, [](T, T yv) { return yv; });
}

template <class T>
Var<T> square(Var<T> a) {
  return unary<T>(
      "square", a, [](T v) { return v * v; }, [](T v, T) { return T(2) * v; });
}

template <class T>
Var<T> scale(Var<T> a, T s) {
  return unary<T>(
      "scale", a, [s](T v) { return s * v; }, [s](T, T) { return s; });
}

template <class T>
Var<T> add(Var<T> a, Var<T> b) {
  static constexpr const char* op = "add";
  require_same_tape(a, b, op);
  require(a.shape() == b.shape(), op, shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  Tensor<T> out(a.shape());
  const auto& av = a.value().values;
  const auto& bv = b.value().values;
  for (std::size_t i = 0; i < av.size(); ++i) out.values[i] = av[i] + bv[i];
  const int aid = a.id, bid = b.id;
  return a.tape->push(op, std::move(out), {aid, bid}, [=](Tape<T>& t, int self) {
    const auto& g = t.grad(self).values;
    for (int id : {aid, bid}) {
      if (!t.needs_grad(id)) continue;
      auto& d = t.grad(id).values;
      for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i];
    }
  });
}

template <class T>
Var<T> sub(Var<T> a, Var<T> b) {
  static constexpr const char* op = "sub";
  require_same_tape(a, b, op);
  require(a.shape() == b.shape(), op, shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  Tensor<T> out(a.shape());
  const auto& av = a.value().values;
  const auto& bv = b.value().values;
  for (std::size_t i = 0; i < av.size(); ++i) out.values[i] = av[i] - bv[i];
  const int aid = a.id, bid = b.id;
  return a.tape->push(op, std::move(out), {aid, bid}, [=](Tape<T>& t, int self) {
    const auto& g = t.grad(self).values;
    if (t.needs_grad(aid)) {
      auto& d = t.grad(aid).values;
      for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i];
    }
    if (t.needs_grad(bid)) {
      auto& d = t.grad(bid).values;
      for (std::size_t i = 0; i < g.size(); ++i) d[i] -= g[i];
    }
  });
}

template <class T>
Var<T> mul(Var<T> a, Var<T> b) {
  static constexpr const char* op = "mul";
  require_same_tape(a, b, op);
  require(a.shape() == b.shape(), op, shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  Tensor<T> out(a.shape());
  const auto& av = a.value().values;
  const auto& bv = b.value().values;
  for (std::size_t i = 0; i < av.size(); ++i) out.values[i] = av[i] * bv[i];
  const int aid = a.id, bid = b.id;
  return a.tape->push(op, std::move(out), {aid, bid}, [=](Tape<T>& t, int self) {
    const auto& g = t.grad(self).values;
    if (t.needs_grad(aid)) {
      const auto& other = t.value(bid).values;
      auto& d = t.grad(aid).values;
      for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * other[i];
    }
    if (t.needs_grad(bid)) {
      const auto& other = t.value(aid).values;
      auto& d = t.grad(bid).values;
      for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * other[i];
    }
  });
}

template <class T>
Var<T> sum(Var<T> a) {
  T s = T(0);
  for (T v : a.value().values) s += v;
  const int aid = a.id;
  return a.tape->push("sum", Tensor<T>({1}, s), {aid}, [=](Tape<T>& t, int self) {
    const T g = t.grad(self).values[0];
    for (T& d : t.grad(aid).values) d += g;
  });
}

template <class T>
Var<T> mean(Var<T> a) {
  const std::size_t n = a.value().numel();
  require(n > 0, "mean", "empty tensor");
  return scale(sum(a), T(1) / static_cast<T>(n));
}

template <class T>
Var<T> sum_last(Var<T> a) {
  const Tensor<T>& av = a.value();
  const std::size_t k = last_dim(av, "sum_last");
  const std::size_t rows = av.numel() / k;
  Shape shape(av.shape.begin(), av.shape.end() - 1);
  if (shape.empty()) shape = {1};
  Tensor<T> out(shape);
  for (std::size_t r = 0; r < rows; ++r) {
    T s = T(0);
    for (std::size_t j = 0; j < k; ++j) s += av.values[r * k + j];
    out.values[r] = s;
  }
  const int aid = a.id;
  return a.tape->push("sum_last", std::move(out), {aid}, [=](Tape<T>& t, int self) {
    const auto& g = t.grad(self).values;
    auto& d = t.grad(aid).values;
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t j = 0; j < k; ++j) d[r * k + j] += g[r];
  });
}

template <class T>
Var<T> weighted_sum(Var<T> a, std::span<const T> weights) {
  const auto& av = a.value().values;
  require(av.size() == weights.size(), "weighted_sum", "weight count does not match tensor size");
  T s = T(0);
  for (std::size_t i = 0; i < av.size(); ++i) s += av[i] * weights[i];
  std::vector<T> w(weights.begin(), weights.end());
  const int aid = a.id;
  return a.tape->push("weighted_sum", Tensor<T>({1}, s), {aid}, [aid, w = std::move(w)](Tape<T>& t, int self) {
    const T g = t.grad(self).values[0];
    auto& d = t.grad(aid).values;
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += g * w[i];
  });
}

template <class T>
Var<T> softmax(Var<T> x) {
  const Tensor<T>& xv = x.value();
  const std::size_t k = last_dim(xv, "softmax");
  const std::size_t rows = xv.numel() / k;
  Tensor<T> out(xv.shape);
  for (std::size_t r = 0; r < rows; ++r) {
    const T* src = xv.data() + r * k;
    T* dst = out.data() + r * k;
    const T mx = *std::max_element(src, src + k);
    T z = T(0);
    for (std::size_t j = 0; j < k; ++j) z += dst[j] = std::exp(src[j] - mx);
    for (std::size_t j = 0; j < k; ++j) dst[j] /= z;
  }
  const int xid = x.id;
  return x.tape->push("softmax", std::move(out), {xid}, [=](Tape<T>& t, int self) {
    const auto& y = t.value(self).values;
    const auto& g = t.grad(self).values;
    auto& d = t.grad(xid).values;
    for (std::size_t r = 0; r < rows; ++r) {
      T dot = T(0);
      for (std::size_t j = 0; j < k; ++j) dot += g[r * k + j] * y[r * k + j];
      for (std::size_t j = 0; j < k; ++j) d[r * k + j] += y[r * k + j] * (g[r * k + j] - dot);
    }
  });
}

template <class T>
Var<T> log_softmax(Var<T> x) {
  const Tensor<T>& xv = x.value();
  const std::size_t k = last_dim(xv, "log_softmax");
  const std::size_t rows = xv.numel() / k;
  Tensor<T> out(xv.shape);
  for (std::size_t r = 0; r < rows; ++r) {
    const T* src = xv.data() + r * k;
    T* dst = out.data() + r * k;
    const T mx = *std::max_element(src, src + k);
    T z = T(0);
    for (std::size_t j = 0; j < k; ++j) z += std::exp(src[j] - mx);
    const T lse = mx + std::log(z);
    for (std::size_t j = 0; j < k; ++j) dst[j] = src[j] - lse;
  }
  const int xid = x.id;
  return x.tape->push("log_softmax", std::move(out), {xid}, [=](Tape<T>& t, int self) {
    const auto& y = t.value(self).values;
    const auto& g = t.grad(self).values;
    auto& d = t.grad(xid).values;
    for (std::size_t r = 0; r < rows; ++r) {
      T gs = T(0);
      for (std::size_t j = 0; j < k; ++j) gs += g[r * k + j];
      for (std::size_t j = 0; j < k; ++j) d[r * k + j] += g[r * k + j] - std::exp(y[r * k + j]) * gs;
    }
  });
}

template <class T>
Var<T> entropy(Var<T> probs) {
  const Tensor<T>& pv = probs.value();
  const std::size_t k = last_dim(pv, "entropy");
  const std::size_t rows = pv.numel() / k;
  Shape shape(pv.shape.begin(), pv.shape.end() - 1);
  if (shape.empty()) shape = {1};
  Tensor<T> out(shape);
  for (std::size_t r = 0; r < rows; ++r) {
    T h = T(0);
    for (std::size_t j = 0; j < k; ++j) {
      const T p = pv.values[r * k + j];
      if (p > T(0)) h -= p * std::log(p);
    }
    out.values[r] = h;
  }
  const int pid = probs.id;
  return probs.tape->push("entropy", std::move(out), {pid}, [=](Tape<T>& t, int self) {
    const auto& p = t.value(pid).values;
    const auto& g = t.grad(self).values;
    auto& d = t.grad(pid).values;
    // Zero-probability entries get a zero subgradient.
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t j = 0; j < k; ++j) {
        const T pj = p[r * k + j];
        if (pj > T(0)) d[r * k + j] -= g[r] * (std::log(pj) + T(1));
      }
  });
}

template <class T>
Var<T> entropy_from_logits(Var<T> logits) {
  const Tensor<T>& xv = logits.value();
  const std::size_t k = last_dim(xv, "entropy_from_logits");
  const std::size_t rows = xv.numel() / k;
  Shape shape(xv.shape.begin(), xv.shape.end() - 1);
  if (shape.empty()) shape = {1};
  Tensor<T> out(shape);
  auto logp = std::make_shared<std::vector<T>>(xv.numel());
  for (std::size_t r = 0; r < rows; ++r) {
    const T* src = xv.data() + r * k;
    T* lp = logp->data() + r * k;
    const T mx = *std::max_element(src, src + k);
    T z = T(0);
    for (std::size_t j = 0; j < k; ++j) z += std::exp(src[j] - mx);
    const T lse = mx + std::log(z);
    T h = T(0);
    for (std::size_t j = 0; j < k; ++j) {
      lp[j] = src[j] - lse;
      h -= std::exp(lp[j]) * lp[j];
    }
    out.values[r] = h;
  }
  const int xid = logits.id;
  return logits.tape->push("entropy_from_logits", std::move(out), {xid}, [=](Tape<T>& t, int self) {
    const auto& hv = t.value(self).values;
    const auto& g = t.grad(self).values;
    auto& d = t.grad(xid).values;
    // dH/dx_j = -p_j (log p_j + H)
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t j = 0; j < k; ++j) {
        const T lpj = (*logp)[r * k + j];
        d[r * k + j] -= g[r] * std::exp(lpj) * (lpj + hv[r]);
      }
  });
}

template <class T>
Var<T> gather_last(Var<T> x, std::span<const int> index) {
  const Tensor<T>& xv = x.value();
  const std::size_t k = last_dim(xv, "gather_last");
  const std::size_t rows = xv.numel() / k;
  require(index.size() == rows, "gather_last", "index count does not match row count");
  Shape shape(xv.shape.begin(), xv.shape.end() - 1);
  if (shape.empty()) shape = {1};
  Tensor<T> out(shape);
  std::vector<int> idx(index.begin(), index.end());
  for (std::size_t r = 0; r < rows; ++r) {
    require(idx[r] >= 0 && static_cast<std::size_t>(idx[r]) < k, "gather_last", "index out of range");
    out.values[r] = xv.values[r * k + static_cast<std::size_t>(idx[r])];
  }
  const int xid = x.id;
  return x.tape->push("gather_last", std::move(out), {xid}, [=, idx = std::move(idx)](Tape<T>& t, int self) {
    const auto& g = t.grad(self).values;
    auto& d = t.grad(xid).values;
    for (std::size_t r = 0; r < rows; ++r) d[r * k + static_cast<std::size_t>(idx[r])] += g[r];
  });
}

template <class T>
Var<T> reshape(Var<T> x, Shape shape) {
  require(shape_numel(shape) == x.value().numel(), "reshape",
          shape_string(x.shape()) + " -> " + shape_string(shape));
  Tensor<T> out(std::move(shape), x.value().values);
  const int xid = x.id;
  return x.tape->push("reshape", std::move(out), {xid}, [=](Tape<T>& t, int self) {
    const auto& g = t.grad(self).values;
    auto& d = t.grad(xid).values;
    for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i];
  });
}

template <class T>
Var<T> embedding_nchw(Var<T> table, std::span<const std::int32_t> index, int n, int h, int w) {
  static constexpr const char* op = "embedding_nchw";
  const Tensor<T>& tv = table.value();
  require(tv.rank() == 2, op, "table must be [V,E]");
  const int vocab = tv.dim(0), e = tv.dim(1);
  const std::size_t plane = static_cast<std::size_t>(h * w);
  require(index.size() == static_cast<std::size_t>(n) * plane, op, "index count does not match [N,H,W]");
  std::vector<std::int32_t> idx(index.begin(), index.end());
  for (auto v : idx) require(v >= 0 && v < vocab, op, "index " + std::to_string(v) + " out of vocabulary");
  Tensor<T> out({n, e, h, w});
  for (int ni = 0; ni < n; ++ni)
    for (std::size_t p = 0; p < plane; ++p) {
      const std::size_t row = static_cast<std::size_t>(idx[static_cast<std::size_t>(ni) * plane + p]);
      for (int ei = 0; ei < e; ++ei)
        out.values[(static_cast<std::size_t>(ni) * e + ei) * plane + p] = tv.values[row * e + ei];
    }
  const int tid = table.id;
  return table.tape->push(op, std::move(out), {tid}, [=, idx = std::move(idx)](Tape<T>& t, int self) {
    const auto& g = t.grad(self).values;
    auto& d = t.grad(tid).values;
    for (int ni = 0; ni < n; ++ni)
      for (std::size_t p = 0; p < plane; ++p) {
        const std::size_t row = static_cast<std::size_t>(idx[static_cast<std::size_t>(ni) * plane + p]);
        for (int ei = 0; ei < e; ++ei) d[row * e + ei] += g[(static_cast<std::size_t>(ni) * e + ei) * plane + p];
      }
  });
}

template <class T>
Var<T> concat_channels(const std::vector<Var<T>>& parts) {
  static constexpr const char* op = "concat_channels";
  require(!parts.empty(), op, "nothing to concatenate");
  const Shape& s0 = parts[0].shape();
  require(s0.size() == 4, op, "parts must be [N,C,H,W]");
  const int n = s0[0], h = s0[2], w = s0[3];
  int total = 0;
  std::vector<int> ids, chans;
  for (const auto& p : parts) {
    require(p.tape == parts[0].tape, op, "parts recorded on different tapes");
    const Shape& s = p.shape();
    require(s.size() == 4 && s[0] == n && s[2] == h && s[3] == w, op, "mismatched part " + shape_string(s));
    ids.push_back(p.id);
    chans.push_back(s[1]);
    total += s[1];
  }
  const std::size_t plane = static_cast<std::size_t>(h * w);
  Tensor<T> out({n, total, h, w});
  for (int ni = 0; ni < n; ++ni) {
    int off = 0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      const T* src = parts[i].value().data() + static_cast<std::size_t>(ni) * chans[i] * plane;
      std::copy(src, src + chans[i] * plane, out.data() + (static_cast<std::size_t>(ni) * total + off) * plane);
      off += chans[i];
    }
  }
  return parts[0].tape->push(op, std::move(out), ids, [=](Tape<T>& t, int self) {
    const auto& g = t.grad(self).values;
    for (int ni = 0; ni < n; ++ni) {
      int off = 0;
      for (std::size_t i = 0; i < ids.size(); ++i) {
        if (t.needs_grad(ids[i])) {
          auto& d = t.grad(ids[i]).values;
          const std::size_t len = static_cast<std::size_t>(chans[i]) * plane;
          const std::size_t src = (static_cast<std::size_t>(ni) * total + off) * plane;
          const std::size_t dst = static_cast<std::size_t>(ni) * chans[i] * plane;
          for (std::size_t j = 0; j < len; ++j) d[dst + j] += g[src + j];
        }
        off += chans[i];
      }
    }
  });
}

#define AMIGO_INSTANTIATE_OPS(T)                                                           \
  template Var<T> conv2d_same<T>(Var<T>, Var<T>, Var<T>);                                  \
  template Var<T> linear<T>(Var<T>, Var<T>, Var<T>);                                       \
  template Var<T> elu<T>(Var<T>);                                                          \
  template Var<T> relu<T>(Var<T>);                                                         \
  template Var<T> exp<T>(Var<T>);                                                          \
  template Var<T> add<T>(Var<T>, Var<T>);                                                  \
  template Var<T> sub<T>(Var<T>, Var<T>);                                                  \
  template Var<T> mul<T>(Var<T>, Var<T>);                                                  \
  template Var<T> scale<T>(Var<T>, T);                                                     \
  template Var<T> square<T>(Var<T>);                                                       \
  template Var<T> sum<T>(Var<T>);                                                          \
  template Var<T> mean<T>(Var<T>);                                                         \
  template Var<T> sum_last<T>(Var<T>);                                                     \
  template Var<T> weighted_sum<T>(Var<T>, std::span<const T>);                             \
  template Var<T> softmax<T>(Var<T>);                                                      \
  template Var<T> log_softmax<T>(Var<T>);                                                  \
  template Var<T> entropy<T>(Var<T>);                                                      \
  template Var<T> entropy_from_logits<T>(Var<T>);                                          \
  template Var<T> gather_last<T>(Var<T>, std::span<const int>);                            \
  template Var<T> reshape<T>(Var<T>, Shape);                                               \
  template Var<T> embedding_nchw<T>(Var<T>, std::span<const std::int32_t>, int, int, int); \
  template Var<T> concat_channels<T>(const std::vector<Var<T>>&);

AMIGO_INSTANTIATE_OPS(float)
AMIGO_INSTANTIATE_OPS(double)

}  // namespace amigo::nn

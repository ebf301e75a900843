#include "amigo/nn/rmsprop.hpp"

#include <cmath>

namespace amigo::nn {

template <class T>
void rmsprop_step(ParamSet<T>& params, const RmsPropOptions& opt) {
  if (!(opt.lr > 0.0)) throw Error("rmsprop: learning rate must be positive");
  const T alpha = static_cast<T>(opt.alpha);
  const T lr = static_cast<T>(opt.lr);
  const T eps = static_cast<T>(opt.eps);
  const T mom = static_cast<T>(opt.momentum);
  for (auto& p : params) {
    auto& v = p.sq_avg.values;
    auto& w = p.value.values;
    const auto& g = p.grad.values;
    auto& buf = p.momentum_buf.values;
    for (std::size_t i = 0; i < w.size(); ++i) {
      v[i] = alpha * v[i] + (T(1) - alpha) * g[i] * g[i];
      const T step = g[i] / (std::sqrt(v[i]) + eps);
      if (mom > T(0)) {
        buf[i] = mom * buf[i] + step;
        w[i] -= lr * buf[i];
      } else {
        w[i] -= lr * step;
      }
    }
  }
}

template void rmsprop_step<float>(ParamSet<float>&, const RmsPropOptions&);
template void rmsprop_step<double>(ParamSet<double>&, const RmsPropOptions&);

}  // namespace amigo::nn

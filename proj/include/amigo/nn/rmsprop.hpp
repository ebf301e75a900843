#pragma once

#include "amigo/nn/tape.hpp"

namespace amigo::nn {

struct RmsPropOptions {
  double lr = 1e-3;
  double alpha = 0.99;  // second-moment decay
  double eps = 0.01;
  double momentum = 0.0;
};

/// One RMSProp step using the gradients stored in `params`:
///   v <- alpha v + (1 - alpha) g^2
///   p <- p - lr g / (sqrt(v) + eps)
/// With momentum m > 0 the update direction is accumulated as b <- m b + g / (sqrt(v) + eps).
template <class T>
void rmsprop_step(ParamSet<T>& params, const RmsPropOptions& opt);

extern template void rmsprop_step<float>(ParamSet<float>&, const RmsPropOptions&);
extern template void rmsprop_step<double>(ParamSet<double>&, const RmsPropOptions&);

}  // namespace amigo::nn

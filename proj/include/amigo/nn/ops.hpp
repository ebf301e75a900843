#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "amigo/nn/tape.hpp"

namespace amigo::nn {

// Differentiable operations. Every op checks shapes (ShapeError) and that its
// output is finite (NumericError).

/// 2-D convolution, stride 1, zero padding (k-1)/2. x: [N,C,H,W], w: [O,C,k,k], b: [O].
template <class T>
Var<T> conv2d_same(Var<T> x, Var<T> w, Var<T> b);

/// x: [N,I], w: [O,I], b: [O] -> [N,O].
template <class T>
Var<T> linear(Var<T> x, Var<T> w, Var<T> b);

template <class T>
Var<T> elu(Var<T> x);
template <class T>
Var<T> relu(Var<T> x);
template <class T>
Var<T> exp(Var<T> x);

template <class T>
Var<T> add(Var<T> a, Var<T> b);
template <class T>
Var<T> sub(Var<T> a, Var<T> b);
template <class T>
Var<T> mul(Var<T> a, Var<T> b);
template <class T>
Var<T> scale(Var<T> a, T s);
template <class T>
Var<T> square(Var<T> a);

/// Sum of all elements -> shape [1].
template <class T>
Var<T> sum(Var<T> a);
template <class T>
Var<T> mean(Var<T> a);
/// Sum over the last axis.
template <class T>
Var<T> sum_last(Var<T> a);
/// Sum of a_i * w_i with constant weights -> shape [1].
template <class T>
Var<T> weighted_sum(Var<T> a, std::span<const T> weights);

// The following act on the last axis.
template <class T>
Var<T> softmax(Var<T> x);
template <class T>
Var<T> log_softmax(Var<T> x);
/// -sum p log p of a probability tensor, with 0 log 0 = 0.
template <class T>
Var<T> entropy(Var<T> probs);
/// Entropy of softmax(logits), computed stably from the logits.
template <class T>
Var<T> entropy_from_logits(Var<T> logits);
/// out[r] = x[r, index[r]].
template <class T>
Var<T> gather_last(Var<T> x, std::span<const int> index);

template <class T>
Var<T> reshape(Var<T> x, Shape shape);

/// Looks up rows of table [V,E] for indices laid out [N,H,W]; returns [N,E,H,W].
template <class T>
Var<T> embedding_nchw(Var<T> table, std::span<const std::int32_t> index, int n, int h, int w);

/// Concatenates [N,Ci,H,W] tensors along the channel axis.
template <class T>
Var<T> concat_channels(const std::vector<Var<T>>& parts);

}  // namespace amigo::nn

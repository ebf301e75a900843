#pragma once

#include <deque>
#include <functional>
#include <string>
#include <vector>

#include "amigo/nn/tensor.hpp"

namespace amigo::nn {

template <class T>
class Tape;

/// Handle to a value recorded on a tape.
template <class T>
struct Var {
  Tape<T>* tape = nullptr;
  int id = -1;

  const Tensor<T>& value() const { return tape->value(id); }
  const Shape& shape() const { return value().shape; }
};

/// A trainable tensor with its gradient and RMSProp optimizer slots.
template <class T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;
  Tensor<T> sq_avg;
  Tensor<T> momentum_buf;
};

/// Named parameters in insertion order.
template <class T>
class ParamSet {
 public:
  int add(std::string name, Tensor<T> value);
  Parameter<T>& operator[](int i) { return params_[static_cast<std::size_t>(i)]; }
  const Parameter<T>& operator[](int i) const { return params_[static_cast<std::size_t>(i)]; }
  Parameter<T>* find(std::string_view name);
  const Parameter<T>* find(std::string_view name) const;
  int size() const { return static_cast<int>(params_.size()); }
  std::size_t total_count() const;

  void zero_grad();
  double grad_norm() const;
  /// Scales gradients so their global norm is at most max_norm. Returns the norm before clipping.
  double clip_grad_norm(double max_norm);

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  template <class U>
  ParamSet<U> cast() const {
    ParamSet<U> out;
    for (const auto& p : params_) out.add(p.name, p.value.template cast<U>());
    return out;
  }

 private:
  std::vector<Parameter<T>> params_;
};

/// Records operations for reverse-mode differentiation.
///
/// Nodes are appended in evaluation order, so a reverse sweep is a valid
/// topological order. With recording disabled the tape only holds forward
/// values, which is what rollout workers use.
template <class T>
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, int)>;

  explicit Tape(bool record = true) : record_(record) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return record_; }
  int size() const { return static_cast<int>(nodes_.size()); }

  Var<T> constant(Tensor<T> value);
  /// Binds a parameter without copying; gradients flow into its grad slot.
  Var<T> param(Parameter<T>& p);
  /// Binds an external tensor. `grad_sink` may be null for a constant.
  Var<T> external(const Tensor<T>& value, Tensor<T>* grad_sink);

  const Tensor<T>& value(int id) const;
  bool needs_grad(int id) const { return node(id).needs_grad; }
  /// Gradient accumulator of a node, allocated on first use.
  Tensor<T>& grad(int id);
  bool has_grad(int id) const { return node(id).has_grad; }

  /// Appends a computed node. `op` names the operation for diagnostics.
  Var<T> push(const char* op, Tensor<T> value, std::initializer_list<int> parents, BackwardFn fn) {
    return push(op, std::move(value), std::vector<int>(parents), std::move(fn));
  }
  Var<T> push(const char* op, Tensor<T> value, const std::vector<int>& parents, BackwardFn fn);

  /// Reverse sweep from a scalar loss.
  void backward(Var<T> loss);

 private:
  struct Node {
    Tensor<T> own;
    const Tensor<T>* ext = nullptr;
    Tensor<T> grad;
    Tensor<T>* sink = nullptr;
    BackwardFn fn;
    bool has_grad = false;
    bool needs_grad = false;
  };

  Node& node(int id) { return nodes_[static_cast<std::size_t>(id)]; }
  const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }

  bool record_;
  std::deque<Node> nodes_;
};

extern template class ParamSet<float>;
extern template class ParamSet<double>;
extern template class Tape<float>;
extern template class Tape<double>;

}  // namespace amigo::nn

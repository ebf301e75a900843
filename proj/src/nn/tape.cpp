#include "amigo/nn/tape.hpp"

#include <cmath>
#include <sstream>

namespace amigo::nn {

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

template <class T>
int ParamSet<T>::add(std::string name, Tensor<T> value) {
  if (find(name) != nullptr) throw Error("duplicate parameter name " + name);
  Parameter<T> p;
  p.name = std::move(name);
  p.grad = Tensor<T>(value.shape);
  p.sq_avg = Tensor<T>(value.shape);
  p.momentum_buf = Tensor<T>(value.shape);
  p.value = std::move(value);
  p.value.requires_grad = true;
  params_.push_back(std::move(p));
  return size() - 1;
}

template <class T>
Parameter<T>* ParamSet<T>::find(std::string_view name) {
  for (auto& p : params_)
    if (p.name == name) return &p;
  return nullptr;
}

template <class T>
const Parameter<T>* ParamSet<T>::find(std::string_view name) const {
  for (const auto& p : params_)
    if (p.name == name) return &p;
  return nullptr;
}

template <class T>
std::size_t ParamSet<T>::total_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.numel();
  return n;
}

template <class T>
void ParamSet<T>::zero_grad() {
  for (auto& p : params_) p.grad.fill(T(0));
}

template <class T>
double ParamSet<T>::grad_norm() const {
  double s = 0.0;
  for (const auto& p : params_)
    for (T g : p.grad.values) s += static_cast<double>(g) * static_cast<double>(g);
  return std::sqrt(s);
}

template <class T>
double ParamSet<T>::clip_grad_norm(double max_norm) {
  const double norm = grad_norm();
  if (norm > max_norm && norm > 0.0) {
    const T factor = static_cast<T>(max_norm / norm);
    for (auto& p : params_)
      for (T& g : p.grad.values) g *= factor;
  }
  return norm;
}

template <class T>
Var<T> Tape<T>::constant(Tensor<T> value) {
  Node n;
  n.own = std::move(value);
  nodes_.push_back(std::move(n));
  return {this, size() - 1};
}

template <class T>
Var<T> Tape<T>::param(Parameter<T>& p) {
  return external(p.value, &p.grad);
}

template <class T>
Var<T> Tape<T>::external(const Tensor<T>& value, Tensor<T>* grad_sink) {
  Node n;
  n.ext = &value;
  if (record_ && grad_sink != nullptr) {
    n.sink = grad_sink;
    n.needs_grad = true;
  }
  nodes_.push_back(std::move(n));
  return {this, size() - 1};
}

template <class T>
const Tensor<T>& Tape<T>::value(int id) const {
  const Node& n = node(id);
  return n.ext != nullptr ? *n.ext : n.own;
}

template <class T>
Tensor<T>& Tape<T>::grad(int id) {
  Node& n = node(id);
  if (!n.has_grad) {
    n.grad = Tensor<T>(value(id).shape);
    n.has_grad = true;
  }
  return n.grad;
}

template <class T>
Var<T> Tape<T>::push(const char* op, Tensor<T> value, const std::vector<int>& parents, BackwardFn fn) {
  if (!value.all_finite()) throw NumericError(std::string("non-finite value produced by ") + op);
  Node n;
  n.own = std::move(value);
  if (record_) {
    for (int p : parents) n.needs_grad = n.needs_grad || node(p).needs_grad;
    if (n.needs_grad) n.fn = std::move(fn);
  }
  nodes_.push_back(std::move(n));
  return {this, size() - 1};
}

template <class T>
void Tape<T>::backward(Var<T> loss) {
  if (loss.tape != this) throw Error("backward: loss recorded on another tape");
  if (value(loss.id).numel() != 1) throw ShapeError("backward: non-scalar loss of shape " + shape_string(value(loss.id).shape));
  if (!record_) throw Error("backward: tape was not recording");
  grad(loss.id).values[0] = T(1);
  for (int id = loss.id; id >= 0; --id) {
    Node& n = node(id);
    if (!n.has_grad) continue;
    if (n.fn) n.fn(*this, id);
    if (n.sink != nullptr) {
      auto& dst = n.sink->values;
      const auto& src = n.grad.values;
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    }
  }
}

template class ParamSet<float>;
template class ParamSet<double>;
template class Tape<float>;
template class Tape<double>;

}  // namespace amigo::nn

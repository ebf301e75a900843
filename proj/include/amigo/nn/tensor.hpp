#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <new>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "amigo/errors.hpp"

namespace amigo::nn {

using Shape = std::vector<int>;

inline std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         [](std::size_t a, int d) { return a * static_cast<std::size_t>(d); });
}

std::string shape_string(const Shape& shape);

// Vectorized kernels pick their loop peeling from the buffer address; a fixed
// alignment keeps floating point results identical from run to run.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};
  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) {}
  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlign)); }
  void deallocate(T* p, std::size_t) { ::operator delete(p, kAlign); }
  template <class U>
  bool operator==(const AlignedAllocator<U>&) const { return true; }
};

template <class T>
using Buffer = std::vector<T, AlignedAllocator<T>>;

/// Dense row-major array.
template <class T>
struct Tensor {
  Shape shape;
  Buffer<T> values;
  bool requires_grad = false;

  Tensor() = default;
  explicit Tensor(Shape s, T fill = T(0)) : shape(std::move(s)), values(shape_numel(shape), fill) {}
  Tensor(Shape s, Buffer<T> v) : shape(std::move(s)), values(std::move(v)) {
    if (values.size() != shape_numel(shape)) throw ShapeError("tensor value count does not match shape " + shape_string(shape));
  }
  Tensor(Shape s, const std::vector<T>& v) : shape(std::move(s)), values(v.begin(), v.end()) {
    if (values.size() != shape_numel(shape)) throw ShapeError("tensor value count does not match shape " + shape_string(shape));
  }

  std::size_t numel() const { return values.size(); }
  int rank() const { return static_cast<int>(shape.size()); }
  int dim(int i) const { return shape[static_cast<std::size_t>(i < 0 ? rank() + i : i)]; }
  T* data() { return values.data(); }
  const T* data() const { return values.data(); }
  std::span<T> span() { return values; }
  std::span<const T> span() const { return values; }
  T item() const {
    if (numel() != 1) throw ShapeError("item() on tensor of shape " + shape_string(shape));
    return values[0];
  }

  bool all_finite() const {
    for (T v : values)
      if (!std::isfinite(v)) return false;
    return true;
  }

  void fill(T v) { std::fill(values.begin(), values.end(), v); }

  template <class U>
  Tensor<U> cast() const {
    Tensor<U> out;
    out.shape = shape;
    out.values.assign(values.begin(), values.end());
    out.requires_grad = requires_grad;
    return out;
  }
};

}  // namespace amigo::nn

#pragma once

// Shared per-element arithmetic for both kernel backends. Keeping the scalar
// bodies in one place guarantees the serial and parallel backends perform the
// same operations in the same order for every output element.

#include <cmath>

#include "gridrl/kernels.hpp"

namespace gridrl::kernels::detail {

// Eight independent accumulators; fixed combine order, SIMD-friendly.
template <typename T>
inline T dot(const T* a, const T* b, int n) {
  T s0{}, s1{}, s2{}, s3{}, s4{}, s5{}, s6{}, s7{};
  int i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
    s4 += a[i + 4] * b[i + 4];
    s5 += a[i + 5] * b[i + 5];
    s6 += a[i + 6] * b[i + 6];
    s7 += a[i + 7] * b[i + 7];
  }
  T tail{};
  for (; i < n; ++i) tail += a[i] * b[i];
  return ((s0 + s1) + (s2 + s3)) + ((s4 + s5) + (s6 + s7)) + tail;
}

template <typename T>
inline void axpy(T* y, T a, const T* x, int n) {
  for (int i = 0; i < n; ++i) y[i] += a * x[i];
}

template <typename T>
inline T apply_activation(Activation act, T z) {
  switch (act) {
    case Activation::identity:
      return z;
    case Activation::tanh:
      return std::tanh(z);
    case Activation::relu:
      return z > T(0) ? z : T(0);
  }
  return z;
}

// Derivative through the post-activation value y = act(z).
template <typename T>
inline T activation_grad(Activation act, T y) {
  switch (act) {
    case Activation::identity:
      return T(1);
    case Activation::tanh:
      return T(1) - y * y;
    case Activation::relu:
      return y > T(0) ? T(1) : T(0);
  }
  return T(1);
}

template <typename T>
inline void adam_element(T& p, T g, T& m, T& v, T lr, T beta1, T beta2, T eps,
                         T inv_bc1, T inv_bc2) {
  m = beta1 * m + (T(1) - beta1) * g;
  v = beta2 * v + (T(1) - beta2) * g * g;
  const T mhat = m * inv_bc1;
  const T vhat = v * inv_bc2;
  p -= lr * mhat / (std::sqrt(vhat) + eps);
}

// Work threshold below which spawning a parallel region is not worth it.
constexpr long kParallelGrain = 1 << 16;

}  // namespace gridrl::kernels::detail

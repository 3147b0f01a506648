// OpenMP backend. Each output element is produced by exactly one thread with
// the same inner summation order as the serial reference, so results are
// bitwise identical for any thread count. Falls back to the reference loops
// when compiled without OpenMP.

#include <cmath>
#include <cstring>

#include "gridrl/kernels.hpp"
#include "kernels_detail.hpp"

namespace gridrl::kernels::par {

using detail::kParallelGrain;

template <typename T>
void linear_forward(const T* w, const T* bias, const T* x, T* y, int batch,
                    int in, int out) {
  const long work = static_cast<long>(batch) * in * out;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (work >= kParallelGrain)
#endif
  for (int b = 0; b < batch; ++b) {
    const T* xb = x + static_cast<std::size_t>(b) * in;
    T* yb = y + static_cast<std::size_t>(b) * out;
    for (int o = 0; o < out; ++o) {
      yb[o] = bias[o] + detail::dot(w + static_cast<std::size_t>(o) * in, xb, in);
    }
  }
  (void)work;
}

template <typename T>
void linear_backward(const T* w, const T* x, const T* dy, T* dx, T* dw, T* db,
                     int batch, int in, int out) {
  const long work = static_cast<long>(batch) * in * out;
  if (dx != nullptr) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (work >= kParallelGrain)
#endif
    for (int b = 0; b < batch; ++b) {
      T* dxb = dx + static_cast<std::size_t>(b) * in;
      std::memset(dxb, 0, sizeof(T) * in);
      const T* dyb = dy + static_cast<std::size_t>(b) * out;
      for (int o = 0; o < out; ++o) {
        detail::axpy(dxb, dyb[o], w + static_cast<std::size_t>(o) * in, in);
      }
    }
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (work >= kParallelGrain)
#endif
  for (int o = 0; o < out; ++o) {
    T* dwo = dw + static_cast<std::size_t>(o) * in;
    for (int b = 0; b < batch; ++b) {
      detail::axpy(dwo, dy[static_cast<std::size_t>(b) * out + o],
                   x + static_cast<std::size_t>(b) * in, in);
    }
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (static_cast<long>(batch) * out >= kParallelGrain)
#endif
  for (int o = 0; o < out; ++o) {
    T s{};
    for (int b = 0; b < batch; ++b) s += dy[static_cast<std::size_t>(b) * out + o];
    db[o] += s;
  }
  (void)work;
}

template <typename T>
void activation_forward(Activation act, T* y, std::size_t n) {
  if (act == Activation::identity) return;
  const long ln = static_cast<long>(n);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (ln >= kParallelGrain)
#endif
  for (long i = 0; i < ln; ++i) y[i] = detail::apply_activation(act, y[i]);
}

template <typename T>
void activation_backward(Activation act, const T* y, T* dy, std::size_t n) {
  if (act == Activation::identity) return;
  const long ln = static_cast<long>(n);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (ln >= kParallelGrain)
#endif
  for (long i = 0; i < ln; ++i) dy[i] *= detail::activation_grad(act, y[i]);
}

template <typename T>
void adam_step(T* p, const T* g, T* m, T* v, std::size_t n, T lr, T beta1,
               T beta2, T eps, long t) {
  const T inv_bc1 = T(1) / (T(1) - std::pow(beta1, static_cast<T>(t)));
  const T inv_bc2 = T(1) / (T(1) - std::pow(beta2, static_cast<T>(t)));
  const long ln = static_cast<long>(n);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (ln >= kParallelGrain)
#endif
  for (long i = 0; i < ln; ++i) {
    detail::adam_element(p[i], g[i], m[i], v[i], lr, beta1, beta2, eps, inv_bc1,
                         inv_bc2);
  }
}

template void linear_forward<float>(const float*, const float*, const float*,
                                    float*, int, int, int);
template void linear_forward<double>(const double*, const double*,
                                     const double*, double*, int, int, int);
template void linear_backward<float>(const float*, const float*, const float*,
                                     float*, float*, float*, int, int, int);
template void linear_backward<double>(const double*, const double*,
                                      const double*, double*, double*, double*,
                                      int, int, int);
template void activation_forward<float>(Activation, float*, std::size_t);
template void activation_forward<double>(Activation, double*, std::size_t);
template void activation_backward<float>(Activation, const float*, float*,
                                         std::size_t);
template void activation_backward<double>(Activation, const double*, double*,
                                          std::size_t);
template void adam_step<float>(float*, const float*, float*, float*,
                               std::size_t, float, float, float, float, long);
template void adam_step<double>(double*, const double*, double*, double*,
                                std::size_t, double, double, double, double,
                                long);

}  // namespace gridrl::kernels::par

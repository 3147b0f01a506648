#include "gridrl/kernels.hpp"

#include <atomic>

namespace gridrl::kernels {

namespace {

std::atomic<Backend> g_backend{
#ifdef _OPENMP
    Backend::parallel
#else
    Backend::serial
#endif
};

}  // namespace

void set_backend(Backend b) { g_backend.store(b, std::memory_order_relaxed); }

Backend active_backend() { return g_backend.load(std::memory_order_relaxed); }

bool parallel_available() {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

template <typename T>
void linear_forward(const T* w, const T* bias, const T* x, T* y, int batch,
                    int in, int out) {
  if (active_backend() == Backend::parallel) {
    par::linear_forward(w, bias, x, y, batch, in, out);
  } else {
    serial::linear_forward(w, bias, x, y, batch, in, out);
  }
}

template <typename T>
void linear_backward(const T* w, const T* x, const T* dy, T* dx, T* dw, T* db,
                     int batch, int in, int out) {
  if (active_backend() == Backend::parallel) {
    par::linear_backward(w, x, dy, dx, dw, db, batch, in, out);
  } else {
    serial::linear_backward(w, x, dy, dx, dw, db, batch, in, out);
  }
}

template <typename T>
void activation_forward(Activation act, T* y, std::size_t n) {
  if (active_backend() == Backend::parallel) {
    par::activation_forward(act, y, n);
  } else {
    serial::activation_forward(act, y, n);
  }
}

template <typename T>
void activation_backward(Activation act, const T* y, T* dy, std::size_t n) {
  if (active_backend() == Backend::parallel) {
    par::activation_backward(act, y, dy, n);
  } else {
    serial::activation_backward(act, y, dy, n);
  }
}

template <typename T>
void adam_step(T* p, const T* g, T* m, T* v, std::size_t n, T lr, T beta1,
               T beta2, T eps, long t) {
  if (active_backend() == Backend::parallel) {
    par::adam_step(p, g, m, v, n, lr, beta1, beta2, eps, t);
  } else {
    serial::adam_step(p, g, m, v, n, lr, beta1, beta2, eps, t);
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

}  // namespace gridrl::kernels

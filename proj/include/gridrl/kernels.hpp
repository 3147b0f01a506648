#pragma once

#include <cstddef>

namespace gridrl::kernels {

// Two interchangeable kernel backends: a plain serial reference and an
// OpenMP-parallel variant. Both compute every output element with the same
// per-element summation order, so results are bitwise identical regardless of
// backend or thread count; the serial backend stays around as the reference
// the parallel one is tested against.
enum class Backend { serial, parallel };

void set_backend(Backend b);
Backend active_backend();
bool parallel_available();

enum class Activation { identity, tanh, relu };

// y[b,:] = W x[b,:] + bias, with W row-major [out][in].
template <typename T>
void linear_forward(const T* w, const T* bias, const T* x, T* y, int batch,
                    int in, int out);

// dw/db are accumulated into; dx (if non-null) is overwritten.
// dx[b,i] = sum_o dy[b,o] w[o,i]
// dw[o,i] += sum_b dy[b,o] x[b,i]
// db[o]  += sum_b dy[b,o]
template <typename T>
void linear_backward(const T* w, const T* x, const T* dy, T* dx, T* dw, T* db,
                     int batch, int in, int out);

template <typename T>
void activation_forward(Activation act, T* y, std::size_t n);

// dy *= act'(z), with the derivative expressed through post-activation values.
template <typename T>
void activation_backward(Activation act, const T* y, T* dy, std::size_t n);

// Bias-corrected Adam; t is the already-incremented step counter.
template <typename T>
void adam_step(T* p, const T* g, T* m, T* v, std::size_t n, T lr, T beta1,
               T beta2, T eps, long t);

namespace serial {
template <typename T>
void linear_forward(const T* w, const T* bias, const T* x, T* y, int batch,
                    int in, int out);
template <typename T>
void linear_backward(const T* w, const T* x, const T* dy, T* dx, T* dw, T* db,
                     int batch, int in, int out);
template <typename T>
void activation_forward(Activation act, T* y, std::size_t n);
template <typename T>
void activation_backward(Activation act, const T* y, T* dy, std::size_t n);
template <typename T>
void adam_step(T* p, const T* g, T* m, T* v, std::size_t n, T lr, T beta1,
               T beta2, T eps, long t);
}  // namespace serial

namespace par {
template <typename T>
void linear_forward(const T* w, const T* bias, const T* x, T* y, int batch,
                    int in, int out);
template <typename T>
void linear_backward(const T* w, const T* x, const T* dy, T* dx, T* dw, T* db,
                     int batch, int in, int out);
template <typename T>
void activation_forward(Activation act, T* y, std::size_t n);
template <typename T>
void activation_backward(Activation act, const T* y, T* dy, std::size_t n);
template <typename T>
void adam_step(T* p, const T* g, T* m, T* v, std::size_t n, T lr, T beta1,
               T beta2, T eps, long t);
}  // namespace par

}  // namespace gridrl::kernels

#include "gridrl/nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gridrl/rng.hpp"

namespace gridrl {

template <typename T>
void MlpGrads<T>::zero() {
  for (auto& l : layers) {
    std::fill(l.w.begin(), l.w.end(), T(0));
    std::fill(l.b.begin(), l.b.end(), T(0));
  }
}

template <typename T>
MlpGrads<T> make_grads(const Mlp<T>& net) {
  MlpGrads<T> g;
  g.layers.reserve(net.layers.size());
  for (const auto& l : net.layers) {
    g.layers.push_back({std::vector<T>(l.w.size(), T(0)),
                        std::vector<T>(l.b.size(), T(0))});
  }
  return g;
}

template <typename T>
Mlp<T> init_mlp(const std::vector<int>& sizes, Activation hidden,
                std::uint64_t seed) {
  if (sizes.size() < 2) throw std::invalid_argument("init_mlp: need at least 2 layer sizes");
  for (int s : sizes) {
    if (s <= 0) throw std::invalid_argument("init_mlp: layer sizes must be positive");
  }
  Rng rng(seed);
  Mlp<T> net;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    typename Mlp<T>::Layer layer;
    layer.in = sizes[l];
    layer.out = sizes[l + 1];
    layer.act = (l + 2 < sizes.size()) ? hidden : Activation::identity;
    layer.w.resize(static_cast<std::size_t>(layer.in) * layer.out);
    layer.b.assign(layer.out, T(0));
    const float bound = std::sqrt(6.0f / static_cast<float>(layer.in + layer.out));
    for (auto& w : layer.w) w = static_cast<T>(rng.uniform_range(-bound, bound));
    net.layers.push_back(std::move(layer));
  }
  return net;
}

template <typename T>
void forward(const Mlp<T>& net, const T* x, int batch, Tape<T>& tape) {
  if (net.layers.empty()) throw std::invalid_argument("forward: empty network");
  tape.batch = batch;
  tape.act.resize(net.layers.size() + 1);
  tape.act[0].assign(x, x + static_cast<std::size_t>(batch) * net.input_dim());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    auto& out = tape.act[l + 1];
    out.resize(static_cast<std::size_t>(batch) * layer.out);
    kernels::linear_forward(layer.w.data(), layer.b.data(), tape.act[l].data(),
                            out.data(), batch, layer.in, layer.out);
    kernels::activation_forward(layer.act, out.data(), out.size());
  }
}

template <typename T>
std::vector<T> forward(const Mlp<T>& net, std::span<const T> x) {
  if (static_cast<int>(x.size()) != net.input_dim()) {
    throw std::invalid_argument("forward: input size mismatch");
  }
  std::vector<T> cur(x.begin(), x.end());
  std::vector<T> next;
  for (const auto& layer : net.layers) {
    next.resize(layer.out);
    kernels::linear_forward(layer.w.data(), layer.b.data(), cur.data(),
                            next.data(), 1, layer.in, layer.out);
    kernels::activation_forward(layer.act, next.data(), next.size());
    cur.swap(next);
  }
  return cur;
}

template <typename T>
void backward(const Mlp<T>& net, const Tape<T>& tape, const T* dy,
              MlpGrads<T>& grads) {
  if (grads.layers.size() != net.layers.size()) {
    throw std::invalid_argument("backward: gradient shape mismatch");
  }
  if (tape.act.size() != net.layers.size() + 1) {
    throw std::invalid_argument("backward: tape does not match network");
  }
  const int batch = tape.batch;
  std::vector<T> cur(dy, dy + static_cast<std::size_t>(batch) * net.output_dim());
  std::vector<T> prev;
  for (int l = static_cast<int>(net.layers.size()) - 1; l >= 0; --l) {
    const auto& layer = net.layers[l];
    kernels::activation_backward(layer.act, tape.act[l + 1].data(), cur.data(),
                                 cur.size());
    T* dx = nullptr;
    if (l > 0) {
      prev.assign(static_cast<std::size_t>(batch) * layer.in, T(0));
      dx = prev.data();
    }
    kernels::linear_backward(layer.w.data(), tape.act[l].data(), cur.data(), dx,
                             grads.layers[l].w.data(), grads.layers[l].b.data(),
                             batch, layer.in, layer.out);
    if (l > 0) cur.swap(prev);
  }
}

template <typename T>
AdamState<T> make_adam(const Mlp<T>& net, T lr) {
  AdamState<T> st;
  st.m = make_grads(net);
  st.v = make_grads(net);
  st.lr = lr;
  return st;
}

template <typename T>
void adam_step(Mlp<T>& net, const MlpGrads<T>& grads, AdamState<T>& state) {
  for (const auto& l : grads.layers) {
    for (T g : l.w) {
      if (!std::isfinite(g)) throw std::runtime_error("adam_step: non-finite gradient");
    }
    for (T g : l.b) {
      if (!std::isfinite(g)) throw std::runtime_error("adam_step: non-finite gradient");
    }
  }
  ++state.t;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    auto& layer = net.layers[l];
    kernels::adam_step(layer.w.data(), grads.layers[l].w.data(),
                       state.m.layers[l].w.data(), state.v.layers[l].w.data(),
                       layer.w.size(), state.lr, state.beta1, state.beta2,
                       state.eps, state.t);
    kernels::adam_step(layer.b.data(), grads.layers[l].b.data(),
                       state.m.layers[l].b.data(), state.v.layers[l].b.data(),
                       layer.b.size(), state.lr, state.beta1, state.beta2,
                       state.eps, state.t);
  }
}

template <typename T>
void log_softmax(std::span<const T> logits, std::span<T> out) {
  if (logits.size() != out.size()) {
    throw std::invalid_argument("log_softmax: size mismatch");
  }
  T mx = logits[0];
  for (T v : logits) mx = std::max(mx, v);
  T sum = T(0);
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = logits[i] - mx;
    sum += std::exp(out[i]);
  }
  const T log_sum = std::log(sum);
  for (auto& v : out) v -= log_sum;
}

template <typename T>
T categorical_entropy(std::span<const T> probs) {
  T h = T(0);
  for (T p : probs) {
    if (p > T(0)) h -= p * std::log(p);
  }
  return h;
}

template <typename T>
T sigmoid_clamped(T x) {
  const T s = T(1) / (T(1) + std::exp(-x));
  return std::clamp(s, T(1e-7), T(1) - T(1e-7));
}

template <typename T>
std::pair<T, T> bce_loss(T prediction, T label) {
  const T p = std::clamp(prediction, T(1e-7), T(1) - T(1e-7));
  const T loss = -label * std::log(p) - (T(1) - label) * std::log(T(1) - p);
  const T dloss = (p - label) / (p * (T(1) - p));
  return {loss, dloss};
}

#define GRIDRL_INSTANTIATE_NN(T)                                            \
  template struct MlpGrads<T>;                                              \
  template MlpGrads<T> make_grads<T>(const Mlp<T>&);                        \
  template Mlp<T> init_mlp<T>(const std::vector<int>&, Activation,          \
                              std::uint64_t);                               \
  template void forward<T>(const Mlp<T>&, const T*, int, Tape<T>&);         \
  template std::vector<T> forward<T>(const Mlp<T>&, std::span<const T>);    \
  template void backward<T>(const Mlp<T>&, const Tape<T>&, const T*,        \
                            MlpGrads<T>&);                                  \
  template AdamState<T> make_adam<T>(const Mlp<T>&, T);                     \
  template void adam_step<T>(Mlp<T>&, const MlpGrads<T>&, AdamState<T>&);   \
  template void log_softmax<T>(std::span<const T>, std::span<T>);           \
  template T categorical_entropy<T>(std::span<const T>);                    \
  template T sigmoid_clamped<T>(T);                                         \
  template std::pair<T, T> bce_loss<T>(T, T);

GRIDRL_INSTANTIATE_NN(float)
GRIDRL_INSTANTIATE_NN(double)

#undef GRIDRL_INSTANTIATE_NN

}  // namespace gridrl

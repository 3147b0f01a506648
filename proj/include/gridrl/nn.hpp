#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "gridrl/kernels.hpp"

namespace gridrl {

using kernels::Activation;

// Dense feed-forward network. Weights are row-major [out][in].
template <typename T>
struct Mlp {
  struct Layer {
    int in = 0;
    int out = 0;
    Activation act = Activation::identity;
    std::vector<T> w;
    std::vector<T> b;
  };
  std::vector<Layer> layers;

  int input_dim() const { return layers.empty() ? 0 : layers.front().in; }
  int output_dim() const { return layers.empty() ? 0 : layers.back().out; }
  std::size_t param_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.w.size() + l.b.size();
    return n;
  }
};

// Shape-congruent gradient (and Adam moment) container.
template <typename T>
struct MlpGrads {
  struct Layer {
    std::vector<T> w;
    std::vector<T> b;
  };
  std::vector<Layer> layers;
  void zero();
};

template <typename T>
MlpGrads<T> make_grads(const Mlp<T>& net);

// Activation record from a forward pass: act[0] is the input batch,
// act[l + 1] the post-activation output of layer l.
template <typename T>
struct Tape {
  int batch = 0;
  std::vector<std::vector<T>> act;
};

// Uniform fan-in initialization: w ~ U(-a, a) with a = sqrt(6 / (in + out)),
// biases zero, hidden layers use `hidden`, the output layer is linear.
template <typename T>
Mlp<T> init_mlp(const std::vector<int>& sizes, Activation hidden,
                std::uint64_t seed);

template <typename T>
void forward(const Mlp<T>& net, const T* x, int batch, Tape<T>& tape);

template <typename T>
std::vector<T> forward(const Mlp<T>& net, std::span<const T> x);

// Accumulates exact reverse-mode gradients of sum_b <dy_b, out_b> into grads.
template <typename T>
void backward(const Mlp<T>& net, const Tape<T>& tape, const T* dy,
              MlpGrads<T>& grads);

template <typename T>
struct AdamState {
  MlpGrads<T> m, v;
  long t = 0;
  T lr = T(3e-4);
  T beta1 = T(0.9);
  T beta2 = T(0.999);
  T eps = T(1e-8);
};

template <typename T>
AdamState<T> make_adam(const Mlp<T>& net, T lr);

// Throws on non-finite gradient entries (divergence signal).
template <typename T>
void adam_step(Mlp<T>& net, const MlpGrads<T>& grads, AdamState<T>& state);

// Scalar heads.
template <typename T>
void log_softmax(std::span<const T> logits, std::span<T> out);

template <typename T>
T categorical_entropy(std::span<const T> probs);

// Sigmoid with output clamped to [1e-7, 1 - 1e-7].
template <typename T>
T sigmoid_clamped(T x);

// Binary cross-entropy on a clamped prediction; returns (loss, dloss/dpred).
template <typename T>
std::pair<T, T> bce_loss(T prediction, T label);

}  // namespace gridrl

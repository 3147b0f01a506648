#pragma once

#include <algorithm>
#include <cstdint>

#include "gridrl/a2c.hpp"
#include "gridrl/learner.hpp"

namespace gridrl {

// L_policy = -log_prob * (G - V)+ ;  L_value = 1/2 ((G - V)+)^2 ;
// combined = L_policy + beta * L_value.
template <typename T>
struct SilLosses {
  T policy;
  T value;
  T combined;
};

template <typename T>
SilLosses<T> sil_losses(T log_prob, T g, T v, T beta) {
  const T adv = std::max(g - v, T(0));
  const T policy = -log_prob * adv;
  const T value = T(0.5) * adv * adv;
  return {policy, value, policy + beta * value};
}

struct SilConfig {
  float beta = 0.01f;       // value-loss weight in the self-imitation losses
  int capacity = 50'000;    // stored (s, a, G) transitions
  int epochs = 4;           // self-imitation batches per A2C iteration
  int batch = 512;
};

// A2C plus self-imitation replay of past episodes, gated by (G - V)+.
class SilLearner : public Learner {
 public:
  SilLearner(int obs_dim, A2cConfig a2c_cfg, SilConfig sil_cfg,
             std::uint64_t seed);

  std::string algo() const override { return "sil"; }
  IterationStats train_iteration(std::vector<GridEnv>& envs,
                                 EpisodeLog& log) override;
  int greedy_action(std::span<const float> obs) const override;
  long metrics_interval_steps() const override;
  void save_state(CheckpointData& ckpt) const override;
  void load_state(const CheckpointData& ckpt, bool refine) override;

  // Exposed for tests.
  void add_entry(std::span<const float> obs, int action, float g);
  float sil_update_batch(std::span<const int> indices);  // returns mean loss
  void sil_update();  // cfg.epochs batches sampled uniformly
  long buffer_size() const { return size_; }
  A2cCore& core() { return core_; }
  const SilConfig& sil_config() const { return sil_cfg_; }

 private:
  void push_episode(const Episode& ep);

  int obs_dim_;
  A2cConfig a2c_cfg_;
  SilConfig sil_cfg_;
  A2cCore core_;
  AdamState<float> sil_actor_opt_;
  AdamState<float> sil_critic_opt_;
  Rng rng_;
  Rng sil_rng_;
  EpisodeAssembler assembler_;

  // (s, a, G) ring
  std::vector<float> obs_buf_, g_buf_;
  std::vector<int> actions_;
  long pos_ = 0;
  long size_ = 0;
};

}  // namespace gridrl

#pragma once

#include <cstdint>
#include <limits>

#include "gridrl/learner.hpp"
#include "gridrl/ppo.hpp"

namespace gridrl {

struct DirectConfig {
  float chi = 0.5f;      // reward mixture; 0 = plain PPO, 1 = discriminator only
  int omega_disc = 2;    // d in the d:p discriminator-to-policy update ratio
  int omega_policy = 1;  // p
  int kappa = 2048;      // self-imitation buffer capacity, in transitions
  int disc_batch = 256;
  float disc_lr = 3e-4f;
  float g_scale = 0.01f;  // return input scaling for the discriminator
  float gamma = 0.99f;    // discount for per-transition return-to-go inputs
};

struct BufferEntry {
  std::vector<float> obs;
  int action = 0;
  float g = 0.0f;               // discounted return-to-go at this transition
  float episode_return = 0.0f;  // undiscounted environmental return (priority)
  long episode_id = 0;          // recency tie-break, newer preferred
};

// Capacity-kappa store of the best transitions seen so far, prioritized by
// the owning episode's undiscounted return with recency breaking ties.
class SelfImitationBuffer {
 public:
  explicit SelfImitationBuffer(int capacity);

  // Offers a completed episode; returns true if any entry was admitted.
  // Momentum counts successful updates.
  bool update(const Episode& ep, float gamma);

  // Mean episode_return over the distinct episodes represented; NaN if empty.
  float buffer_reward() const;

  long momentum() const { return momentum_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const BufferEntry& entry(std::size_t i) const { return entries_[i]; }
  int capacity() const { return capacity_; }
  long next_episode_id() const { return next_episode_id_; }

  void restore(std::vector<BufferEntry> entries, long momentum, long next_id);

 private:
  int capacity_;
  std::vector<BufferEntry> entries_;  // sorted by (episode_return, episode_id) desc
  long momentum_ = 0;
  long next_episode_id_ = 0;
};

// [obs || one-hot(action) || g * g_scale]
std::vector<float> discriminator_input(std::span<const float> obs, int action,
                                       float g, float g_scale);

// chi * d_reward + (1 - chi) * env_reward
template <typename T>
T mix_reward(T chi, T d_reward, T env_reward) {
  return chi * d_reward + (T(1) - chi) * env_reward;
}

// Binary classifier over (state, action, return); buffer samples are labeled
// 1 and policy samples 0, so its clamped sigmoid output scores how
// buffer-like (beneficial) a transition is and doubles as the surrogate
// reward.
class Discriminator {
 public:
  Discriminator(int obs_dim, float lr, float g_scale, std::uint64_t seed);

  float reward(std::span<const float> obs, int action, float g) const;

  // One Adam step of BCE over the two batches; rows are discriminator_input
  // vectors, flattened. Returns the mean BCE loss.
  float update(std::span<const float> buffer_rows, int n_buffer,
               std::span<const float> policy_rows, int n_policy);

  int input_dim() const { return net_.input_dim(); }
  float g_scale() const { return g_scale_; }
  Mlp<float>& net() { return net_; }
  const Mlp<float>& net() const { return net_; }
  AdamState<float>& opt() { return opt_; }

 private:
  Mlp<float> net_;
  AdamState<float> opt_;
  float g_scale_;
};

// Discriminative reward co-training: PPO on a chi-mixture of the
// environmental reward and the discriminator score, with the discriminator
// trained on an omega schedule against the self-imitation buffer.
class DirectLearner : public Learner {
 public:
  DirectLearner(int obs_dim, PpoConfig ppo_cfg, DirectConfig cfg,
                std::uint64_t seed);

  std::string algo() const override { return "direct"; }
  IterationStats train_iteration(std::vector<GridEnv>& envs,
                                 EpisodeLog& log) override;
  int greedy_action(std::span<const float> obs) const override;
  long metrics_interval_steps() const override;
  void save_state(CheckpointData& ckpt) const override;
  void load_state(const CheckpointData& ckpt, bool refine) override;

  // Discriminator update rounds scheduled for (0-based) iteration i:
  // floor((i+1) d / p) - floor(i d / p).
  int rounds_for_iteration(long i) const;

  PpoCore& core() { return core_; }
  Discriminator& discriminator() { return disc_; }
  SelfImitationBuffer& buffer() { return buffer_; }
  const DirectConfig& config() const { return cfg_; }
  long iteration() const { return iter_; }

 private:
  int obs_dim_;
  DirectConfig cfg_;
  PpoCore core_;
  Discriminator disc_;
  SelfImitationBuffer buffer_;
  EpisodeAssembler assembler_;
  Rng rng_;       // policy stream: action sampling + minibatch shuffling
  Rng disc_rng_;  // discriminator batch sampling
  long iter_ = 0;
};

}  // namespace gridrl

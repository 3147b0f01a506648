#pragma once

#include <algorithm>
#include <cstdint>

#include "gridrl/learner.hpp"
#include "gridrl/nn.hpp"
#include "gridrl/rollout.hpp"

namespace gridrl {

struct PpoConfig {
  float gamma = 0.99f;
  float gae_lambda = 0.95f;
  float clip_eps = 0.2f;
  int epochs = 10;
  int minibatch = 64;
  float lr = 3e-4f;
  float entropy_coef = 0.01f;
  float value_coef = 0.5f;
  int n_steps = 512;  // per env; 4 envs -> 2048 transitions per rollout
  bool normalize_advantages = true;
};

// min(r * A, clip(r, 1 - eps, 1 + eps) * A)
template <typename T>
T ppo_clip_objective(T ratio, T advantage, T clip_eps) {
  const T clipped = std::clamp(ratio, T(1) - clip_eps, T(1) + clip_eps);
  return std::min(ratio * advantage, clipped * advantage);
}

struct PolicyNet {
  Mlp<float> actor;   // obs -> 64 -> 64 -> 4 logits, tanh hidden
  Mlp<float> critic;  // obs -> 64 -> 64 -> 1, tanh hidden
};

PolicyNet make_policy_net(int obs_dim, std::uint64_t actor_seed,
                          std::uint64_t critic_seed);

struct UpdateStats {
  float policy_loss = 0.0f;
  float value_loss = 0.0f;
  float entropy = 0.0f;
  bool non_finite = false;
};

// Rollout collection plus clipped-surrogate updates; reused verbatim by the
// co-training learner so that a zero reward mixture reproduces plain PPO
// bit for bit.
class PpoCore {
 public:
  PpoCore(PolicyNet net, PpoConfig cfg);

  void collect(std::vector<GridEnv>& envs, const RewardHook& hook, Rng& rng,
               EpisodeLog& log, EpisodeAssembler* assembler);
  UpdateStats update(Rng& rng);
  UpdateStats update_batch(RolloutBatch& batch, Rng& rng);

  int greedy_action(std::span<const float> obs) const;

  RolloutBatch& batch() { return batch_; }
  const RolloutBatch& batch() const { return batch_; }
  PolicyNet& net() { return net_; }
  const PolicyNet& net() const { return net_; }
  AdamState<float>& actor_opt() { return actor_opt_; }
  AdamState<float>& critic_opt() { return critic_opt_; }
  const PpoConfig& config() const { return cfg_; }

 private:
  PolicyNet net_;
  PpoConfig cfg_;
  AdamState<float> actor_opt_;
  AdamState<float> critic_opt_;
  RolloutBatch batch_;
};

class PpoLearner : public Learner {
 public:
  PpoLearner(int obs_dim, PpoConfig cfg, std::uint64_t seed);

  std::string algo() const override { return "ppo"; }
  IterationStats train_iteration(std::vector<GridEnv>& envs,
                                 EpisodeLog& log) override;
  int greedy_action(std::span<const float> obs) const override;
  long metrics_interval_steps() const override;
  void save_state(CheckpointData& ckpt) const override;
  void load_state(const CheckpointData& ckpt, bool refine) override;

  PpoCore& core() { return core_; }
  Rng& rng() { return rng_; }

 private:
  PpoCore core_;
  Rng rng_;
};

}  // namespace gridrl

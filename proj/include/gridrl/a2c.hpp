#pragma once

#include <cstdint>

#include "gridrl/learner.hpp"
#include "gridrl/ppo.hpp"

namespace gridrl {

struct A2cConfig {
  float gamma = 0.99f;
  float gae_lambda = 1.0f;  // n-step returns
  int n_steps = 5;          // per env
  float lr = 7e-4f;
  float entropy_coef = 0.01f;
  float value_coef = 0.5f;
};

// Single-pass actor-critic update over short rollouts:
// loss = mean(-log pi(a|s) * A) + value_coef * mean((V - R)^2)
//        - entropy_coef * mean(H).
class A2cCore {
 public:
  A2cCore(PolicyNet net, A2cConfig cfg);

  void collect(std::vector<GridEnv>& envs, const RewardHook& hook, Rng& rng,
               EpisodeLog& log, EpisodeAssembler* assembler);
  UpdateStats update();
  UpdateStats update_batch(RolloutBatch& batch);

  int greedy_action(std::span<const float> obs) const;

  RolloutBatch& batch() { return batch_; }
  PolicyNet& net() { return net_; }
  const PolicyNet& net() const { return net_; }
  AdamState<float>& actor_opt() { return actor_opt_; }
  AdamState<float>& critic_opt() { return critic_opt_; }
  const A2cConfig& config() const { return cfg_; }

 private:
  PolicyNet net_;
  A2cConfig cfg_;
  AdamState<float> actor_opt_;
  AdamState<float> critic_opt_;
  RolloutBatch batch_;
};

class A2cLearner : public Learner {
 public:
  A2cLearner(int obs_dim, A2cConfig cfg, std::uint64_t seed);

  std::string algo() const override { return "a2c"; }
  IterationStats train_iteration(std::vector<GridEnv>& envs,
                                 EpisodeLog& log) override;
  int greedy_action(std::span<const float> obs) const override;
  long metrics_interval_steps() const override;
  void save_state(CheckpointData& ckpt) const override;
  void load_state(const CheckpointData& ckpt, bool refine) override;

  A2cCore& core() { return core_; }

 private:
  A2cCore core_;
  Rng rng_;
};

}  // namespace gridrl

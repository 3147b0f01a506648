#pragma once

#include <cstdint>

#include "gridrl/learner.hpp"
#include "gridrl/nn.hpp"

namespace gridrl {

struct DqnConfig {
  float gamma = 0.99f;
  int replay_capacity = 50'000;
  int batch = 32;
  float lr = 1e-4f;
  int target_sync = 1'000;  // learner steps between target copies
  float eps_start = 1.0f;
  float eps_end = 0.05f;
  double exploration_fraction = 0.10;  // of the step budget
  int train_freq = 4;                  // env steps per learner step
  int learning_starts = 1'000;         // env steps before learning
  long step_budget = 1'000'000;        // drives the epsilon schedule
  int iteration_steps = 2048;          // env steps per train_iteration
};

// Q-learning with a uniform replay buffer fed by all four lockstep envs and a
// periodically synced target network; epsilon-greedy behavior policy.
class DqnLearner : public Learner {
 public:
  DqnLearner(int obs_dim, DqnConfig cfg, std::uint64_t seed);

  std::string algo() const override { return "dqn"; }
  IterationStats train_iteration(std::vector<GridEnv>& envs,
                                 EpisodeLog& log) override;
  int greedy_action(std::span<const float> obs) const override;
  long metrics_interval_steps() const override { return cfg_.iteration_steps; }
  void save_state(CheckpointData& ckpt) const override;
  void load_state(const CheckpointData& ckpt, bool refine) override;

  // Exposed for tests.
  void add_transition(std::span<const float> obs, int action, float reward,
                      std::span<const float> next_obs, bool done);
  std::vector<float> td_targets(std::span<const int> indices) const;
  float update_batch(std::span<const int> indices);  // returns Huber loss
  float update_once();  // uniform sample; syncs the target on schedule
  long replay_size() const { return size_; }
  long env_steps() const { return env_steps_; }
  long updates() const { return updates_; }
  float epsilon() const;
  Mlp<float>& online() { return online_; }
  const Mlp<float>& target_net() const { return target_; }
  void sync_target() { target_ = online_; }
  const DqnConfig& config() const { return cfg_; }

 private:
  int obs_dim_;
  DqnConfig cfg_;
  Mlp<float> online_;
  Mlp<float> target_;
  AdamState<float> opt_;
  Rng rng_;

  // replay ring
  std::vector<float> obs_buf_, next_obs_buf_, rewards_;
  std::vector<int> actions_;
  std::vector<std::uint8_t> dones_;
  long pos_ = 0;
  long size_ = 0;

  long env_steps_ = 0;
  long updates_ = 0;
};

}  // namespace gridrl

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gridrl/checkpoint.hpp"
#include "gridrl/grid.hpp"
#include "gridrl/rollout.hpp"

namespace gridrl {

struct IterationStats {
  long env_steps = 0;
  bool diverged = false;
  std::optional<float> disc_loss;
  std::optional<float> buffer_reward;
  std::optional<long> buffer_momentum;
};

// Uniform train-iteration interface shared by all algorithms. A learner owns
// its networks, optimizers and RNG streams; the harness owns the environments
// and the episode log.
class Learner {
 public:
  virtual ~Learner() = default;

  virtual std::string algo() const = 0;
  virtual IterationStats train_iteration(std::vector<GridEnv>& envs,
                                         EpisodeLog& log) = 0;
  virtual int greedy_action(std::span<const float> obs) const = 0;

  // Env steps consumed per train_iteration (metrics cadence).
  virtual long metrics_interval_steps() const = 0;

  virtual void save_state(CheckpointData& ckpt) const = 0;
  // refine=true restores learned parameters and optimizer moments only,
  // resetting buffers and episode bookkeeping (continuation in a shifted env);
  // refine=false restores everything for an exact resume.
  virtual void load_state(const CheckpointData& ckpt, bool refine) = 0;
};

}  // namespace gridrl

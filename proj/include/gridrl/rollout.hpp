#pragma once

#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "gridrl/grid.hpp"
#include "gridrl/nn.hpp"
#include "gridrl/rng.hpp"

namespace gridrl {

// G_t = sum_{k>=t} gamma^(k-t) r_k over a finite reward sequence, no bootstrap.
std::vector<float> discounted_return_to_go(std::span<const float> rewards,
                                           float gamma);

// A completed episode, assembled across rollout boundaries.
struct Episode {
  std::vector<float> obs;  // [len][obs_dim], flattened
  std::vector<int> actions;
  std::vector<float> env_rewards;
  float episode_return = 0.0f;  // undiscounted environmental return
  TerminationReason reason = TerminationReason::timeout;

  int length() const { return static_cast<int>(actions.size()); }
};

struct TerminationCounts {
  long target = 0;
  long lava = 0;
  long timeout = 0;
  long sum() const { return target + lava + timeout; }
};

// Run-level log of completed episodes: rolling window of the last 100 returns
// plus cumulative and per-interval termination counts.
class EpisodeLog {
 public:
  void record(float undiscounted_return, TerminationReason reason);

  long total_episodes() const { return total_; }
  bool has_full_window() const { return total_ >= 100; }
  float rolling_mean_100() const;  // NaN while empty
  const std::deque<float>& window() const { return window_; }
  const TerminationCounts& cumulative() const { return cumulative_; }

  struct Interval {
    long episodes = 0;
    TerminationCounts counts;
  };
  Interval take_interval();

  void restore(const std::vector<float>& window, long total,
               const TerminationCounts& cumulative);

 private:
  std::deque<float> window_;
  long total_ = 0;
  TerminationCounts cumulative_;
  TerminationCounts interval_;
  long interval_episodes_ = 0;
};

// Transforms the environmental reward actually fed to the learner. The return
// context is the environmental return-to-go of the transition's episode
// segment, discounted with `gamma` and computed when the episode (or the
// rollout) closes. An empty fn is the identity hook.
struct RewardHook {
  float gamma = 0.99f;
  std::function<float(std::span<const float> obs, int action, float env_reward,
                      float return_to_go)>
      fn;
};

// Fixed-horizon on-policy batch, time-major [t][env].
struct RolloutBatch {
  int n_steps = 0;
  int n_envs = 0;
  int obs_dim = 0;

  std::vector<float> obs;
  std::vector<int> actions;
  std::vector<float> log_probs;
  std::vector<float> values;
  std::vector<float> rewards;      // learner rewards (post-hook)
  std::vector<float> env_rewards;  // raw environmental rewards
  std::vector<float> env_rtg;      // per-segment environmental return-to-go
  std::vector<std::uint8_t> dones;
  std::vector<std::int8_t> reasons;  // -1 when not terminal
  std::vector<float> bootstrap_values;  // [env]

  std::vector<float> advantages;
  std::vector<float> returns;

  void resize(int steps, int envs, int obs);
  int size() const { return n_steps * n_envs; }
  std::size_t flat(int t, int e) const {
    return static_cast<std::size_t>(t) * n_envs + e;
  }
  std::span<const float> obs_at(int t, int e) const {
    return {obs.data() + flat(t, e) * obs_dim, static_cast<std::size_t>(obs_dim)};
  }
};

// Collects per-env in-progress episodes and hands complete ones to a sink.
class EpisodeAssembler {
 public:
  EpisodeAssembler(int n_envs, int obs_dim,
                   std::function<void(Episode&&)> sink);

  void push(int env, std::span<const float> obs, int action, float env_reward);
  void complete(int env, float episode_return, TerminationReason reason);

  const std::vector<Episode>& pending() const { return pending_; }
  void restore_pending(std::vector<Episode> pending);
  int obs_dim() const { return obs_dim_; }

 private:
  int obs_dim_;
  std::vector<Episode> pending_;
  std::function<void(Episode&&)> sink_;
};

// Steps the (synchronous, lockstep) env vector for n_steps, sampling actions
// from the actor softmax; finished episodes are recorded and auto-reset.
// Greedy mode takes argmax actions and draws nothing from the RNG.
// Throws std::runtime_error on non-finite logits.
void collect_rollout(std::vector<GridEnv>& envs, const Mlp<float>& actor,
                     const Mlp<float>& critic, int n_steps,
                     const RewardHook& hook, Rng& rng, EpisodeLog& log,
                     EpisodeAssembler* assembler, RolloutBatch& out,
                     bool greedy = false);

// GAE(lambda); returns = advantages + values. Done flags zero the bootstrap
// across episode boundaries.
void compute_returns_and_advantages(RolloutBatch& batch, float gamma,
                                    float gae_lambda);

}  // namespace gridrl

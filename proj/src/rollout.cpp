#include "gridrl/rollout.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace gridrl {

std::vector<float> discounted_return_to_go(std::span<const float> rewards,
                                           float gamma) {
  std::vector<float> g(rewards.size());
  float acc = 0.0f;
  for (int t = static_cast<int>(rewards.size()) - 1; t >= 0; --t) {
    acc = rewards[t] + gamma * acc;
    g[t] = acc;
  }
  return g;
}

void EpisodeLog::record(float undiscounted_return, TerminationReason reason) {
  window_.push_back(undiscounted_return);
  if (window_.size() > 100) window_.pop_front();
  ++total_;
  ++interval_episodes_;
  switch (reason) {
    case TerminationReason::target:
      ++cumulative_.target;
      ++interval_.target;
      break;
    case TerminationReason::lava:
      ++cumulative_.lava;
      ++interval_.lava;
      break;
    case TerminationReason::timeout:
      ++cumulative_.timeout;
      ++interval_.timeout;
      break;
  }
}

float EpisodeLog::rolling_mean_100() const {
  if (window_.empty()) return std::numeric_limits<float>::quiet_NaN();
  double sum = 0.0;
  for (float r : window_) sum += r;
  return static_cast<float>(sum / static_cast<double>(window_.size()));
}

EpisodeLog::Interval EpisodeLog::take_interval() {
  Interval out{interval_episodes_, interval_};
  interval_ = {};
  interval_episodes_ = 0;
  return out;
}

void EpisodeLog::restore(const std::vector<float>& window, long total,
                         const TerminationCounts& cumulative) {
  window_.assign(window.begin(), window.end());
  total_ = total;
  cumulative_ = cumulative;
  interval_ = {};
  interval_episodes_ = 0;
}

void RolloutBatch::resize(int steps, int envs, int obs_d) {
  n_steps = steps;
  n_envs = envs;
  obs_dim = obs_d;
  const std::size_t n = static_cast<std::size_t>(steps) * envs;
  obs.assign(n * obs_d, 0.0f);
  actions.assign(n, 0);
  log_probs.assign(n, 0.0f);
  values.assign(n, 0.0f);
  rewards.assign(n, 0.0f);
  env_rewards.assign(n, 0.0f);
  env_rtg.assign(n, 0.0f);
  dones.assign(n, 0);
  reasons.assign(n, -1);
  bootstrap_values.assign(envs, 0.0f);
  advantages.clear();
  returns.clear();
}

EpisodeAssembler::EpisodeAssembler(int n_envs, int obs_dim,
                                   std::function<void(Episode&&)> sink)
    : obs_dim_(obs_dim), pending_(n_envs), sink_(std::move(sink)) {}

void EpisodeAssembler::push(int env, std::span<const float> obs, int action,
                            float env_reward) {
  Episode& ep = pending_[env];
  ep.obs.insert(ep.obs.end(), obs.begin(), obs.end());
  ep.actions.push_back(action);
  ep.env_rewards.push_back(env_reward);
}

void EpisodeAssembler::complete(int env, float episode_return,
                                TerminationReason reason) {
  Episode& ep = pending_[env];
  ep.episode_return = episode_return;
  ep.reason = reason;
  if (sink_) sink_(std::move(ep));
  pending_[env] = Episode{};
}

void EpisodeAssembler::restore_pending(std::vector<Episode> pending) {
  if (pending.size() != pending_.size()) {
    throw std::invalid_argument("restore_pending: env count mismatch");
  }
  pending_ = std::move(pending);
}

void collect_rollout(std::vector<GridEnv>& envs, const Mlp<float>& actor,
                     const Mlp<float>& critic, int n_steps,
                     const RewardHook& hook, Rng& rng, EpisodeLog& log,
                     EpisodeAssembler* assembler, RolloutBatch& out,
                     bool greedy) {
  const int n_envs = static_cast<int>(envs.size());
  const int obs_dim = envs[0].obs_dim();
  const int n_actions = actor.output_dim();
  out.resize(n_steps, n_envs, obs_dim);

  std::vector<float> cur_obs(static_cast<std::size_t>(n_envs) * obs_dim);
  Tape<float> actor_tape, critic_tape;
  std::vector<float> log_p(n_actions);

  for (int t = 0; t < n_steps; ++t) {
    for (int e = 0; e < n_envs; ++e) {
      envs[e].observe(std::span<float>(cur_obs.data() + static_cast<std::size_t>(e) * obs_dim,
                                       obs_dim));
    }
    forward(actor, cur_obs.data(), n_envs, actor_tape);
    forward(critic, cur_obs.data(), n_envs, critic_tape);
    const auto& logits = actor_tape.act.back();
    const auto& values = critic_tape.act.back();

    for (int e = 0; e < n_envs; ++e) {
      std::span<const float> row(logits.data() + static_cast<std::size_t>(e) * n_actions,
                                 n_actions);
      for (float v : row) {
        if (!std::isfinite(v)) throw std::runtime_error("collect_rollout: non-finite logits");
      }
      log_softmax(row, std::span<float>(log_p));

      int a = 0;
      if (greedy) {
        for (int k = 1; k < n_actions; ++k) {
          if (row[k] > row[a]) a = k;
        }
      } else {
        const float u = rng.uniform();
        float cum = 0.0f;
        a = n_actions - 1;
        for (int k = 0; k < n_actions; ++k) {
          cum += std::exp(log_p[k]);
          if (u < cum) {
            a = k;
            break;
          }
        }
      }

      const std::size_t i = out.flat(t, e);
      std::span<const float> obs_e(cur_obs.data() + static_cast<std::size_t>(e) * obs_dim,
                                   obs_dim);
      std::copy(obs_e.begin(), obs_e.end(), out.obs.begin() + i * obs_dim);
      out.actions[i] = a;
      out.log_probs[i] = log_p[a];
      out.values[i] = values[e];

      const StepResult result = envs[e].step(static_cast<Action>(a));
      out.env_rewards[i] = result.reward;
      out.dones[i] = result.done ? 1 : 0;
      out.reasons[i] = result.done ? static_cast<std::int8_t>(*result.reason) : -1;

      if (assembler != nullptr) assembler->push(e, obs_e, a, result.reward);
      if (result.done) {
        const float episode_return = envs[e].dense_episode_sum();
        log.record(episode_return, *result.reason);
        if (assembler != nullptr) assembler->complete(e, episode_return, *result.reason);
        envs[e].reset();
      }
    }
  }

  for (int e = 0; e < n_envs; ++e) {
    envs[e].observe(std::span<float>(cur_obs.data() + static_cast<std::size_t>(e) * obs_dim,
                                     obs_dim));
  }
  forward(critic, cur_obs.data(), n_envs, critic_tape);
  for (int e = 0; e < n_envs; ++e) {
    out.bootstrap_values[e] = critic_tape.act.back()[e];
  }

  // Per-segment environmental return-to-go (episode end or rollout end closes
  // a segment, no bootstrap), then the reward hook.
  std::vector<float> seg_rewards;
  for (int e = 0; e < n_envs; ++e) {
    int seg_start = 0;
    for (int t = 0; t < n_steps; ++t) {
      const bool closes = out.dones[out.flat(t, e)] != 0 || t == n_steps - 1;
      if (!closes) continue;
      seg_rewards.clear();
      for (int k = seg_start; k <= t; ++k) {
        seg_rewards.push_back(out.env_rewards[out.flat(k, e)]);
      }
      const auto rtg = discounted_return_to_go(seg_rewards, hook.gamma);
      for (int k = seg_start; k <= t; ++k) {
        out.env_rtg[out.flat(k, e)] = rtg[k - seg_start];
      }
      seg_start = t + 1;
    }
  }
  if (hook.fn) {
    for (int t = 0; t < n_steps; ++t) {
      for (int e = 0; e < n_envs; ++e) {
        const std::size_t i = out.flat(t, e);
        out.rewards[i] = hook.fn(out.obs_at(t, e), out.actions[i],
                                 out.env_rewards[i], out.env_rtg[i]);
      }
    }
  } else {
    out.rewards = out.env_rewards;
  }
}

void compute_returns_and_advantages(RolloutBatch& batch, float gamma,
                                    float gae_lambda) {
  const int n_steps = batch.n_steps, n_envs = batch.n_envs;
  batch.advantages.assign(batch.size(), 0.0f);
  batch.returns.assign(batch.size(), 0.0f);
  for (int e = 0; e < n_envs; ++e) {
    float last_gae = 0.0f;
    for (int t = n_steps - 1; t >= 0; --t) {
      const std::size_t i = batch.flat(t, e);
      const float next_nonterminal = batch.dones[i] ? 0.0f : 1.0f;
      const float next_value =
          t == n_steps - 1 ? batch.bootstrap_values[e] : batch.values[batch.flat(t + 1, e)];
      const float delta = batch.rewards[i] +
                          gamma * next_value * next_nonterminal - batch.values[i];
      last_gae = delta + gamma * gae_lambda * next_nonterminal * last_gae;
      batch.advantages[i] = last_gae;
      batch.returns[i] = last_gae + batch.values[i];
    }
  }
}

}  // namespace gridrl

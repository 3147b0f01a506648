#include "gridrl/dqn.hpp"

#include <algorithm>
#include <cmath>

namespace gridrl {

DqnLearner::DqnLearner(int obs_dim, DqnConfig cfg, std::uint64_t seed)
    : obs_dim_(obs_dim),
      cfg_(cfg),
      online_(init_mlp<float>({obs_dim, 64, 64, kNumActions}, Activation::relu,
                              mix_seed(seed, 6))),
      target_(online_),
      opt_(make_adam(online_, cfg.lr)),
      rng_(mix_seed(seed, 7)) {
  const std::size_t cap = static_cast<std::size_t>(cfg_.replay_capacity);
  obs_buf_.resize(cap * obs_dim_);
  next_obs_buf_.resize(cap * obs_dim_);
  rewards_.resize(cap);
  actions_.resize(cap);
  dones_.resize(cap);
}

float DqnLearner::epsilon() const {
  const double horizon = cfg_.exploration_fraction * static_cast<double>(cfg_.step_budget);
  const double frac = horizon <= 0.0 ? 1.0 : std::min(1.0, env_steps_ / horizon);
  return static_cast<float>(cfg_.eps_start + (cfg_.eps_end - cfg_.eps_start) * frac);
}

void DqnLearner::add_transition(std::span<const float> obs, int action,
                                float reward, std::span<const float> next_obs,
                                bool done) {
  const std::size_t base = static_cast<std::size_t>(pos_) * obs_dim_;
  std::copy(obs.begin(), obs.end(), obs_buf_.begin() + base);
  std::copy(next_obs.begin(), next_obs.end(), next_obs_buf_.begin() + base);
  actions_[pos_] = action;
  rewards_[pos_] = reward;
  dones_[pos_] = done ? 1 : 0;
  pos_ = (pos_ + 1) % cfg_.replay_capacity;
  size_ = std::min<long>(size_ + 1, cfg_.replay_capacity);
}

std::vector<float> DqnLearner::td_targets(std::span<const int> indices) const {
  const int m = static_cast<int>(indices.size());
  std::vector<float> next_obs(static_cast<std::size_t>(m) * obs_dim_);
  for (int r = 0; r < m; ++r) {
    std::copy_n(next_obs_buf_.begin() + static_cast<std::size_t>(indices[r]) * obs_dim_,
                obs_dim_, next_obs.begin() + static_cast<std::size_t>(r) * obs_dim_);
  }
  Tape<float> tape;
  forward(target_, next_obs.data(), m, tape);
  const auto& q_next = tape.act.back();

  std::vector<float> y(m);
  for (int r = 0; r < m; ++r) {
    const int i = indices[r];
    float best = q_next[static_cast<std::size_t>(r) * kNumActions];
    for (int k = 1; k < kNumActions; ++k) {
      best = std::max(best, q_next[static_cast<std::size_t>(r) * kNumActions + k]);
    }
    y[r] = dones_[i] ? rewards_[i] : rewards_[i] + cfg_.gamma * best;
  }
  return y;
}

float DqnLearner::update_batch(std::span<const int> indices) {
  const int m = static_cast<int>(indices.size());
  const std::vector<float> y = td_targets(indices);

  std::vector<float> obs(static_cast<std::size_t>(m) * obs_dim_);
  for (int r = 0; r < m; ++r) {
    std::copy_n(obs_buf_.begin() + static_cast<std::size_t>(indices[r]) * obs_dim_,
                obs_dim_, obs.begin() + static_cast<std::size_t>(r) * obs_dim_);
  }
  Tape<float> tape;
  forward(online_, obs.data(), m, tape);
  const auto& q = tape.act.back();

  // Huber loss (delta = 1) on the taken action's Q value.
  std::vector<float> dq(static_cast<std::size_t>(m) * kNumActions, 0.0f);
  double loss = 0.0;
  for (int r = 0; r < m; ++r) {
    const int a = actions_[indices[r]];
    const float err = q[static_cast<std::size_t>(r) * kNumActions + a] - y[r];
    const float abs_err = std::abs(err);
    loss += abs_err <= 1.0f ? 0.5 * err * err : abs_err - 0.5;
    const float grad = abs_err <= 1.0f ? err : (err > 0.0f ? 1.0f : -1.0f);
    dq[static_cast<std::size_t>(r) * kNumActions + a] = grad / m;
  }
  loss /= m;

  MlpGrads<float> grads = make_grads(online_);
  backward(online_, tape, dq.data(), grads);
  adam_step(online_, grads, opt_);
  return static_cast<float>(loss);
}

float DqnLearner::update_once() {
  std::vector<int> indices(cfg_.batch);
  for (int& i : indices) i = rng_.uniform_int(static_cast<int>(size_));
  const float loss = update_batch(indices);
  ++updates_;
  if (updates_ % cfg_.target_sync == 0) sync_target();
  return loss;
}

IterationStats DqnLearner::train_iteration(std::vector<GridEnv>& envs,
                                           EpisodeLog& log) {
  const int n_envs = static_cast<int>(envs.size());
  std::vector<float> obs(obs_dim_), next_obs(obs_dim_);
  IterationStats stats;

  const int ticks = cfg_.iteration_steps / n_envs;
  for (int tick = 0; tick < ticks; ++tick) {
    for (int e = 0; e < n_envs; ++e) {
      envs[e].observe(std::span<float>(obs));
      int a;
      if (rng_.uniform() < epsilon()) {
        a = rng_.uniform_int(kNumActions);
      } else {
        a = greedy_action(obs);
      }
      const StepResult result = envs[e].step(static_cast<Action>(a));
      envs[e].observe(std::span<float>(next_obs));
      add_transition(obs, a, result.reward, next_obs, result.done);
      ++env_steps_;
      if (result.done) {
        log.record(envs[e].dense_episode_sum(), *result.reason);
        envs[e].reset();
      }
      if (env_steps_ >= cfg_.learning_starts && size_ >= cfg_.batch &&
          env_steps_ % cfg_.train_freq == 0) {
        const float loss = update_once();
        if (!std::isfinite(loss)) {
          stats.diverged = true;
          stats.env_steps += static_cast<long>(tick) * n_envs + e + 1;
          return stats;
        }
      }
    }
  }
  stats.env_steps = static_cast<long>(ticks) * n_envs;
  return stats;
}

int DqnLearner::greedy_action(std::span<const float> obs) const {
  const auto q = forward(online_, obs);
  int best = 0;
  for (int k = 1; k < static_cast<int>(q.size()); ++k) {
    if (q[k] > q[best]) best = k;
  }
  return best;
}

void DqnLearner::save_state(CheckpointData& ckpt) const {
  save_mlp(ckpt, "online", online_);
  save_mlp(ckpt, "target", target_);
  save_adam(ckpt, "online_opt", opt_);
  ckpt.header["rng"]["dqn"] = rng_.save_state();
  ckpt.header["config"]["dqn"] = {
      {"gamma", cfg_.gamma},
      {"replay_capacity", cfg_.replay_capacity},
      {"batch", cfg_.batch},
      {"lr", cfg_.lr},
      {"target_sync", cfg_.target_sync},
      {"eps_start", cfg_.eps_start},
      {"eps_end", cfg_.eps_end},
      {"exploration_fraction", cfg_.exploration_fraction},
      {"train_freq", cfg_.train_freq},
      {"learning_starts", cfg_.learning_starts},
      {"step_budget", cfg_.step_budget},
      {"iteration_steps", cfg_.iteration_steps}};
  ckpt.header["learner"]["dqn"] = {{"env_steps", env_steps_},
                                   {"updates", updates_},
                                   {"replay_pos", pos_},
                                   {"replay_size", size_}};

  const std::size_t n = static_cast<std::size_t>(size_);
  ckpt.add_tensor("replay.obs", std::span<const float>(obs_buf_.data(), n * obs_dim_));
  ckpt.add_tensor("replay.next_obs",
                  std::span<const float>(next_obs_buf_.data(), n * obs_dim_));
  ckpt.add_tensor("replay.rewards", std::span<const float>(rewards_.data(), n));
  std::vector<float> actions(n), dones(n);
  for (std::size_t i = 0; i < n; ++i) {
    actions[i] = static_cast<float>(actions_[i]);
    dones[i] = static_cast<float>(dones_[i]);
  }
  ckpt.add_tensor("replay.actions", actions);
  ckpt.add_tensor("replay.dones", dones);
}

void DqnLearner::load_state(const CheckpointData& ckpt, bool refine) {
  online_ = load_mlp(ckpt, "online");
  target_ = load_mlp(ckpt, "target");
  opt_ = load_adam(ckpt, "online_opt", online_);
  if (online_.input_dim() != obs_dim_) {
    throw CheckpointError("observation size mismatch in checkpoint");
  }
  if (refine) return;

  rng_.load_state(ckpt.header.at("rng").at("dqn").get<std::string>());
  const auto& st = ckpt.header.at("learner").at("dqn");
  env_steps_ = st.at("env_steps").get<long>();
  updates_ = st.at("updates").get<long>();
  pos_ = st.at("replay_pos").get<long>();
  size_ = st.at("replay_size").get<long>();

  const auto& obs = ckpt.tensor("replay.obs");
  const auto& next_obs = ckpt.tensor("replay.next_obs");
  const auto& rewards = ckpt.tensor("replay.rewards");
  const auto& actions = ckpt.tensor("replay.actions");
  const auto& dones = ckpt.tensor("replay.dones");
  std::copy(obs.begin(), obs.end(), obs_buf_.begin());
  std::copy(next_obs.begin(), next_obs.end(), next_obs_buf_.begin());
  std::copy(rewards.begin(), rewards.end(), rewards_.begin());
  for (std::size_t i = 0; i < actions.size(); ++i) {
    actions_[i] = static_cast<int>(actions[i]);
    dones_[i] = static_cast<std::uint8_t>(dones[i]);
  }
}

}  // namespace gridrl

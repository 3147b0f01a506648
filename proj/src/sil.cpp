#include "gridrl/sil.hpp"

#include <cmath>

#include "policy_math.hpp"

namespace gridrl {

SilLearner::SilLearner(int obs_dim, A2cConfig a2c_cfg, SilConfig sil_cfg,
                       std::uint64_t seed)
    : obs_dim_(obs_dim),
      a2c_cfg_(a2c_cfg),
      sil_cfg_(sil_cfg),
      core_(make_policy_net(obs_dim, mix_seed(seed, 1), mix_seed(seed, 2)), a2c_cfg),
      sil_actor_opt_(make_adam(core_.net().actor, a2c_cfg.lr)),
      sil_critic_opt_(make_adam(core_.net().critic, a2c_cfg.lr)),
      rng_(mix_seed(seed, 3)),
      sil_rng_(mix_seed(seed, 8)),
      assembler_(4, obs_dim, [this](Episode&& ep) { push_episode(ep); }) {
  const std::size_t cap = static_cast<std::size_t>(sil_cfg_.capacity);
  obs_buf_.resize(cap * obs_dim_);
  g_buf_.resize(cap);
  actions_.resize(cap);
}

void SilLearner::push_episode(const Episode& ep) {
  const auto g = discounted_return_to_go(ep.env_rewards, a2c_cfg_.gamma);
  for (int t = 0; t < ep.length(); ++t) {
    add_entry(std::span<const float>(ep.obs.data() + static_cast<std::size_t>(t) * obs_dim_,
                                     obs_dim_),
              ep.actions[t], g[t]);
  }
}

void SilLearner::add_entry(std::span<const float> obs, int action, float g) {
  std::copy(obs.begin(), obs.end(),
            obs_buf_.begin() + static_cast<std::size_t>(pos_) * obs_dim_);
  actions_[pos_] = action;
  g_buf_[pos_] = g;
  pos_ = (pos_ + 1) % sil_cfg_.capacity;
  size_ = std::min<long>(size_ + 1, sil_cfg_.capacity);
}

float SilLearner::sil_update_batch(std::span<const int> indices) {
  const int m = static_cast<int>(indices.size());
  const int n_actions = core_.net().actor.output_dim();

  std::vector<float> obs(static_cast<std::size_t>(m) * obs_dim_);
  for (int r = 0; r < m; ++r) {
    std::copy_n(obs_buf_.begin() + static_cast<std::size_t>(indices[r]) * obs_dim_,
                obs_dim_, obs.begin() + static_cast<std::size_t>(r) * obs_dim_);
  }

  Tape<float> actor_tape, critic_tape;
  forward(core_.net().actor, obs.data(), m, actor_tape);
  forward(core_.net().critic, obs.data(), m, critic_tape);
  const auto& logits = actor_tape.act.back();
  const auto& values = critic_tape.act.back();

  std::vector<float> dlogits(static_cast<std::size_t>(m) * n_actions, 0.0f);
  std::vector<float> dv(m, 0.0f);
  std::vector<float> p(n_actions), logp(n_actions);
  double total = 0.0;
  for (int r = 0; r < m; ++r) {
    const int i = indices[r];
    const int a = actions_[i];
    std::span<const float> row(logits.data() + static_cast<std::size_t>(r) * n_actions,
                               n_actions);
    detail::softmax_entropy(row, p, logp);
    const auto losses = sil_losses(logp[a], g_buf_[i], values[r], sil_cfg_.beta);
    total += losses.combined;
    // (G - V)+ is treated as a constant weight in the policy term; the value
    // term only trains the critic.
    const float adv = std::max(g_buf_[i] - values[r], 0.0f);
    float* drow = dlogits.data() + static_cast<std::size_t>(r) * n_actions;
    for (int k = 0; k < n_actions; ++k) {
      const float indicator = k == a ? 1.0f : 0.0f;
      drow[k] = -adv / m * (indicator - p[k]);
    }
    dv[r] = -sil_cfg_.beta * adv / m;
  }
  total /= m;

  MlpGrads<float> actor_grads = make_grads(core_.net().actor);
  MlpGrads<float> critic_grads = make_grads(core_.net().critic);
  backward(core_.net().actor, actor_tape, dlogits.data(), actor_grads);
  backward(core_.net().critic, critic_tape, dv.data(), critic_grads);
  adam_step(core_.net().actor, actor_grads, sil_actor_opt_);
  adam_step(core_.net().critic, critic_grads, sil_critic_opt_);
  return static_cast<float>(total);
}

void SilLearner::sil_update() {
  if (size_ == 0) return;
  std::vector<int> indices(sil_cfg_.batch);
  for (int epoch = 0; epoch < sil_cfg_.epochs; ++epoch) {
    for (int& i : indices) i = sil_rng_.uniform_int(static_cast<int>(size_));
    sil_update_batch(indices);
  }
}

IterationStats SilLearner::train_iteration(std::vector<GridEnv>& envs,
                                           EpisodeLog& log) {
  RewardHook identity{a2c_cfg_.gamma, nullptr};
  core_.collect(envs, identity, rng_, log, &assembler_);
  const UpdateStats stats = core_.update();
  IterationStats out;
  out.env_steps = static_cast<long>(a2c_cfg_.n_steps) * envs.size();
  out.diverged = stats.non_finite;
  if (!out.diverged) sil_update();
  return out;
}

int SilLearner::greedy_action(std::span<const float> obs) const {
  return core_.greedy_action(obs);
}

long SilLearner::metrics_interval_steps() const {
  return static_cast<long>(a2c_cfg_.n_steps) * 4;
}

void SilLearner::save_state(CheckpointData& ckpt) const {
  save_mlp(ckpt, "actor", core_.net().actor);
  save_mlp(ckpt, "critic", core_.net().critic);
  save_adam(ckpt, "actor_opt", const_cast<A2cCore&>(core_).actor_opt());
  save_adam(ckpt, "critic_opt", const_cast<A2cCore&>(core_).critic_opt());
  save_adam(ckpt, "sil_actor_opt", sil_actor_opt_);
  save_adam(ckpt, "sil_critic_opt", sil_critic_opt_);
  ckpt.header["rng"]["policy"] = rng_.save_state();
  ckpt.header["rng"]["sil"] = sil_rng_.save_state();
  const auto& c = a2c_cfg_;
  ckpt.header["config"]["a2c"] = {{"gamma", c.gamma},
                                  {"gae_lambda", c.gae_lambda},
                                  {"n_steps", c.n_steps},
                                  {"lr", c.lr},
                                  {"entropy_coef", c.entropy_coef},
                                  {"value_coef", c.value_coef}};
  ckpt.header["config"]["sil"] = {{"beta", sil_cfg_.beta},
                                  {"capacity", sil_cfg_.capacity},
                                  {"epochs", sil_cfg_.epochs},
                                  {"batch", sil_cfg_.batch}};
  ckpt.header["learner"]["sil"] = {{"pos", pos_}, {"size", size_}};

  const std::size_t n = static_cast<std::size_t>(size_);
  ckpt.add_tensor("sil.obs", std::span<const float>(obs_buf_.data(), n * obs_dim_));
  ckpt.add_tensor("sil.g", std::span<const float>(g_buf_.data(), n));
  std::vector<float> actions(n);
  for (std::size_t i = 0; i < n; ++i) actions[i] = static_cast<float>(actions_[i]);
  ckpt.add_tensor("sil.actions", actions);

  nlohmann::json pending = nlohmann::json::array();
  for (const auto& ep : assembler_.pending()) {
    pending.push_back({{"obs", ep.obs},
                       {"actions", ep.actions},
                       {"env_rewards", ep.env_rewards}});
  }
  ckpt.header["learner"]["pending_episodes"] = pending;
}

void SilLearner::load_state(const CheckpointData& ckpt, bool refine) {
  core_.net().actor = load_mlp(ckpt, "actor");
  core_.net().critic = load_mlp(ckpt, "critic");
  core_.actor_opt() = load_adam(ckpt, "actor_opt", core_.net().actor);
  core_.critic_opt() = load_adam(ckpt, "critic_opt", core_.net().critic);
  sil_actor_opt_ = load_adam(ckpt, "sil_actor_opt", core_.net().actor);
  sil_critic_opt_ = load_adam(ckpt, "sil_critic_opt", core_.net().critic);
  if (refine) return;

  rng_.load_state(ckpt.header.at("rng").at("policy").get<std::string>());
  sil_rng_.load_state(ckpt.header.at("rng").at("sil").get<std::string>());
  const auto& st = ckpt.header.at("learner").at("sil");
  pos_ = st.at("pos").get<long>();
  size_ = st.at("size").get<long>();
  const auto& obs = ckpt.tensor("sil.obs");
  const auto& g = ckpt.tensor("sil.g");
  const auto& actions = ckpt.tensor("sil.actions");
  std::copy(obs.begin(), obs.end(), obs_buf_.begin());
  std::copy(g.begin(), g.end(), g_buf_.begin());
  for (std::size_t i = 0; i < actions.size(); ++i) {
    actions_[i] = static_cast<int>(actions[i]);
  }

  std::vector<Episode> pending;
  for (const auto& ep_json : ckpt.header.at("learner").at("pending_episodes")) {
    Episode ep;
    ep.obs = ep_json.at("obs").get<std::vector<float>>();
    ep.actions = ep_json.at("actions").get<std::vector<int>>();
    ep.env_rewards = ep_json.at("env_rewards").get<std::vector<float>>();
    pending.push_back(std::move(ep));
  }
  assembler_.restore_pending(std::move(pending));
}

}  // namespace gridrl

#include "gridrl/a2c.hpp"

#include <cmath>

#include "policy_math.hpp"

namespace gridrl {

A2cCore::A2cCore(PolicyNet net, A2cConfig cfg)
    : net_(std::move(net)),
      cfg_(cfg),
      actor_opt_(make_adam(net_.actor, cfg.lr)),
      critic_opt_(make_adam(net_.critic, cfg.lr)) {}

void A2cCore::collect(std::vector<GridEnv>& envs, const RewardHook& hook,
                      Rng& rng, EpisodeLog& log, EpisodeAssembler* assembler) {
  collect_rollout(envs, net_.actor, net_.critic, cfg_.n_steps, hook, rng, log,
                  assembler, batch_);
}

UpdateStats A2cCore::update() { return update_batch(batch_); }

UpdateStats A2cCore::update_batch(RolloutBatch& batch) {
  compute_returns_and_advantages(batch, cfg_.gamma, cfg_.gae_lambda);

  const int m = batch.size();
  const int n_actions = net_.actor.output_dim();

  Tape<float> actor_tape, critic_tape;
  forward(net_.actor, batch.obs.data(), m, actor_tape);
  const auto& logits = actor_tape.act.back();

  std::vector<float> dlogits(static_cast<std::size_t>(m) * n_actions, 0.0f);
  std::vector<float> p(n_actions), logp(n_actions);
  double pg_loss = 0.0, ent_sum = 0.0;
  for (int r = 0; r < m; ++r) {
    const int a = batch.actions[r];
    std::span<const float> row(logits.data() + static_cast<std::size_t>(r) * n_actions,
                               n_actions);
    const float h = detail::softmax_entropy(row, p, logp);
    const float advantage = batch.advantages[r];
    pg_loss -= logp[a] * advantage;
    ent_sum += h;
    float* drow = dlogits.data() + static_cast<std::size_t>(r) * n_actions;
    for (int k = 0; k < n_actions; ++k) {
      const float indicator = k == a ? 1.0f : 0.0f;
      drow[k] = -advantage / m * (indicator - p[k]) +
                cfg_.entropy_coef / m * p[k] * (logp[k] + h);
    }
  }
  pg_loss /= m;

  forward(net_.critic, batch.obs.data(), m, critic_tape);
  const auto& values = critic_tape.act.back();
  std::vector<float> dv(m);
  double v_loss = 0.0;
  for (int r = 0; r < m; ++r) {
    const float err = values[r] - batch.returns[r];
    v_loss += static_cast<double>(err) * err;
    dv[r] = cfg_.value_coef * 2.0f * err / m;
  }
  v_loss = cfg_.value_coef * v_loss / m;

  UpdateStats stats;
  if (!std::isfinite(pg_loss) || !std::isfinite(v_loss) || !std::isfinite(ent_sum)) {
    stats.non_finite = true;
    return stats;
  }

  MlpGrads<float> actor_grads = make_grads(net_.actor);
  MlpGrads<float> critic_grads = make_grads(net_.critic);
  backward(net_.actor, actor_tape, dlogits.data(), actor_grads);
  backward(net_.critic, critic_tape, dv.data(), critic_grads);
  try {
    adam_step(net_.actor, actor_grads, actor_opt_);
    adam_step(net_.critic, critic_grads, critic_opt_);
  } catch (const std::runtime_error&) {
    stats.non_finite = true;
    return stats;
  }

  stats.policy_loss = static_cast<float>(pg_loss);
  stats.value_loss = static_cast<float>(v_loss);
  stats.entropy = static_cast<float>(ent_sum / m);
  return stats;
}

int A2cCore::greedy_action(std::span<const float> obs) const {
  const auto logits = forward(net_.actor, obs);
  int best = 0;
  for (int k = 1; k < static_cast<int>(logits.size()); ++k) {
    if (logits[k] > logits[best]) best = k;
  }
  return best;
}

A2cLearner::A2cLearner(int obs_dim, A2cConfig cfg, std::uint64_t seed)
    : core_(make_policy_net(obs_dim, mix_seed(seed, 1), mix_seed(seed, 2)), cfg),
      rng_(mix_seed(seed, 3)) {}

IterationStats A2cLearner::train_iteration(std::vector<GridEnv>& envs,
                                           EpisodeLog& log) {
  RewardHook identity{core_.config().gamma, nullptr};
  core_.collect(envs, identity, rng_, log, nullptr);
  const UpdateStats stats = core_.update();
  IterationStats out;
  out.env_steps = static_cast<long>(core_.config().n_steps) * envs.size();
  out.diverged = stats.non_finite;
  return out;
}

int A2cLearner::greedy_action(std::span<const float> obs) const {
  return core_.greedy_action(obs);
}

long A2cLearner::metrics_interval_steps() const {
  return static_cast<long>(core_.config().n_steps) * 4;
}

void A2cLearner::save_state(CheckpointData& ckpt) const {
  save_mlp(ckpt, "actor", core_.net().actor);
  save_mlp(ckpt, "critic", core_.net().critic);
  save_adam(ckpt, "actor_opt", const_cast<A2cCore&>(core_).actor_opt());
  save_adam(ckpt, "critic_opt", const_cast<A2cCore&>(core_).critic_opt());
  ckpt.header["rng"]["policy"] = rng_.save_state();
  const auto& c = core_.config();
  ckpt.header["config"]["a2c"] = {{"gamma", c.gamma},
                                  {"gae_lambda", c.gae_lambda},
                                  {"n_steps", c.n_steps},
                                  {"lr", c.lr},
                                  {"entropy_coef", c.entropy_coef},
                                  {"value_coef", c.value_coef}};
}

void A2cLearner::load_state(const CheckpointData& ckpt, bool refine) {
  core_.net().actor = load_mlp(ckpt, "actor");
  core_.net().critic = load_mlp(ckpt, "critic");
  core_.actor_opt() = load_adam(ckpt, "actor_opt", core_.net().actor);
  core_.critic_opt() = load_adam(ckpt, "critic_opt", core_.net().critic);
  if (!refine) {
    rng_.load_state(ckpt.header.at("rng").at("policy").get<std::string>());
  }
}

}  // namespace gridrl

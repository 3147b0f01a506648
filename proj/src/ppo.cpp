#include "gridrl/ppo.hpp"

#include <cmath>
#include <numeric>

#include "policy_math.hpp"

namespace gridrl {

PolicyNet make_policy_net(int obs_dim, std::uint64_t actor_seed,
                          std::uint64_t critic_seed) {
  return {init_mlp<float>({obs_dim, 64, 64, kNumActions}, Activation::tanh, actor_seed),
          init_mlp<float>({obs_dim, 64, 64, 1}, Activation::tanh, critic_seed)};
}

PpoCore::PpoCore(PolicyNet net, PpoConfig cfg)
    : net_(std::move(net)),
      cfg_(cfg),
      actor_opt_(make_adam(net_.actor, cfg.lr)),
      critic_opt_(make_adam(net_.critic, cfg.lr)) {}

void PpoCore::collect(std::vector<GridEnv>& envs, const RewardHook& hook,
                      Rng& rng, EpisodeLog& log, EpisodeAssembler* assembler) {
  collect_rollout(envs, net_.actor, net_.critic, cfg_.n_steps, hook, rng, log,
                  assembler, batch_);
}

UpdateStats PpoCore::update(Rng& rng) { return update_batch(batch_, rng); }

UpdateStats PpoCore::update_batch(RolloutBatch& batch, Rng& rng) {
  compute_returns_and_advantages(batch, cfg_.gamma, cfg_.gae_lambda);

  const int n = batch.size();
  const int n_actions = net_.actor.output_dim();
  const int obs_dim = batch.obs_dim;

  std::vector<float> adv(batch.advantages);
  if (cfg_.normalize_advantages) {
    double mean = 0.0;
    for (float a : adv) mean += a;
    mean /= n;
    double var = 0.0;
    for (float a : adv) var += (a - mean) * (a - mean);
    var /= n;
    const float fmean = static_cast<float>(mean);
    const float fstd = static_cast<float>(std::sqrt(var));
    for (float& a : adv) a = (a - fmean) / (fstd + 1e-8f);
  }

  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);

  MlpGrads<float> actor_grads = make_grads(net_.actor);
  MlpGrads<float> critic_grads = make_grads(net_.critic);
  Tape<float> actor_tape, critic_tape;
  std::vector<float> mb_obs, dlogits, dv;
  std::vector<float> p(n_actions), logp(n_actions);

  UpdateStats stats;
  double pg_total = 0.0, v_total = 0.0, ent_total = 0.0;
  long mb_count = 0;

  for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
    rng.shuffle(idx.begin(), idx.end());
    for (int start = 0; start < n; start += cfg_.minibatch) {
      const int m = std::min(cfg_.minibatch, n - start);

      mb_obs.resize(static_cast<std::size_t>(m) * obs_dim);
      for (int r = 0; r < m; ++r) {
        const int i = idx[start + r];
        std::copy_n(batch.obs.begin() + static_cast<std::size_t>(i) * obs_dim,
                    obs_dim, mb_obs.begin() + static_cast<std::size_t>(r) * obs_dim);
      }

      forward(net_.actor, mb_obs.data(), m, actor_tape);
      const auto& logits = actor_tape.act.back();
      dlogits.assign(static_cast<std::size_t>(m) * n_actions, 0.0f);

      double pg_loss = 0.0, ent_sum = 0.0;
      for (int r = 0; r < m; ++r) {
        const int i = idx[start + r];
        const int a = batch.actions[i];
        std::span<const float> row(logits.data() + static_cast<std::size_t>(r) * n_actions,
                                   n_actions);
        const float h = detail::softmax_entropy(row, p, logp);
        const float ratio = std::exp(logp[a] - batch.log_probs[i]);
        const float advantage = adv[i];
        const float unclipped = ratio * advantage;
        const float clipped =
            std::clamp(ratio, 1.0f - cfg_.clip_eps, 1.0f + cfg_.clip_eps) * advantage;
        pg_loss -= std::min(unclipped, clipped);
        ent_sum += h;

        // Gradient flows through the ratio only where the unclipped term is
        // active; the entropy bonus contributes everywhere.
        const float g_pol = unclipped <= clipped ? -advantage * ratio / m : 0.0f;
        float* drow = dlogits.data() + static_cast<std::size_t>(r) * n_actions;
        for (int k = 0; k < n_actions; ++k) {
          const float indicator = k == a ? 1.0f : 0.0f;
          drow[k] = g_pol * (indicator - p[k]) +
                    cfg_.entropy_coef / m * p[k] * (logp[k] + h);
        }
      }
      pg_loss /= m;

      forward(net_.critic, mb_obs.data(), m, critic_tape);
      const auto& values = critic_tape.act.back();
      dv.resize(m);
      double v_loss = 0.0;
      for (int r = 0; r < m; ++r) {
        const float err = values[r] - batch.returns[idx[start + r]];
        v_loss += static_cast<double>(err) * err;
        dv[r] = cfg_.value_coef * 2.0f * err / m;
      }
      v_loss = cfg_.value_coef * v_loss / m;

      if (!std::isfinite(pg_loss) || !std::isfinite(v_loss) ||
          !std::isfinite(ent_sum)) {
        stats.non_finite = true;
        return stats;
      }

      actor_grads.zero();
      backward(net_.actor, actor_tape, dlogits.data(), actor_grads);
      critic_grads.zero();
      backward(net_.critic, critic_tape, dv.data(), critic_grads);
      try {
        adam_step(net_.actor, actor_grads, actor_opt_);
        adam_step(net_.critic, critic_grads, critic_opt_);
      } catch (const std::runtime_error&) {
        stats.non_finite = true;
        return stats;
      }

      pg_total += pg_loss;
      v_total += v_loss;
      ent_total += ent_sum / m;
      ++mb_count;
    }
  }

  stats.policy_loss = static_cast<float>(pg_total / mb_count);
  stats.value_loss = static_cast<float>(v_total / mb_count);
  stats.entropy = static_cast<float>(ent_total / mb_count);
  return stats;
}

int PpoCore::greedy_action(std::span<const float> obs) const {
  const auto logits = forward(net_.actor, obs);
  int best = 0;
  for (int k = 1; k < static_cast<int>(logits.size()); ++k) {
    if (logits[k] > logits[best]) best = k;
  }
  return best;
}

PpoLearner::PpoLearner(int obs_dim, PpoConfig cfg, std::uint64_t seed)
    : core_(make_policy_net(obs_dim, mix_seed(seed, 1), mix_seed(seed, 2)), cfg),
      rng_(mix_seed(seed, 3)) {}

IterationStats PpoLearner::train_iteration(std::vector<GridEnv>& envs,
                                           EpisodeLog& log) {
  RewardHook identity{core_.config().gamma, nullptr};
  core_.collect(envs, identity, rng_, log, nullptr);
  const UpdateStats stats = core_.update(rng_);
  IterationStats out;
  out.env_steps = static_cast<long>(core_.config().n_steps) * envs.size();
  out.diverged = stats.non_finite;
  return out;
}

int PpoLearner::greedy_action(std::span<const float> obs) const {
  return core_.greedy_action(obs);
}

long PpoLearner::metrics_interval_steps() const {
  return static_cast<long>(core_.config().n_steps) * 4;
}

void PpoLearner::save_state(CheckpointData& ckpt) const {
  save_mlp(ckpt, "actor", core_.net().actor);
  save_mlp(ckpt, "critic", core_.net().critic);
  save_adam(ckpt, "actor_opt", const_cast<PpoCore&>(core_).actor_opt());
  save_adam(ckpt, "critic_opt", const_cast<PpoCore&>(core_).critic_opt());
  ckpt.header["rng"]["policy"] = rng_.save_state();
  const auto& c = core_.config();
  ckpt.header["config"]["ppo"] = {
      {"gamma", c.gamma},         {"gae_lambda", c.gae_lambda},
      {"clip_eps", c.clip_eps},   {"epochs", c.epochs},
      {"minibatch", c.minibatch}, {"lr", c.lr},
      {"entropy_coef", c.entropy_coef}, {"value_coef", c.value_coef},
      {"n_steps", c.n_steps},
      {"normalize_advantages", c.normalize_advantages}};
}

void PpoLearner::load_state(const CheckpointData& ckpt, bool refine) {
  core_.net().actor = load_mlp(ckpt, "actor");
  core_.net().critic = load_mlp(ckpt, "critic");
  core_.actor_opt() = load_adam(ckpt, "actor_opt", core_.net().actor);
  core_.critic_opt() = load_adam(ckpt, "critic_opt", core_.net().critic);
  if (!refine) {
    rng_.load_state(ckpt.header.at("rng").at("policy").get<std::string>());
  }
}

}  // namespace gridrl

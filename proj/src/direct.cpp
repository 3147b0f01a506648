#include "gridrl/direct.hpp"

#include <algorithm>
#include <cmath>

namespace gridrl {

SelfImitationBuffer::SelfImitationBuffer(int capacity) : capacity_(capacity) {
  if (capacity < 1) throw std::invalid_argument("buffer capacity must be >= 1");
}

bool SelfImitationBuffer::update(const Episode& ep, float gamma) {
  const long id = next_episode_id_++;
  if (static_cast<int>(entries_.size()) >= capacity_ &&
      ep.episode_return < entries_.back().episode_return) {
    return false;
  }

  const int obs_dim = ep.length() > 0
                          ? static_cast<int>(ep.obs.size()) / ep.length()
                          : 0;
  const auto g = discounted_return_to_go(ep.env_rewards, gamma);
  entries_.reserve(entries_.size() + ep.length());
  for (int t = 0; t < ep.length(); ++t) {
    BufferEntry e;
    e.obs.assign(ep.obs.begin() + static_cast<std::size_t>(t) * obs_dim,
                 ep.obs.begin() + static_cast<std::size_t>(t + 1) * obs_dim);
    e.action = ep.actions[t];
    e.g = g[t];
    e.episode_return = ep.episode_return;
    e.episode_id = id;
    entries_.push_back(std::move(e));
  }

  std::stable_sort(entries_.begin(), entries_.end(),
                   [](const BufferEntry& a, const BufferEntry& b) {
                     if (a.episode_return != b.episode_return) {
                       return a.episode_return > b.episode_return;
                     }
                     return a.episode_id > b.episode_id;
                   });
  if (static_cast<int>(entries_.size()) > capacity_) {
    entries_.resize(capacity_);
  }

  bool admitted = false;
  for (const auto& e : entries_) {
    if (e.episode_id == id) {
      admitted = true;
      break;
    }
  }
  if (admitted) ++momentum_;
  return admitted;
}

float SelfImitationBuffer::buffer_reward() const {
  if (entries_.empty()) return std::numeric_limits<float>::quiet_NaN();
  // Entries are sorted, so same-episode entries are adjacent.
  double sum = 0.0;
  long episodes = 0;
  long prev_id = -1;
  for (const auto& e : entries_) {
    if (e.episode_id != prev_id) {
      sum += e.episode_return;
      ++episodes;
      prev_id = e.episode_id;
    }
  }
  return static_cast<float>(sum / static_cast<double>(episodes));
}

void SelfImitationBuffer::restore(std::vector<BufferEntry> entries,
                                  long momentum, long next_id) {
  entries_ = std::move(entries);
  momentum_ = momentum;
  next_episode_id_ = next_id;
}

std::vector<float> discriminator_input(std::span<const float> obs, int action,
                                       float g, float g_scale) {
  std::vector<float> input;
  input.reserve(obs.size() + kNumActions + 1);
  input.assign(obs.begin(), obs.end());
  for (int k = 0; k < kNumActions; ++k) {
    input.push_back(k == action ? 1.0f : 0.0f);
  }
  input.push_back(g * g_scale);
  return input;
}

Discriminator::Discriminator(int obs_dim, float lr, float g_scale,
                             std::uint64_t seed)
    : net_(init_mlp<float>({obs_dim + kNumActions + 1, 64, 64, 1},
                           Activation::tanh, seed)),
      opt_(make_adam(net_, lr)),
      g_scale_(g_scale) {}

float Discriminator::reward(std::span<const float> obs, int action,
                            float g) const {
  const auto input = discriminator_input(obs, action, g, g_scale_);
  const auto out = forward(net_, std::span<const float>(input));
  return sigmoid_clamped(out[0]);
}

float Discriminator::update(std::span<const float> buffer_rows, int n_buffer,
                            std::span<const float> policy_rows, int n_policy) {
  const int in = net_.input_dim();
  const int m = n_buffer + n_policy;
  std::vector<float> x(static_cast<std::size_t>(m) * in);
  std::copy(buffer_rows.begin(), buffer_rows.end(), x.begin());
  std::copy(policy_rows.begin(), policy_rows.end(),
            x.begin() + static_cast<std::size_t>(n_buffer) * in);

  Tape<float> tape;
  forward(net_, x.data(), m, tape);
  const auto& z = tape.act.back();

  std::vector<float> dz(m);
  double loss = 0.0;
  for (int r = 0; r < m; ++r) {
    const float label = r < n_buffer ? 1.0f : 0.0f;
    const float pred = sigmoid_clamped(z[r]);
    loss += bce_loss(pred, label).first;
    const float s = 1.0f / (1.0f + std::exp(-z[r]));
    dz[r] = (s - label) / m;
  }
  loss /= m;

  MlpGrads<float> grads = make_grads(net_);
  backward(net_, tape, dz.data(), grads);
  adam_step(net_, grads, opt_);
  return static_cast<float>(loss);
}

DirectLearner::DirectLearner(int obs_dim, PpoConfig ppo_cfg, DirectConfig cfg,
                             std::uint64_t seed)
    : obs_dim_(obs_dim),
      cfg_(cfg),
      core_(make_policy_net(obs_dim, mix_seed(seed, 1), mix_seed(seed, 2)), ppo_cfg),
      disc_(obs_dim, cfg.disc_lr, cfg.g_scale, mix_seed(seed, 4)),
      buffer_(cfg.kappa),
      assembler_(4, obs_dim,
                 [this](Episode&& ep) { buffer_.update(ep, cfg_.gamma); }),
      rng_(mix_seed(seed, 3)),
      disc_rng_(mix_seed(seed, 5)) {
  if (cfg.chi < 0.0f || cfg.chi > 1.0f) {
    throw std::invalid_argument("chi must lie in [0, 1]");
  }
  if (cfg.omega_disc < 1 || cfg.omega_policy < 1) {
    throw std::invalid_argument("omega ratio terms must be positive");
  }
}

int DirectLearner::rounds_for_iteration(long i) const {
  const long d = cfg_.omega_disc, p = cfg_.omega_policy;
  return static_cast<int>((i + 1) * d / p - i * d / p);
}

IterationStats DirectLearner::train_iteration(std::vector<GridEnv>& envs,
                                              EpisodeLog& log) {
  // (1) Rollout with the mixed reward; return-to-go context is computed when
  // the episode (or the rollout) closes, against the pre-update discriminator.
  RewardHook hook;
  hook.gamma = cfg_.gamma;
  hook.fn = [this](std::span<const float> obs, int action, float env_reward,
                   float rtg) {
    return mix_reward(cfg_.chi, disc_.reward(obs, action, rtg), env_reward);
  };
  // (2)+(3) Partial returns and buffer updates happen as episodes complete.
  core_.collect(envs, hook, rng_, log, &assembler_);

  // (4) Omega-scheduled discriminator rounds.
  IterationStats out;
  const int rounds = rounds_for_iteration(iter_);
  if (rounds > 0 && !buffer_.empty()) {
    const auto& batch = core_.batch();
    const int in = disc_.input_dim();
    std::vector<float> buffer_rows(static_cast<std::size_t>(cfg_.disc_batch) * in);
    std::vector<float> policy_rows(static_cast<std::size_t>(cfg_.disc_batch) * in);
    double loss_sum = 0.0;
    for (int round = 0; round < rounds; ++round) {
      for (int r = 0; r < cfg_.disc_batch; ++r) {
        const auto& e = buffer_.entry(disc_rng_.uniform_int(static_cast<int>(buffer_.size())));
        const auto row = discriminator_input(e.obs, e.action, e.g, cfg_.g_scale);
        std::copy(row.begin(), row.end(),
                  buffer_rows.begin() + static_cast<std::size_t>(r) * in);
      }
      for (int r = 0; r < cfg_.disc_batch; ++r) {
        const int i = disc_rng_.uniform_int(batch.size());
        const auto row = discriminator_input(
            std::span<const float>(batch.obs.data() + static_cast<std::size_t>(i) * obs_dim_,
                                   obs_dim_),
            batch.actions[i], batch.env_rtg[i], cfg_.g_scale);
        std::copy(row.begin(), row.end(),
                  policy_rows.begin() + static_cast<std::size_t>(r) * in);
      }
      loss_sum += disc_.update(buffer_rows, cfg_.disc_batch, policy_rows,
                               cfg_.disc_batch);
    }
    out.disc_loss = static_cast<float>(loss_sum / rounds);
  }

  // (5) Policy update on the hooked rewards.
  const UpdateStats stats = core_.update(rng_);
  ++iter_;

  out.env_steps = static_cast<long>(core_.config().n_steps) * envs.size();
  out.diverged = stats.non_finite;
  if (!buffer_.empty()) out.buffer_reward = buffer_.buffer_reward();
  out.buffer_momentum = buffer_.momentum();
  return out;
}

int DirectLearner::greedy_action(std::span<const float> obs) const {
  return core_.greedy_action(obs);
}

long DirectLearner::metrics_interval_steps() const {
  return static_cast<long>(core_.config().n_steps) * 4;
}

void DirectLearner::save_state(CheckpointData& ckpt) const {
  save_mlp(ckpt, "actor", core_.net().actor);
  save_mlp(ckpt, "critic", core_.net().critic);
  save_mlp(ckpt, "disc", disc_.net());
  save_adam(ckpt, "actor_opt", const_cast<PpoCore&>(core_).actor_opt());
  save_adam(ckpt, "critic_opt", const_cast<PpoCore&>(core_).critic_opt());
  save_adam(ckpt, "disc_opt", const_cast<Discriminator&>(disc_).opt());
  ckpt.header["rng"]["policy"] = rng_.save_state();
  ckpt.header["rng"]["disc"] = disc_rng_.save_state();

  const auto& p = core_.config();
  ckpt.header["config"]["ppo"] = {
      {"gamma", p.gamma},         {"gae_lambda", p.gae_lambda},
      {"clip_eps", p.clip_eps},   {"epochs", p.epochs},
      {"minibatch", p.minibatch}, {"lr", p.lr},
      {"entropy_coef", p.entropy_coef}, {"value_coef", p.value_coef},
      {"n_steps", p.n_steps},
      {"normalize_advantages", p.normalize_advantages}};
  ckpt.header["config"]["direct"] = {
      {"chi", cfg_.chi},          {"omega_disc", cfg_.omega_disc},
      {"omega_policy", cfg_.omega_policy}, {"kappa", cfg_.kappa},
      {"disc_batch", cfg_.disc_batch},     {"disc_lr", cfg_.disc_lr},
      {"g_scale", cfg_.g_scale},  {"gamma", cfg_.gamma}};

  ckpt.header["learner"]["direct"] = {
      {"iteration", iter_},
      {"buffer_momentum", buffer_.momentum()},
      {"buffer_next_episode_id", buffer_.next_episode_id()}};

  const std::size_t n = buffer_.size();
  std::vector<float> obs(n * obs_dim_), actions(n), g(n), returns(n), ids(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& e = buffer_.entry(i);
    std::copy(e.obs.begin(), e.obs.end(), obs.begin() + i * obs_dim_);
    actions[i] = static_cast<float>(e.action);
    g[i] = e.g;
    returns[i] = e.episode_return;
    ids[i] = static_cast<float>(e.episode_id);
  }
  ckpt.add_tensor("buffer.obs", obs);
  ckpt.add_tensor("buffer.actions", actions);
  ckpt.add_tensor("buffer.g", g);
  ckpt.add_tensor("buffer.returns", returns);
  ckpt.add_tensor("buffer.episode_ids", ids);

  nlohmann::json pending = nlohmann::json::array();
  for (const auto& ep : assembler_.pending()) {
    pending.push_back({{"obs", ep.obs},
                       {"actions", ep.actions},
                       {"env_rewards", ep.env_rewards}});
  }
  ckpt.header["learner"]["pending_episodes"] = pending;
}

void DirectLearner::load_state(const CheckpointData& ckpt, bool refine) {
  core_.net().actor = load_mlp(ckpt, "actor");
  core_.net().critic = load_mlp(ckpt, "critic");
  disc_.net() = load_mlp(ckpt, "disc");
  core_.actor_opt() = load_adam(ckpt, "actor_opt", core_.net().actor);
  core_.critic_opt() = load_adam(ckpt, "critic_opt", core_.net().critic);
  disc_.opt() = load_adam(ckpt, "disc_opt", disc_.net());
  if (core_.net().actor.input_dim() != obs_dim_) {
    throw CheckpointError("observation size mismatch in checkpoint");
  }
  if (refine) return;

  rng_.load_state(ckpt.header.at("rng").at("policy").get<std::string>());
  disc_rng_.load_state(ckpt.header.at("rng").at("disc").get<std::string>());
  const auto& st = ckpt.header.at("learner").at("direct");
  iter_ = st.at("iteration").get<long>();

  const auto& obs = ckpt.tensor("buffer.obs");
  const auto& actions = ckpt.tensor("buffer.actions");
  const auto& g = ckpt.tensor("buffer.g");
  const auto& returns = ckpt.tensor("buffer.returns");
  const auto& ids = ckpt.tensor("buffer.episode_ids");
  std::vector<BufferEntry> entries(actions.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    entries[i].obs.assign(obs.begin() + i * obs_dim_, obs.begin() + (i + 1) * obs_dim_);
    entries[i].action = static_cast<int>(actions[i]);
    entries[i].g = g[i];
    entries[i].episode_return = returns[i];
    entries[i].episode_id = static_cast<long>(ids[i]);
  }
  buffer_.restore(std::move(entries), st.at("buffer_momentum").get<long>(),
                  st.at("buffer_next_episode_id").get<long>());

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

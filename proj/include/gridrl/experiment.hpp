#pragma once

#include <filesystem>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gridrl/learner.hpp"
#include "gridrl/metrics.hpp"

namespace gridrl {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AlgoOverrides {
  std::optional<float> chi;
  std::optional<std::pair<int, int>> omega;  // d:p
  std::optional<int> kappa;
};

struct ExperimentConfig {
  std::string algo = "ppo";        // direct|ppo|a2c|dqn|sil
  std::string env_name = "train";  // train|obstacle|target
  RewardMode mode = RewardMode::dense;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7};
  long step_budget = 1'000'000;
  std::optional<float> threshold;  // default: 40 (train), 38 (shifted)
  int n_envs = 4;
  int max_episode_steps = 100;
  AlgoOverrides overrides;
  // Checkpoint file, or an earlier run directory with per-seed checkpoints.
  // Matching env+mode resumes exactly; otherwise refinement training.
  std::optional<std::string> load_path;
  std::string out_dir;
  int max_parallel_seeds = 0;  // 0 = hardware concurrency
};

float default_threshold(std::string_view env_name);

struct SeedResult {
  std::uint64_t seed = 0;
  long steps = 0;
  bool reached_threshold = false;
  float final_mean = std::numeric_limits<float>::quiet_NaN();
  long episodes = 0;
  std::string error;  // empty on success
  std::filesystem::path checkpoint;
  std::filesystem::path metrics;
};

// Trains each seed independently (in parallel where hardware allows) until
// the step budget is spent or the rolling 100-episode mean return reaches the
// threshold; writes metrics.csv, checkpoint.bin and summary.json per seed.
std::vector<SeedResult> run_experiment(const ExperimentConfig& cfg);

std::unique_ptr<Learner> make_learner(const std::string& algo, int obs_dim,
                                      std::uint64_t seed, RewardMode mode,
                                      long step_budget,
                                      const AlgoOverrides& overrides);

struct EvalEpisode {
  float episode_return = 0.0f;
  TerminationReason reason = TerminationReason::timeout;
  int steps = 0;
};

struct EvalReport {
  std::vector<EvalEpisode> episodes;
  float mean_return = 0.0f;
};

// Deterministic greedy evaluation (argmax policy logits / argmax Q).
EvalReport evaluate(const std::filesystem::path& ckpt_path,
                    std::string_view env_name, RewardMode mode,
                    int episodes = 1);

// Discriminative-reward heatmap: for every non-wall cell and each action,
// D(obs-with-agent-at-cell, action, g_bar) with g_bar the checkpoint's buffer
// reward. CSV: header comments, then row,col,action,value.
void write_heatmap(const std::filesystem::path& ckpt_path,
                   std::string_view env_name,
                   const std::filesystem::path& out_file);

}  // namespace gridrl

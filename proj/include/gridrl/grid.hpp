#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gridrl {

enum class CellKind : std::uint8_t { free_cell, wall, lava, goal };

enum class Action : int { up = 0, down = 1, left = 2, right = 3 };
constexpr int kNumActions = 4;

enum class RewardMode { dense, sparse };

enum class TerminationReason { target, lava, timeout };

std::string_view to_string(TerminationReason r);
TerminationReason termination_from_string(std::string_view s);
std::string_view to_string(RewardMode m);
RewardMode reward_mode_from_string(std::string_view s);

struct GridLayout {
  int width = 0;
  int height = 0;
  std::vector<CellKind> cells;  // row-major
  int start_row = 0;
  int start_col = 0;

  CellKind at(int row, int col) const {
    return cells[static_cast<std::size_t>(row) * width + col];
  }
};

// ASCII map format: '#' wall, 'A' agent start, 'G' goal, 'L' lava, ' ' free.
// Throws std::invalid_argument naming the first violating cell.
GridLayout parse_layout(const std::string& ascii);

// BFS length of the shortest start-to-goal path through free cells only.
// Throws std::runtime_error if the goal is unreachable.
int shortest_safe_path(const GridLayout& layout);

// Shipped 9x7 layouts.
const GridLayout& train_layout();
const GridLayout& obstacle_layout();   // shifted obstacles
const GridLayout& target_shift_layout();  // shifted target
const GridLayout& layout_by_name(std::string_view name);  // train|obstacle|target

// Observation: board one-hot over {free, wall, lava, goal, agent-here},
// flattened row-major, 5 channels per cell.
constexpr int kObsChannels = 5;
int observation_size(const GridLayout& layout);

struct StepResult {
  float reward = 0.0f;
  bool done = false;
  std::optional<TerminationReason> reason;
};

// Deterministic episodic gridworld. Moving into a wall leaves the position
// unchanged but still costs a step. Dense rewards: -1 per step, +50 on
// entering the goal, -50 on entering lava. Sparse rewards: 0 until the
// terminal step, which pays the accumulated dense-mode episode sum.
class GridEnv {
 public:
  GridEnv(GridLayout layout, RewardMode mode, int max_steps = 100,
          std::uint64_t seed = 0);

  void reset();
  StepResult step(Action a);  // throws std::logic_error on a finished episode
  void observe(std::span<float> out) const;
  std::vector<float> observe() const;

  int obs_dim() const { return observation_size(layout_); }
  const GridLayout& layout() const { return layout_; }
  RewardMode mode() const { return mode_; }
  int max_steps() const { return max_steps_; }
  std::uint64_t seed() const { return seed_; }

  int row() const { return row_; }
  int col() const { return col_; }
  int step_count() const { return steps_; }
  float dense_episode_sum() const { return dense_sum_; }
  bool done() const { return done_; }
  std::optional<TerminationReason> reason() const { return reason_; }

  // Direct state restore, for checkpointing.
  void set_state(int row, int col, int steps, float dense_sum, bool done,
                 std::optional<TerminationReason> reason);

 private:
  GridLayout layout_;
  RewardMode mode_;
  int max_steps_;
  std::uint64_t seed_;  // recorded for reproducibility bookkeeping only

  int row_ = 0;
  int col_ = 0;
  int steps_ = 0;
  float dense_sum_ = 0.0f;
  bool done_ = false;
  std::optional<TerminationReason> reason_;
};

}  // namespace gridrl

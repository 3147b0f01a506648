#include "gridrl/grid.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace gridrl {

namespace {

std::string cell_name(int row, int col) {
  return "(" + std::to_string(row) + "," + std::to_string(col) + ")";
}

// BFS over free cells; returns -1 if the goal is unreachable.
int bfs_distance(const GridLayout& layout) {
  const int w = layout.width, h = layout.height;
  std::vector<int> dist(static_cast<std::size_t>(w) * h, -1);
  std::deque<int> queue;
  const int start = layout.start_row * w + layout.start_col;
  dist[start] = 0;
  queue.push_back(start);
  constexpr int dr[] = {-1, 1, 0, 0};
  constexpr int dc[] = {0, 0, -1, 1};
  while (!queue.empty()) {
    const int cur = queue.front();
    queue.pop_front();
    const int r = cur / w, c = cur % w;
    for (int k = 0; k < 4; ++k) {
      const int nr = r + dr[k], nc = c + dc[k];
      if (nr < 0 || nr >= h || nc < 0 || nc >= w) continue;
      const int idx = nr * w + nc;
      if (dist[idx] >= 0) continue;
      const CellKind kind = layout.cells[idx];
      if (kind == CellKind::goal) return dist[cur] + 1;
      if (kind != CellKind::free_cell) continue;
      dist[idx] = dist[cur] + 1;
      queue.push_back(idx);
    }
  }
  return -1;
}

const char* kTrainMap =
    "#########\n"
    "#A      #\n"
    "#  LLL  #\n"
    "#      G#\n"
    "#  LLL  #\n"
    "#       #\n"
    "#########";

const char* kObstacleMap =
    "#########\n"
    "#A   L  #\n"
    "#    L  #\n"
    "#    L G#\n"
    "#       #\n"
    "#       #\n"
    "#########";

const char* kTargetShiftMap =
    "#########\n"
    "#A      #\n"
    "#  LLL  #\n"
    "#       #\n"
    "#  LLL  #\n"
    "#      G#\n"
    "#########";

}  // namespace

std::string_view to_string(TerminationReason r) {
  switch (r) {
    case TerminationReason::target: return "target";
    case TerminationReason::lava: return "lava";
    case TerminationReason::timeout: return "timeout";
  }
  return "?";
}

TerminationReason termination_from_string(std::string_view s) {
  if (s == "target") return TerminationReason::target;
  if (s == "lava") return TerminationReason::lava;
  if (s == "timeout") return TerminationReason::timeout;
  throw std::invalid_argument("unknown termination reason: " + std::string(s));
}

std::string_view to_string(RewardMode m) {
  return m == RewardMode::dense ? "dense" : "sparse";
}

RewardMode reward_mode_from_string(std::string_view s) {
  if (s == "dense") return RewardMode::dense;
  if (s == "sparse") return RewardMode::sparse;
  throw std::invalid_argument("unknown reward mode: " + std::string(s));
}

GridLayout parse_layout(const std::string& ascii) {
  std::vector<std::string> rows;
  std::string line;
  for (char ch : ascii) {
    if (ch == '\n') {
      rows.push_back(line);
      line.clear();
    } else {
      line.push_back(ch);
    }
  }
  if (!line.empty()) rows.push_back(line);

  if (rows.size() < 3) throw std::invalid_argument("layout must have at least 3 rows");
  const int h = static_cast<int>(rows.size());
  const int w = static_cast<int>(rows[0].size());
  if (w < 3) throw std::invalid_argument("layout must have at least 3 columns");
  for (int r = 0; r < h; ++r) {
    if (static_cast<int>(rows[r].size()) != w) {
      throw std::invalid_argument("non-rectangular layout: row " + std::to_string(r) +
                                  " has width " + std::to_string(rows[r].size()) +
                                  ", expected " + std::to_string(w));
    }
  }

  GridLayout layout;
  layout.width = w;
  layout.height = h;
  layout.cells.resize(static_cast<std::size_t>(w) * h);
  int agents = 0, goals = 0;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const char ch = rows[r][c];
      CellKind kind;
      switch (ch) {
        case '#': kind = CellKind::wall; break;
        case ' ': kind = CellKind::free_cell; break;
        case 'L': kind = CellKind::lava; break;
        case 'G': kind = CellKind::goal; break;
        case 'A':
          kind = CellKind::free_cell;
          if (++agents > 1) {
            throw std::invalid_argument("duplicate agent start at " + cell_name(r, c));
          }
          layout.start_row = r;
          layout.start_col = c;
          break;
        default:
          throw std::invalid_argument(std::string("invalid character '") + ch +
                                      "' at " + cell_name(r, c));
      }
      if (kind == CellKind::goal && ++goals > 1) {
        throw std::invalid_argument("duplicate goal at " + cell_name(r, c));
      }
      layout.cells[static_cast<std::size_t>(r) * w + c] = kind;
    }
  }
  if (agents == 0) throw std::invalid_argument("missing agent start 'A'");
  if (goals == 0) throw std::invalid_argument("missing goal 'G'");

  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const bool border = r == 0 || r == h - 1 || c == 0 || c == w - 1;
      if (border && layout.at(r, c) != CellKind::wall) {
        throw std::invalid_argument("border cell " + cell_name(r, c) + " is not a wall");
      }
    }
  }

  if (bfs_distance(layout) < 0) {
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        if (layout.at(r, c) == CellKind::goal) {
          throw std::invalid_argument("goal at " + cell_name(r, c) +
                                      " unreachable from agent start");
        }
      }
    }
  }
  return layout;
}

int shortest_safe_path(const GridLayout& layout) {
  const int d = bfs_distance(layout);
  if (d < 0) throw std::runtime_error("shortest_safe_path: goal unreachable");
  return d;
}

const GridLayout& train_layout() {
  static const GridLayout layout = parse_layout(kTrainMap);
  return layout;
}

const GridLayout& obstacle_layout() {
  static const GridLayout layout = parse_layout(kObstacleMap);
  return layout;
}

const GridLayout& target_shift_layout() {
  static const GridLayout layout = parse_layout(kTargetShiftMap);
  return layout;
}

const GridLayout& layout_by_name(std::string_view name) {
  if (name == "train") return train_layout();
  if (name == "obstacle") return obstacle_layout();
  if (name == "target") return target_shift_layout();
  throw std::invalid_argument("unknown environment: " + std::string(name));
}

int observation_size(const GridLayout& layout) {
  return layout.width * layout.height * kObsChannels;
}

GridEnv::GridEnv(GridLayout layout, RewardMode mode, int max_steps,
                 std::uint64_t seed)
    : layout_(std::move(layout)), mode_(mode), max_steps_(max_steps), seed_(seed) {
  if (max_steps_ < 1) throw std::invalid_argument("max_steps must be >= 1");
  reset();
}

void GridEnv::reset() {
  row_ = layout_.start_row;
  col_ = layout_.start_col;
  steps_ = 0;
  dense_sum_ = 0.0f;
  done_ = false;
  reason_.reset();
}

StepResult GridEnv::step(Action a) {
  if (done_) throw std::logic_error("step called on a finished episode");
  constexpr int dr[] = {-1, 1, 0, 0};
  constexpr int dc[] = {0, 0, -1, 1};
  const int k = static_cast<int>(a);
  int nr = row_ + dr[k], nc = col_ + dc[k];
  if (layout_.at(nr, nc) == CellKind::wall) {
    nr = row_;
    nc = col_;
  }
  row_ = nr;
  col_ = nc;
  ++steps_;

  float dense = -1.0f;
  const CellKind kind = layout_.at(row_, col_);
  if (kind == CellKind::goal) {
    dense += 50.0f;
    done_ = true;
    reason_ = TerminationReason::target;
  } else if (kind == CellKind::lava) {
    dense -= 50.0f;
    done_ = true;
    reason_ = TerminationReason::lava;
  } else if (steps_ >= max_steps_) {
    done_ = true;
    reason_ = TerminationReason::timeout;
  }
  dense_sum_ += dense;

  const float reward = mode_ == RewardMode::dense
                           ? dense
                           : (done_ ? dense_sum_ : 0.0f);
  return {reward, done_, reason_};
}

void GridEnv::observe(std::span<float> out) const {
  const std::size_t n = static_cast<std::size_t>(obs_dim());
  if (out.size() != n) throw std::invalid_argument("observe: bad buffer size");
  std::fill(out.begin(), out.end(), 0.0f);
  for (int r = 0; r < layout_.height; ++r) {
    for (int c = 0; c < layout_.width; ++c) {
      const std::size_t base =
          (static_cast<std::size_t>(r) * layout_.width + c) * kObsChannels;
      out[base + static_cast<int>(layout_.at(r, c))] = 1.0f;
    }
  }
  const std::size_t agent =
      (static_cast<std::size_t>(row_) * layout_.width + col_) * kObsChannels + 4;
  out[agent] = 1.0f;
}

std::vector<float> GridEnv::observe() const {
  std::vector<float> out(obs_dim());
  observe(std::span<float>(out));
  return out;
}

void GridEnv::set_state(int row, int col, int steps, float dense_sum, bool done,
                        std::optional<TerminationReason> reason) {
  if (layout_.at(row, col) == CellKind::wall) {
    throw std::invalid_argument("set_state: agent on a wall cell");
  }
  if (done != reason.has_value()) {
    throw std::invalid_argument("set_state: done and reason must agree");
  }
  row_ = row;
  col_ = col;
  steps_ = steps;
  dense_sum_ = dense_sum;
  done_ = done;
  reason_ = reason;
}

}  // namespace gridrl

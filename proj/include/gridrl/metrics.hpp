#pragma once

#include <filesystem>
#include <fstream>
#include <optional>

#include "gridrl/rollout.hpp"

namespace gridrl {

// One CSV row per policy rollout. `episodes` and the termination counts cover
// the interval since the previous row, so column sums across rows equal the
// run totals.
struct MetricsRow {
  long step = 0;
  std::optional<float> mean_return_100;
  long episodes = 0;
  TerminationCounts counts;
  std::optional<float> buffer_reward;
  std::optional<long> buffer_momentum;
  std::optional<float> disc_loss;
};

class MetricsWriter {
 public:
  static constexpr const char* kHeader =
      "step,mean_return_100,episodes,term_target,term_lava,term_timeout,"
      "buffer_reward,buffer_momentum,disc_loss";

  explicit MetricsWriter(const std::filesystem::path& path);
  void write(const MetricsRow& row);

 private:
  std::ofstream out_;
};

}  // namespace gridrl

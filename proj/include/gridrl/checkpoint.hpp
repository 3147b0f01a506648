#pragma once

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gridrl/nn.hpp"

namespace gridrl {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Self-describing checkpoint: a JSON header (configs, counters, RNG states,
// tensor declarations) followed by little-endian 32-bit float tensors in
// declared order. Round-trips byte-exactly.
struct CheckpointData {
  nlohmann::json header;
  std::vector<std::pair<std::string, std::vector<float>>> tensors;

  void add_tensor(const std::string& name, std::span<const float> data);
  bool has_tensor(const std::string& name) const;
  const std::vector<float>& tensor(const std::string& name) const;
};

void write_checkpoint(const std::filesystem::path& path,
                      const CheckpointData& data);
CheckpointData read_checkpoint(const std::filesystem::path& path);

// Network / optimizer (de)serialization under a tensor-name prefix.
void save_mlp(CheckpointData& ckpt, const std::string& prefix,
              const Mlp<float>& net);
Mlp<float> load_mlp(const CheckpointData& ckpt, const std::string& prefix);
void save_adam(CheckpointData& ckpt, const std::string& prefix,
               const AdamState<float>& state);
AdamState<float> load_adam(const CheckpointData& ckpt,
                           const std::string& prefix, const Mlp<float>& shape);

}  // namespace gridrl

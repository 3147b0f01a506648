#include "gridrl/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace gridrl {

namespace {

constexpr char kMagic[8] = {'G', 'R', 'L', 'C', 'K', 'P', 'T', '\0'};
constexpr std::uint32_t kTrailer = 0x474c5245u;

template <typename T>
void write_pod(std::ofstream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in) {
  T value;
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw CheckpointError("checkpoint truncated");
  return value;
}

Activation activation_from_string(const std::string& s) {
  if (s == "identity") return Activation::identity;
  if (s == "tanh") return Activation::tanh;
  if (s == "relu") return Activation::relu;
  throw CheckpointError("unknown activation in checkpoint: " + s);
}

std::string activation_to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::tanh: return "tanh";
    case Activation::relu: return "relu";
  }
  return "identity";
}

}  // namespace

void CheckpointData::add_tensor(const std::string& name,
                                std::span<const float> data) {
  tensors.emplace_back(name, std::vector<float>(data.begin(), data.end()));
}

bool CheckpointData::has_tensor(const std::string& name) const {
  for (const auto& [n, _] : tensors) {
    if (n == name) return true;
  }
  return false;
}

const std::vector<float>& CheckpointData::tensor(const std::string& name) const {
  for (const auto& [n, d] : tensors) {
    if (n == name) return d;
  }
  throw CheckpointError("checkpoint missing tensor: " + name);
}

void write_checkpoint(const std::filesystem::path& path,
                      const CheckpointData& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot open for writing: " + path.string());

  out.write(kMagic, sizeof(kMagic));
  write_pod(out, kCheckpointVersion);

  const std::string header = data.header.dump();
  write_pod(out, static_cast<std::uint64_t>(header.size()));
  out.write(header.data(), static_cast<std::streamsize>(header.size()));

  write_pod(out, static_cast<std::uint32_t>(data.tensors.size()));
  for (const auto& [name, values] : data.tensors) {
    write_pod(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_pod(out, static_cast<std::uint64_t>(values.size()));
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(float)));
  }
  write_pod(out, kTrailer);
  out.flush();
  if (!out) throw CheckpointError("write failed: " + path.string());
}

CheckpointData read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint: " + path.string());

  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw CheckpointError("not a checkpoint file: " + path.string());
  }
  const auto version = read_pod<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " +
                          std::to_string(version));
  }

  const auto header_len = read_pod<std::uint64_t>(in);
  std::string header(header_len, '\0');
  in.read(header.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw CheckpointError("checkpoint truncated");

  CheckpointData data;
  try {
    data.header = nlohmann::json::parse(header);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("corrupt checkpoint header: ") + e.what());
  }

  const auto n_tensors = read_pod<std::uint32_t>(in);
  data.tensors.reserve(n_tensors);
  for (std::uint32_t i = 0; i < n_tensors; ++i) {
    const auto name_len = read_pod<std::uint32_t>(in);
    std::string name(name_len, '\0');
    in.read(name.data(), static_cast<std::streamsize>(name_len));
    const auto count = read_pod<std::uint64_t>(in);
    std::vector<float> values(count);
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(count * sizeof(float)));
    if (!in) throw CheckpointError("checkpoint truncated");
    data.tensors.emplace_back(std::move(name), std::move(values));
  }
  if (read_pod<std::uint32_t>(in) != kTrailer) {
    throw CheckpointError("corrupt checkpoint trailer: " + path.string());
  }
  return data;
}

void save_mlp(CheckpointData& ckpt, const std::string& prefix,
              const Mlp<float>& net) {
  nlohmann::json desc = nlohmann::json::array();
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    desc.push_back({{"in", layer.in},
                    {"out", layer.out},
                    {"act", activation_to_string(layer.act)}});
    const std::string base = prefix + ".l" + std::to_string(l);
    ckpt.add_tensor(base + ".w", layer.w);
    ckpt.add_tensor(base + ".b", layer.b);
  }
  ckpt.header["nets"][prefix] = desc;
}

Mlp<float> load_mlp(const CheckpointData& ckpt, const std::string& prefix) {
  if (!ckpt.header.contains("nets") || !ckpt.header["nets"].contains(prefix)) {
    throw CheckpointError("checkpoint missing network: " + prefix);
  }
  Mlp<float> net;
  const auto& desc = ckpt.header["nets"][prefix];
  for (std::size_t l = 0; l < desc.size(); ++l) {
    Mlp<float>::Layer layer;
    layer.in = desc[l]["in"].get<int>();
    layer.out = desc[l]["out"].get<int>();
    layer.act = activation_from_string(desc[l]["act"].get<std::string>());
    const std::string base = prefix + ".l" + std::to_string(l);
    layer.w = ckpt.tensor(base + ".w");
    layer.b = ckpt.tensor(base + ".b");
    if (layer.w.size() != static_cast<std::size_t>(layer.in) * layer.out ||
        layer.b.size() != static_cast<std::size_t>(layer.out)) {
      throw CheckpointError("tensor shape mismatch for " + base);
    }
    net.layers.push_back(std::move(layer));
  }
  return net;
}

void save_adam(CheckpointData& ckpt, const std::string& prefix,
               const AdamState<float>& state) {
  ckpt.header["optims"][prefix] = {{"t", state.t},
                                   {"lr", state.lr},
                                   {"beta1", state.beta1},
                                   {"beta2", state.beta2},
                                   {"eps", state.eps}};
  for (std::size_t l = 0; l < state.m.layers.size(); ++l) {
    const std::string base = prefix + ".l" + std::to_string(l);
    ckpt.add_tensor(base + ".mw", state.m.layers[l].w);
    ckpt.add_tensor(base + ".mb", state.m.layers[l].b);
    ckpt.add_tensor(base + ".vw", state.v.layers[l].w);
    ckpt.add_tensor(base + ".vb", state.v.layers[l].b);
  }
}

AdamState<float> load_adam(const CheckpointData& ckpt, const std::string& prefix,
                           const Mlp<float>& shape) {
  if (!ckpt.header.contains("optims") ||
      !ckpt.header["optims"].contains(prefix)) {
    throw CheckpointError("checkpoint missing optimizer: " + prefix);
  }
  const auto& desc = ckpt.header["optims"][prefix];
  AdamState<float> state = make_adam(shape, desc["lr"].get<float>());
  state.t = desc["t"].get<long>();
  state.beta1 = desc["beta1"].get<float>();
  state.beta2 = desc["beta2"].get<float>();
  state.eps = desc["eps"].get<float>();
  for (std::size_t l = 0; l < shape.layers.size(); ++l) {
    const std::string base = prefix + ".l" + std::to_string(l);
    state.m.layers[l].w = ckpt.tensor(base + ".mw");
    state.m.layers[l].b = ckpt.tensor(base + ".mb");
    state.v.layers[l].w = ckpt.tensor(base + ".vw");
    state.v.layers[l].b = ckpt.tensor(base + ".vb");
  }
  return state;
}

}  // namespace gridrl

#include "s2st/model/checkpoint.hpp"

#include <cstdint>
#include <fstream>

#include "s2st/error.hpp"

namespace s2st::model {

namespace {

constexpr char kMagic[4] = {'S', '2', 'S', 'C'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw CheckpointError("checkpoint truncated");
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const std::vector<ad::Param*>& params,
                     const std::string& config_json) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint " + path);
  out.write(kMagic, 4);
  write_pod(out, kVersion);
  write_pod(out, static_cast<std::uint64_t>(config_json.size()));
  out.write(config_json.data(), static_cast<std::streamsize>(config_json.size()));
  write_pod(out, static_cast<std::uint64_t>(params.size()));
  for (const ad::Param* p : params) {
    write_pod(out, static_cast<std::uint32_t>(p->name.size()));
    out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    write_pod(out, static_cast<std::uint32_t>(p->value.ndim()));
    for (std::size_t d : p->value.shape()) write_pod(out, static_cast<std::uint64_t>(d));
    out.write(reinterpret_cast<const char*>(p->value.data()),
              static_cast<std::streamsize>(p->value.size() * sizeof(double)));
  }
  if (!out) throw Error("failed writing checkpoint " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != std::string(kMagic, 4))
    throw CheckpointError("not a checkpoint file: " + path);
  std::uint32_t version = read_pod<std::uint32_t>(in);
  if (version != kVersion)
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  LoadedCheckpoint ckpt;
  std::uint64_t cfg_len = read_pod<std::uint64_t>(in);
  ckpt.config_json.resize(cfg_len);
  in.read(ckpt.config_json.data(), static_cast<std::streamsize>(cfg_len));
  std::uint64_t count = read_pod<std::uint64_t>(in);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::uint32_t name_len = read_pod<std::uint32_t>(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    std::uint32_t ndim = read_pod<std::uint32_t>(in);
    std::vector<std::size_t> shape;
    std::size_t total = 1;
    for (std::uint32_t d = 0; d < ndim; ++d) {
      shape.push_back(static_cast<std::size_t>(read_pod<std::uint64_t>(in)));
      total *= shape.back();
    }
    std::vector<double> data(total);
    in.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(total * sizeof(double)));
    if (!in) throw CheckpointError("checkpoint truncated in tensor " + name);
    ckpt.params.emplace(std::move(name), Array(std::move(shape), std::move(data)));
  }
  return ckpt;
}

void restore_params(const LoadedCheckpoint& ckpt, const std::vector<ad::Param*>& params) {
  for (ad::Param* p : params) {
    auto it = ckpt.params.find(p->name);
    if (it == ckpt.params.end())
      throw CheckpointError("checkpoint is missing parameter " + p->name);
    if (!(it->second.shape() == p->value.shape()))
      throw CheckpointError("checkpoint shape mismatch for " + p->name + ": stored " +
                            shape_str(it->second) + " vs model " + shape_str(p->value));
    p->value = it->second;
  }
}

}  // namespace s2st::model

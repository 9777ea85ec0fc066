#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "veracity/engine/tensor.hpp"

namespace veracity::engine {

// Container file: 8-byte magic, little-endian u64 header length, JSON header,
// then the tensor payload as raw little-endian 64-bit reals. The header lists
// each tensor's name, shape and element offset plus free-form run metadata.
inline constexpr char kCheckpointMagic[8] = {'V', 'C', 'K', 'P',
                                             '0', '0', '0', '1'};

struct Checkpoint {
  nlohmann::json meta;
  std::vector<std::pair<std::string, Tensor>> tensors;

  const Tensor& tensor(const std::string& name) const {
    for (const auto& [n, t] : tensors)
      if (n == name) return t;
    throw std::out_of_range("checkpoint has no tensor named " + name);
  }
};

namespace detail {

inline void put_u64_le(std::string& out, std::uint64_t x) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((x >> (8 * i)) & 0xff));
}

inline std::uint64_t get_u64_le(const unsigned char* p) {
  std::uint64_t x = 0;
  for (int i = 0; i < 8; ++i) x |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return x;
}

}  // namespace detail

inline std::string serialize_checkpoint(const Checkpoint& ckpt) {
  nlohmann::json header;
  header["meta"] = ckpt.meta;
  header["tensors"] = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, t] : ckpt.tensors) {
    header["tensors"].push_back(
        {{"name", name}, {"shape", t.shape}, {"offset", offset}});
    offset += t.size();
  }
  const std::string hs = header.dump();
  std::string out(kCheckpointMagic, sizeof kCheckpointMagic);
  detail::put_u64_le(out, hs.size());
  out += hs;
  out.reserve(out.size() + offset * 8);
  for (const auto& [name, t] : ckpt.tensors) {
    for (double d : t.v)
      detail::put_u64_le(out, std::bit_cast<std::uint64_t>(d));
  }
  return out;
}

inline Checkpoint deserialize_checkpoint(const std::string& bytes) {
  if (bytes.size() < 16 ||
      std::memcmp(bytes.data(), kCheckpointMagic, sizeof kCheckpointMagic) != 0)
    throw std::runtime_error("not a checkpoint file");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint64_t hlen = detail::get_u64_le(p + 8);
  if (16 + hlen > bytes.size())
    throw std::runtime_error("checkpoint header truncated");
  const auto header = nlohmann::json::parse(bytes.substr(16, hlen));
  Checkpoint ckpt;
  ckpt.meta = header.value("meta", nlohmann::json::object());
  const std::size_t data_start = 16 + hlen;
  for (const auto& entry : header.at("tensors")) {
    const std::string name = entry.at("name");
    const auto shape = entry.at("shape").get<std::vector<std::size_t>>();
    const std::uint64_t offset = entry.at("offset");
    Tensor t(shape);
    const std::size_t begin = data_start + offset * 8;
    if (begin + t.size() * 8 > bytes.size())
      throw std::runtime_error("checkpoint payload truncated for tensor " + name);
    for (std::size_t i = 0; i < t.size(); ++i)
      t.v[i] = std::bit_cast<double>(detail::get_u64_le(p + begin + i * 8));
    ckpt.tensors.emplace_back(name, std::move(t));
  }
  return ckpt;
}

inline void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  const std::string bytes = serialize_checkpoint(ckpt);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

inline Checkpoint checkpoint_from_params(const ParamSet& params,
                                         nlohmann::json meta) {
  Checkpoint ckpt;
  ckpt.meta = std::move(meta);
  for (const auto& p : params) ckpt.tensors.emplace_back(p.name, p.value);
  return ckpt;
}

inline void params_from_checkpoint(const Checkpoint& ckpt, ParamSet& params) {
  for (auto& p : params) {
    const Tensor& t = ckpt.tensor(p.name);
    if (t.shape != p.value.shape)
      throw std::runtime_error("checkpoint shape mismatch for " + p.name);
    p.value = t;
  }
}

}  // namespace veracity::engine

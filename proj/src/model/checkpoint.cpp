// SPDX-License-Identifier: Apache-2.0
//
// Layout (little-endian):
//   "ACKP" | u32 version | 9 x u32 config | u32 tensor count |
//   per tensor: u32 name length, name bytes, u32 rank, rank x u32 dims,
//               prod(dims) x f64
#include <fstream>
#include <map>

#include "acap/binary_io.hpp"
#include "acap/errors.hpp"
#include "acap/model.hpp"

namespace acap::model {
namespace {

constexpr std::uint32_t kCheckpointVersion = 1;
constexpr std::uint32_t kMaxNameLength = 4096;

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params,
                     const ModelConfig& config) {
  config.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out.write("ACKP", 4);
  binio::put_u32(out, kCheckpointVersion);
  for (std::uint32_t v : {config.n_feats, config.encoder_hidden[0], config.encoder_hidden[1],
                          config.encoder_hidden[2], config.decoder_hidden[0], config.decoder_hidden[1],
                          config.vocab_size, config.caption_steps, config.seq_len}) {
    binio::put_u32(out, v);
  }
  binio::put_u32(out, static_cast<std::uint32_t>(params.tensor_count()));
  params.for_each([&](const std::string& name, const Tensor& t) {
    binio::put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    binio::put_u32(out, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape()) binio::put_u32(out, static_cast<std::uint32_t>(d));
    for (double v : t.values()) binio::put_f64(out, v);
  });
  if (!out) throw IoError("short write to checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  const std::string where = path.string() + ": ";

  std::string magic;
  if (!binio::get_magic(in, magic) || magic != "ACKP") throw FormatError(where + "not an ACKP checkpoint");
  std::uint32_t version = 0;
  if (!binio::get_u32(in, version)) throw CorruptionError(where + "truncated header");
  if (version != kCheckpointVersion) {
    throw VersionError(where + "checkpoint version " + std::to_string(version) + ", expected " +
                       std::to_string(kCheckpointVersion));
  }

  Checkpoint ck;
  ModelConfig& c = ck.config;
  for (std::uint32_t* field : {&c.n_feats, &c.encoder_hidden[0], &c.encoder_hidden[1], &c.encoder_hidden[2],
                               &c.decoder_hidden[0], &c.decoder_hidden[1], &c.vocab_size,
                               &c.caption_steps, &c.seq_len}) {
    if (!binio::get_u32(in, *field)) throw CorruptionError(where + "truncated config block");
  }
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw CorruptionError(where + e.what());
  }
  ck.params = ModelParams::zeros(c);

  std::map<std::string, Tensor*> slots;
  ck.params.for_each([&](const std::string& name, Tensor& t) { slots[name] = &t; });

  std::uint32_t count = 0;
  if (!binio::get_u32(in, count)) throw CorruptionError(where + "truncated tensor table");
  std::map<std::string, bool> seen;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::uint32_t len = 0;
    if (!binio::get_u32(in, len) || len > kMaxNameLength) {
      throw CorruptionError(where + "truncated or invalid entry " + std::to_string(i));
    }
    std::string name(len, '\0');
    if (!in.read(name.data(), len)) throw CorruptionError(where + "truncated name of entry " + std::to_string(i));
    auto it = slots.find(name);
    if (it == slots.end()) throw CorruptionError(where + "unexpected tensor '" + name + "'");
    Tensor& t = *it->second;
    std::uint32_t rank = 0;
    if (!binio::get_u32(in, rank)) throw CorruptionError(where + "tensor '" + name + "' truncated");
    if (rank != t.rank()) throw CorruptionError(where + "tensor '" + name + "' has wrong rank");
    for (std::size_t d = 0; d < rank; ++d) {
      std::uint32_t dim = 0;
      if (!binio::get_u32(in, dim)) throw CorruptionError(where + "tensor '" + name + "' truncated");
      if (dim != t.shape()[d]) {
        throw CorruptionError(where + "tensor '" + name + "' shape disagrees with config " + t.shape_string());
      }
    }
    for (double& v : t.values()) {
      if (!binio::get_f64(in, v)) throw CorruptionError(where + "tensor '" + name + "' truncated");
    }
    seen[name] = true;
  }
  for (const auto& [name, slot] : slots) {
    if (!seen.count(name)) throw CorruptionError(where + "missing tensor '" + name + "'");
  }
  return ck;
}

}  // namespace acap::model

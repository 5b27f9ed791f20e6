// SPDX-License-Identifier: Apache-2.0
#include <fstream>

#include "acap/audio_features.hpp"
#include "acap/binary_io.hpp"
#include "acap/errors.hpp"

namespace acap::audio {
namespace {
constexpr std::uint32_t kFeatureVersion = 1;
}

void write_feature_file(const std::filesystem::path& path, const FeatureMatrix& features) {
  if (features.values.size() != features.frames * features.bands) {
    throw DimensionError("feature matrix data does not match its shape");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write("ACF1", 4);
  binio::put_u32(out, kFeatureVersion);
  binio::put_u32(out, static_cast<std::uint32_t>(features.frames));
  binio::put_u32(out, static_cast<std::uint32_t>(features.bands));
  for (double v : features.values) binio::put_f32(out, static_cast<float>(v));
  if (!out) throw IoError("short write to " + path.string());
}

FeatureMatrix read_feature_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open feature file " + path.string());
  std::string magic;
  if (!binio::get_magic(in, magic) || magic != "ACF1") {
    throw FormatError(path.string() + ": not an ACF1 feature file");
  }
  std::uint32_t version = 0, frames = 0, bands = 0;
  if (!binio::get_u32(in, version) || !binio::get_u32(in, frames) || !binio::get_u32(in, bands)) {
    throw CorruptionError(path.string() + ": truncated header");
  }
  if (version != kFeatureVersion) {
    throw VersionError(path.string() + ": unsupported feature file version " + std::to_string(version));
  }
  FeatureMatrix fm;
  fm.frames = frames;
  fm.bands = bands;
  fm.values.resize(static_cast<std::size_t>(frames) * bands);
  for (double& v : fm.values) {
    float f = 0.0F;
    if (!binio::get_f32(in, f)) throw CorruptionError(path.string() + ": truncated feature data");
    v = f;
  }
  return fm;
}

}  // namespace acap::audio

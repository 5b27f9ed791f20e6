// SPDX-License-Identifier: Apache-2.0
//
// Little-endian primitives shared by the feature and checkpoint formats.
#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

namespace acap::binio {

inline void put_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

inline void put_u64(std::ostream& out, std::uint64_t v) {
  put_u32(out, static_cast<std::uint32_t>(v));
  put_u32(out, static_cast<std::uint32_t>(v >> 32));
}

inline void put_f32(std::ostream& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }
inline void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

/// Returns false on short read.
inline bool get_u32(std::istream& in, std::uint32_t& v) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) return false;
  v = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
      (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  return true;
}

inline bool get_u64(std::istream& in, std::uint64_t& v) {
  std::uint32_t lo = 0, hi = 0;
  if (!get_u32(in, lo) || !get_u32(in, hi)) return false;
  v = static_cast<std::uint64_t>(lo) | (static_cast<std::uint64_t>(hi) << 32);
  return true;
}

inline bool get_f32(std::istream& in, float& v) {
  std::uint32_t u = 0;
  if (!get_u32(in, u)) return false;
  v = std::bit_cast<float>(u);
  return true;
}

inline bool get_f64(std::istream& in, double& v) {
  std::uint64_t u = 0;
  if (!get_u64(in, u)) return false;
  v = std::bit_cast<double>(u);
  return true;
}

inline bool get_magic(std::istream& in, std::string& magic) {
  char m[4];
  if (!in.read(m, 4)) return false;
  magic.assign(m, 4);
  return true;
}

}  // namespace acap::binio

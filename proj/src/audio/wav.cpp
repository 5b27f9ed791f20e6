// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <string>

#include "acap/audio_features.hpp"
#include "acap/binary_io.hpp"
#include "acap/errors.hpp"

namespace acap::audio {
namespace {

std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

}  // namespace

PcmSignal decode_wav(std::span<const unsigned char> bytes) {
  if (bytes.size() < 12 || std::string(bytes.begin(), bytes.begin() + 4) != "RIFF" ||
      std::string(bytes.begin() + 8, bytes.begin() + 12) != "WAVE") {
    throw FormatError("not a RIFF/WAVE file");
  }

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::span<const unsigned char> data;
  bool have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::string id(bytes.begin() + pos, bytes.begin() + pos + 4);
    const std::uint32_t size = le32(bytes.data() + pos + 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = bytes.size() - body;
    if (id == "fmt ") {
      if (size < 16 || avail < 16) throw FormatError("truncated fmt chunk");
      const unsigned char* f = bytes.data() + body;
      format = le16(f);
      channels = le16(f + 2);
      rate = le32(f + 4);
      bits = le16(f + 14);
      if (format == kFormatExtensible && size >= 40 && avail >= 40) {
        format = le16(f + 24);  // first two bytes of the sub-format GUID
      }
      have_fmt = true;
    } else if (id == "data") {
      // Some writers leave the size field at 0 or 0xFFFFFFFF when streaming.
      const std::size_t n = std::min<std::size_t>(size, avail);
      data = bytes.subspan(body, n);
      have_data = true;
      break;
    }
    pos = body + size + (size & 1U);
  }

  if (!have_fmt) throw FormatError("missing fmt chunk");
  if (!have_data) throw FormatError("missing data chunk");
  if (format != kFormatPcm) throw FormatError("only integer PCM WAV is supported");
  if (bits != 16) throw FormatError("only 16-bit samples are supported, got " + std::to_string(bits));
  if (channels != 1 && channels != 2) {
    throw FormatError("expected 1 or 2 channels, got " + std::to_string(channels));
  }
  if (rate != static_cast<std::uint32_t>(kSampleRate)) {
    throw UnsupportedRateError("unsupported sample rate " + std::to_string(rate) +
                               " Hz (need 44100)");
  }

  const std::size_t frame_bytes = 2U * channels;
  const std::size_t n = data.size() / frame_bytes;
  PcmSignal out;
  out.sample_rate = kSampleRate;
  out.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned char* p = data.data() + i * frame_bytes;
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      acc += static_cast<std::int16_t>(le16(p + 2 * c)) / 32768.0;
    }
    out.samples[i] = acc / channels;
  }
  return out;
}

PcmSignal fit_length(PcmSignal signal, std::size_t length) {
  signal.samples.resize(length, 0.0);
  return signal;
}

PcmSignal load_audio(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open audio file " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  try {
    return fit_length(decode_wav(bytes));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  } catch (const UnsupportedRateError& e) {
    throw UnsupportedRateError(path.string() + ": " + e.what());
  }
}

void write_wav(const std::filesystem::path& path, std::span<const double> samples,
               int sample_rate, int channels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  out.write("RIFF", 4);
  binio::put_u32(out, 36 + data_bytes);
  out.write("WAVEfmt ", 8);
  binio::put_u32(out, 16);
  const unsigned char fmt_head[4] = {1, 0, static_cast<unsigned char>(channels), 0};
  out.write(reinterpret_cast<const char*>(fmt_head), 4);
  binio::put_u32(out, static_cast<std::uint32_t>(sample_rate));
  binio::put_u32(out, static_cast<std::uint32_t>(sample_rate * channels * 2));
  const unsigned char block[4] = {static_cast<unsigned char>(channels * 2), 0, 16, 0};
  out.write(reinterpret_cast<const char*>(block), 4);
  out.write("data", 4);
  binio::put_u32(out, data_bytes);
  // `samples` is interleaved when channels > 1.
  std::vector<char> buf(samples.size() * 2);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double s = std::clamp(samples[i], -1.0, 1.0);
    const auto v = static_cast<std::int16_t>(std::lround(std::clamp(s * 32768.0, -32768.0, 32767.0)));
    const auto u = static_cast<std::uint16_t>(v);
    buf[2 * i] = static_cast<char>(u & 0xFF);
    buf[2 * i + 1] = static_cast<char>(u >> 8);
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("short write to " + path.string());
}

}  // namespace acap::audio

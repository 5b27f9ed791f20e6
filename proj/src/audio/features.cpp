// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "acap/audio_features.hpp"
#include "acap/errors.hpp"

namespace acap::audio {

double hamming(std::size_t n, std::size_t width) {
  if (width < 2) return 1.0;
  return 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) /
                                static_cast<double>(width - 1));
}

// No "+1": a 30 s clip gives 1289 frames.
std::size_t frame_count(std::size_t length, std::size_t window, std::size_t hop) {
  if (hop == 0) throw DimensionError("hop must be positive");
  if (length < window) {
    throw TooShortError("signal of " + std::to_string(length) + " samples is shorter than the " +
                        std::to_string(window) + "-sample window");
  }
  return (length - window) / hop;
}

namespace {

std::vector<double> hamming_table(std::size_t window) {
  std::vector<double> w(window);
  for (std::size_t n = 0; n < window; ++n) w[n] = hamming(n, window);
  return w;
}

void window_frame(std::span<const double> samples, std::size_t start, std::span<const double> w,
                  std::vector<double>& out) {
  out.resize(w.size());
  for (std::size_t n = 0; n < w.size(); ++n) out[n] = samples[start + n] * w[n];
}

}  // namespace

std::vector<std::vector<double>> frame_signal(const PcmSignal& signal, std::size_t window,
                                              std::size_t hop) {
  const std::size_t n = frame_count(signal.samples.size(), window, hop);
  const std::vector<double> w = hamming_table(window);
  std::vector<std::vector<double>> frames(n);
  for (std::size_t t = 0; t < n; ++t) window_frame(signal.samples, t * hop, w, frames[t]);
  return frames;
}

FeatureMatrix extract_features(const PcmSignal& signal) {
  if (signal.sample_rate != kSampleRate) {
    throw UnsupportedRateError("features need 44100 Hz input, got " +
                               std::to_string(signal.sample_rate));
  }
  const std::size_t n = frame_count(signal.samples.size());
  static const std::vector<double> w = hamming_table(kWindow);
  static const Fft plan(kWindow);
  static const MelFilterbank fb = mel_filterbank();

  FeatureMatrix out;
  out.frames = n;
  out.bands = fb.bands;
  out.values.resize(n * fb.bands);
  std::vector<double> frame;
  for (std::size_t t = 0; t < n; ++t) {
    window_frame(signal.samples, t * kHop, w, frame);
    const std::vector<double> energies = fb.apply(power_spectrum(frame, plan));
    for (std::size_t b = 0; b < fb.bands; ++b) {
      out.values[t * fb.bands + b] = std::log(std::max(energies[b], kLogFloor));
    }
  }
  return out;
}

}  // namespace acap::audio

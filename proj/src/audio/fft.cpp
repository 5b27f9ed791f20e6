// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numbers>
#include <utility>

#include "acap/audio_features.hpp"
#include "acap/errors.hpp"

namespace acap::audio {

Fft::Fft(std::size_t size) : size_(size) {
  if (size == 0 || (size & (size - 1)) != 0) {
    throw DimensionError("FFT size must be a power of two, got " + std::to_string(size));
  }
  twiddles_.resize(size / 2);
  for (std::size_t k = 0; k < size / 2; ++k) {
    const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(size);
    twiddles_[k] = {std::cos(angle), std::sin(angle)};
  }
  bit_reverse_.resize(size);
  std::size_t bits = 0;
  while ((std::size_t{1} << bits) < size) ++bits;
  for (std::size_t i = 0; i < size; ++i) {
    std::size_t r = 0;
    for (std::size_t b = 0; b < bits; ++b) {
      if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
    }
    bit_reverse_[i] = r;
  }
}

void Fft::forward(std::vector<std::complex<double>>& data) const {
  if (data.size() != size_) throw DimensionError("FFT input has wrong length");
  for (std::size_t i = 0; i < size_; ++i) {
    const std::size_t j = bit_reverse_[i];
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= size_; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = size_ / len;
    for (std::size_t start = 0; start < size_; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const std::complex<double> w = twiddles_[k * stride];
        const std::complex<double> odd = w * data[start + k + half];
        const std::complex<double> even = data[start + k];
        data[start + k] = even + odd;
        data[start + k + half] = even - odd;
      }
    }
  }
}

std::vector<double> power_spectrum(std::span<const double> frame, const Fft& plan) {
  if (frame.size() != plan.size()) throw DimensionError("frame length does not match FFT plan");
  std::vector<std::complex<double>> buf(frame.begin(), frame.end());
  plan.forward(buf);
  std::vector<double> power(frame.size() / 2 + 1);
  for (std::size_t k = 0; k < power.size(); ++k) power[k] = std::norm(buf[k]);
  return power;
}

std::vector<double> power_spectrum(std::span<const double> frame) {
  const Fft plan(frame.size());
  return power_spectrum(frame, plan);
}

}  // namespace acap::audio

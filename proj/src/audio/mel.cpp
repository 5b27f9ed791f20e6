// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>

#include "acap/audio_features.hpp"
#include "acap/errors.hpp"
#include "acap/simd/kernels.hpp"

namespace acap::audio {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

MelFilterbank mel_filterbank(std::size_t n_mels, std::size_t n_fft, int sample_rate) {
  if (n_mels == 0 || n_fft < 2) throw DimensionError("filterbank needs n_mels >= 1 and n_fft >= 2");
  MelFilterbank fb;
  fb.bands = n_mels;
  fb.bins = n_fft / 2 + 1;
  fb.weights.assign(fb.bands * fb.bins, 0.0);

  // n_mels + 2 equally spaced mel points from 0 Hz to Nyquist; filter b
  // rises from point b to b+1 and falls to b+2.
  const double top = hz_to_mel(sample_rate / 2.0);
  std::vector<double> edges(n_mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(top * static_cast<double>(i) / static_cast<double>(n_mels + 1));
  }
  fb.centers_hz.assign(edges.begin() + 1, edges.end() - 1);

  const double bin_hz = static_cast<double>(sample_rate) / static_cast<double>(n_fft);
  for (std::size_t b = 0; b < n_mels; ++b) {
    const double left = edges[b], center = edges[b + 1], right = edges[b + 2];
    for (std::size_t k = 0; k < fb.bins; ++k) {
      const double f = static_cast<double>(k) * bin_hz;
      const double rise = (f - left) / (center - left);
      const double fall = (right - f) / (right - center);
      fb.weights[b * fb.bins + k] = std::max(0.0, std::min(rise, fall));
    }
  }
  return fb;
}

std::vector<double> MelFilterbank::apply(std::span<const double> power) const {
  if (power.size() != bins) throw DimensionError("power spectrum length does not match filterbank");
  std::vector<double> out(bands);
  simd::kernels().gemv(weights.data(), bands, bins, power.data(), out.data());
  return out;
}

}  // namespace acap::audio

// SPDX-License-Identifier: Apache-2.0
//
// Audio front end: WAV loading, Hamming framing, radix-2 power spectrum, HTK
// mel filterbank and log mel-band energies, plus the "ACF1" feature file.
#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace acap::audio {

inline constexpr int kSampleRate = 44100;
inline constexpr std::size_t kClipSamples = 1'323'000;  // 30 s at 44.1 kHz
inline constexpr std::size_t kWindow = 2048;
inline constexpr std::size_t kHop = 1024;
inline constexpr std::size_t kSpectrumBins = kWindow / 2 + 1;
inline constexpr std::size_t kMelBands = 64;
inline constexpr std::size_t kFrames = 1289;
inline constexpr double kLogFloor = 1e-10;

struct PcmSignal {
  std::vector<double> samples;  // mono, in [-1, 1]
  int sample_rate = kSampleRate;
};

/// Row-major T x bands matrix of natural-log mel energies.
struct FeatureMatrix {
  std::size_t frames = 0;
  std::size_t bands = 0;
  std::vector<double> values;

  double at(std::size_t t, std::size_t b) const { return values[t * bands + b]; }
  std::span<const double> row(std::size_t t) const {
    return {values.data() + t * bands, bands};
  }
};

/// Reads a 16-bit PCM RIFF/WAVE file, downmixes stereo by averaging and
/// pads or truncates to exactly kClipSamples.
PcmSignal load_audio(const std::filesystem::path& path);

/// Decodes WAV bytes without the pad/truncate step.
PcmSignal decode_wav(std::span<const unsigned char> bytes);

/// Pads with zeros or truncates to `length` samples.
PcmSignal fit_length(PcmSignal signal, std::size_t length = kClipSamples);

/// Writes mono 16-bit PCM; used by tests and the acceptance suite to make
/// inputs. Samples are clamped to [-1, 1].
void write_wav(const std::filesystem::path& path, std::span<const double> samples,
               int sample_rate = kSampleRate, int channels = 1);

double hamming(std::size_t n, std::size_t width);

/// Number of frames under the floor((L - W) / H) convention.
std::size_t frame_count(std::size_t length, std::size_t window = kWindow,
                        std::size_t hop = kHop);

/// Hamming-windowed frames; frame t covers [t*hop, t*hop + window).
std::vector<std::vector<double>> frame_signal(const PcmSignal& signal,
                                              std::size_t window = kWindow,
                                              std::size_t hop = kHop);

/// In-place iterative radix-2 FFT plan for one power-of-two size.
class Fft {
 public:
  explicit Fft(std::size_t size);
  std::size_t size() const { return size_; }
  void forward(std::vector<std::complex<double>>& data) const;

 private:
  std::size_t size_;
  std::vector<std::complex<double>> twiddles_;
  std::vector<std::size_t> bit_reverse_;
};

/// |DFT(frame)[k]|^2 for k = 0..size/2. Frame length must be a power of two.
std::vector<double> power_spectrum(std::span<const double> frame);
std::vector<double> power_spectrum(std::span<const double> frame, const Fft& plan);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Row-major bands x (n_fft/2 + 1) matrix of unit-peak triangular filters.
struct MelFilterbank {
  std::size_t bands = 0;
  std::size_t bins = 0;
  std::vector<double> weights;
  std::vector<double> centers_hz;

  double at(std::size_t band, std::size_t bin) const { return weights[band * bins + bin]; }
  /// out[b] = sum_k weights[b][k] * power[k], computed with the active SIMD gemv.
  std::vector<double> apply(std::span<const double> power) const;
};

MelFilterbank mel_filterbank(std::size_t n_mels = kMelBands, std::size_t n_fft = kWindow,
                             int sample_rate = kSampleRate);

/// Log mel-band energies for every frame, ln(max(energy, kLogFloor)).
FeatureMatrix extract_features(const PcmSignal& signal);

/// "ACF1" feature file: magic, u32 version, u32 T, u32 bands, then f32
/// values row-major, all little-endian.
void write_feature_file(const std::filesystem::path& path, const FeatureMatrix& features);
FeatureMatrix read_feature_file(const std::filesystem::path& path);

}  // namespace acap::audio

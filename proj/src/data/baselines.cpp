// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "acap/data_prep.hpp"
#include "acap/errors.hpp"

namespace acap::data {

Tokens random_caption_baseline(const Vocabulary& vocab, std::mt19937_64& rng, std::size_t max_words) {
  if (vocab.size() < 2) throw ConfigError("random-words baseline needs at least one non-EOS word");
  if (max_words == 0) throw ConfigError("random-words baseline needs max_words >= 1");
  std::uniform_int_distribution<std::size_t> length(1, max_words);
  std::uniform_int_distribution<int> word(1, static_cast<int>(vocab.size()) - 1);
  const std::size_t n = length(rng);
  Tokens out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(vocab.word(word(rng)));
  return out;
}

FeatureDistribution FeatureDistribution::fit(std::span<const audio::FeatureMatrix> training) {
  if (training.empty()) throw ConfigError("random-input baseline needs training features");
  FeatureDistribution d;
  const std::size_t bands = training[0].bands;
  d.frames = training[0].frames;
  d.mean.assign(bands, 0.0);
  d.stddev.assign(bands, 0.0);
  double count = 0.0;
  for (const audio::FeatureMatrix& f : training) {
    if (f.bands != bands) throw DimensionError("training features disagree on band count");
    for (std::size_t t = 0; t < f.frames; ++t) {
      for (std::size_t b = 0; b < bands; ++b) d.mean[b] += f.at(t, b);
    }
    count += static_cast<double>(f.frames);
  }
  if (count == 0.0) throw ConfigError("training features have no frames");
  for (double& m : d.mean) m /= count;
  // Second pass keeps the variance exact for constant columns.
  for (const audio::FeatureMatrix& f : training) {
    for (std::size_t t = 0; t < f.frames; ++t) {
      for (std::size_t b = 0; b < bands; ++b) {
        const double dev = f.at(t, b) - d.mean[b];
        d.stddev[b] += dev * dev;
      }
    }
  }
  for (double& s : d.stddev) s = std::sqrt(s / count);
  return d;
}

audio::FeatureMatrix random_input_baseline(const FeatureDistribution& dist, std::mt19937_64& rng) {
  audio::FeatureMatrix out;
  out.frames = dist.frames;
  out.bands = dist.mean.size();
  out.values.resize(out.frames * out.bands);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t t = 0; t < out.frames; ++t) {
    for (std::size_t b = 0; b < out.bands; ++b) {
      const double z = normal(rng);
      out.values[t * out.bands + b] = dist.stddev[b] > 0.0 ? dist.mean[b] + dist.stddev[b] * z : dist.mean[b];
    }
  }
  return out;
}

audio::FeatureMatrix random_input_baseline(std::span<const audio::FeatureMatrix> training,
                                           std::mt19937_64& rng) {
  return random_input_baseline(FeatureDistribution::fit(training), rng);
}

}  // namespace acap::data

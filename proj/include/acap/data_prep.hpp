// SPDX-License-Identifier: Apache-2.0
//
// Caption cleaning, vocabulary construction, split selection, target
// encoding, and the random-words / random-input baselines.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "acap/audio_features.hpp"
#include "acap/vocabulary.hpp"

namespace acap::data {

using Tokens = std::vector<std::string>;

using Dictionary = std::unordered_set<std::string>;

/// Word list, one word per line; entries are lowercased.
Dictionary load_dictionary(const std::filesystem::path& path);

/// Lowercase, drop punctuation, split on whitespace, drop words missing from
/// `dictionary` (when given), collapse runs of identical adjacent words.
Tokens normalize_caption(const std::string& raw, const Dictionary* dictionary = nullptr);

std::vector<std::string> split_whitespace(const std::string& text);
std::string join(const Tokens& tokens, const char* sep = " ");

struct CaptionRecord {
  std::string id;
  std::string audio_path;
  std::string raw_caption;
  Tokens tokens;
  std::vector<int> targets;  // empty until encoded
};

// ---- CSV manifest ----------------------------------------------------------

using CsvRow = std::vector<std::string>;

/// RFC 4180-style reader: quoted fields, doubled quotes, CRLF tolerated.
std::vector<CsvRow> read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const std::vector<CsvRow>& rows);
std::string csv_escape(const std::string& field);

/// Manifest with header id,audio_path,caption. Tokens left empty.
std::vector<CaptionRecord> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const std::vector<CaptionRecord>& records);

// ---- splits ----------------------------------------------------------------

struct SplitSet {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;
  std::uint64_t seed = 0;
  std::size_t candidate_index = 0;
  std::size_t score = 0;

  void save(const std::filesystem::path& path) const;
  static SplitSet load(const std::filesystem::path& path);

  friend bool operator==(const SplitSet&, const SplitSet&) = default;
};

struct SplitSizes {
  std::size_t train = 0, validation = 0, test = 0;
};

/// Target sizes for a 60/20/20 partition of `n` records.
SplitSizes split_targets(std::size_t n);

/// Words with at least `min_count` occurrences in every split.
std::size_t common_word_score(const std::vector<CaptionRecord>& records, const SplitSet& split,
                              std::size_t min_count = 5);

/// One random 60/20/20 partition where captions shared by several records
/// never straddle test and train/validation. Deterministic in (seed, index).
SplitSet random_split(const std::vector<CaptionRecord>& records, std::uint64_t seed, std::size_t index);

/// Draws `n_candidates` partitions, returns the one with the highest
/// common-word score (lowest index wins ties). Throws SplitError when the
/// test constraint cannot be met.
SplitSet generate_split_candidates(const std::vector<CaptionRecord>& records, std::size_t n_candidates,
                                   std::uint64_t seed, std::size_t min_count = 5,
                                   std::size_t threads = 0);

// ---- vocabulary and targets -----------------------------------------------

/// Words occurring >= min_count times in each of the three splits, ordered
/// by descending total count then lexicographically, with EOS at index 0.
Vocabulary build_vocabulary(const std::vector<CaptionRecord>& records, const SplitSet& split,
                            std::size_t min_count = 5);

/// Drops out-of-vocabulary words, keeps the first steps-1 words, appends EOS
/// and pads with EOS to `steps`. nullopt means the record must be excluded.
std::optional<std::vector<int>> encode_caption(const Tokens& tokens, const Vocabulary& vocab,
                                               std::size_t steps = 11);

// ---- baselines -------------------------------------------------------------

/// 1..max_words words drawn uniformly from the vocabulary, EOS excluded.
Tokens random_caption_baseline(const Vocabulary& vocab, std::mt19937_64& rng, std::size_t max_words = 10);

/// Per-band Gaussian fitted to training features.
struct FeatureDistribution {
  std::vector<double> mean;
  std::vector<double> stddev;
  std::size_t frames = 0;

  static FeatureDistribution fit(std::span<const audio::FeatureMatrix> training);
};

audio::FeatureMatrix random_input_baseline(const FeatureDistribution& dist, std::mt19937_64& rng);
audio::FeatureMatrix random_input_baseline(std::span<const audio::FeatureMatrix> training,
                                           std::mt19937_64& rng);

}  // namespace acap::data

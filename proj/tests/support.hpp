// SPDX-License-Identifier: Apache-2.0
//
// Shared fixtures for the unit tests and the acceptance suite.
#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "acap/data_prep.hpp"
#include "acap/metrics.hpp"
#include "acap/training.hpp"

namespace acap::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

ng::Tensor random_tensor(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double scale = 1.0);

/// Parameters with every entry drawn from N(0, scale^2).
model::ModelParams random_params(const model::ModelConfig& config, std::mt19937_64& rng, double scale);

/// 16 tiny-config records: Gaussian-noise features, captions of one or two
/// words followed by EOS.
std::vector<training::EncodedRecord> overfit_records(std::uint64_t seed);

/// Adam defaults, batch size 1, no dropout, 500 epochs, no early stopping.
training::TrainConfig overfit_train_config(std::uint64_t seed);

/// Expected greedy output of a record: its targets cut at the first EOS.
std::vector<int> expected_indices(const training::EncodedRecord& record);

/// Captions of 3..9 words over a Zipf-weighted pool of `pool` words; about
/// 10% of records share their caption with another record.
std::vector<data::CaptionRecord> synthetic_corpus(std::size_t n_records, std::size_t pool, std::uint64_t seed);

/// Exhaustive check that no test caption occurs in train or validation.
std::size_t test_caption_overlap(const std::vector<data::CaptionRecord>& records, const data::SplitSet& split);

/// Vocabulary of `n_words` synthetic words plus EOS.
Vocabulary synthetic_vocabulary(std::size_t n_words);

/// Reference corpus of `n_pairs` captions (3..10 words), Zipf-weighted over `vocab`.
std::vector<metrics::Tokens> synthetic_references(const Vocabulary& vocab, std::size_t n_pairs, std::uint64_t seed);

std::vector<metrics::Tokens> tokens_of(const std::vector<std::string>& lines);

/// Fixed 10-pair corpus with one or two references per pair.
std::vector<metrics::EvalPair> oracle_corpus();

struct MetricOracle {
  std::string name;
  double computed = 0.0;
  double expected = 0.0;
};

/// Metric values on small inputs next to independently computed values:
/// hand computations plus reference numbers for oracle_corpus().
std::vector<MetricOracle> metric_oracles();

}  // namespace acap::testing

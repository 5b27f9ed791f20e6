// SPDX-License-Identifier: Apache-2.0
//
// Corpus caption metrics over whitespace tokens: BLEU 1-4, ROUGE-L, METEOR
// (exact + stem stages) and CIDEr-D.
#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace acap::metrics {

using Tokens = std::vector<std::string>;

struct EvalPair {
  Tokens candidate;
  std::vector<Tokens> references;
};

/// Throws ConfigError on an empty corpus or a pair without references.
void check_corpus(std::span<const EvalPair> pairs);

// ---- BLEU ------------------------------------------------------------------

/// Corpus BLEU with clipped n-gram counts and the closest-reference brevity
/// penalty (ties take the shorter reference). Any zero precision gives 0.
double bleu(std::span<const EvalPair> pairs, int n);

struct BleuStats {
  std::array<double, 4> matches{};
  std::array<double, 4> totals{};
  double candidate_length = 0.0;
  double reference_length = 0.0;
};

BleuStats bleu_stats(std::span<const EvalPair> pairs);
double bleu_from_stats(const BleuStats& stats, int n);

// ---- ROUGE-L ---------------------------------------------------------------

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

/// Max over references of the LCS F-measure with the given beta.
double rouge_l_pair(const Tokens& candidate, std::span<const Tokens> references, double beta = 1.2);

/// Mean of rouge_l_pair over the corpus.
double rouge_l(std::span<const EvalPair> pairs, double beta = 1.2);

// ---- METEOR ----------------------------------------------------------------

/// Original Porter (1980) suffix stripper on a lowercase ASCII word.
std::string porter_stem(const std::string& word);

struct MatchStage {
  std::string name;
  std::function<bool(const std::string& candidate, const std::string& reference)> matches;
};

MatchStage exact_stage();
MatchStage stem_stage();
std::vector<MatchStage> default_stages();

struct MeteorParams {
  double alpha = 0.9;
  double beta = 3.0;
  double gamma = 0.5;
  /// Search nodes per alignment before keeping the best found so far.
  std::size_t node_limit = 200000;
};

struct MeteorAlignment {
  std::size_t matches = 0;
  std::size_t chunks = 0;
  /// Reference index aligned to each candidate position, or -1.
  std::vector<int> reference_of;
};

/// Alignment with the most matches, then the fewest chunks. A candidate and
/// reference word can align when any stage accepts them.
MeteorAlignment meteor_align(const Tokens& candidate, const Tokens& reference,
                             std::span<const MatchStage> stages,
                             std::size_t node_limit = MeteorParams{}.node_limit);

struct MeteorDetail {
  std::size_t matches = 0;
  std::size_t chunks = 0;
  double precision = 0.0;
  double recall = 0.0;
  double fmean = 0.0;
  double penalty = 0.0;
  double score = 0.0;
};

MeteorDetail meteor_detail(const Tokens& candidate, const Tokens& reference,
                           std::span<const MatchStage> stages, const MeteorParams& params = {});

/// Max over references.
double meteor_pair(const Tokens& candidate, std::span<const Tokens> references,
                   std::span<const MatchStage> stages, const MeteorParams& params = {});

double meteor(std::span<const EvalPair> pairs, std::span<const MatchStage> stages,
              const MeteorParams& params = {});
double meteor(std::span<const EvalPair> pairs);

// ---- CIDEr-D ---------------------------------------------------------------

struct CiderParams {
  double sigma = 6.0;
  int max_n = 4;
};

/// Per-pair CIDEr-D with document frequencies taken over the corpus
/// references (one document per pair).
std::vector<double> cider_d_scores(std::span<const EvalPair> pairs, const CiderParams& params = {});
double cider_d(std::span<const EvalPair> pairs, const CiderParams& params = {});

// ---- reports ---------------------------------------------------------------

/// Metric names in report order.
const std::vector<std::string>& metric_names();

using CorpusScores = std::map<std::string, double>;

/// Scores for the selected metrics (all when empty). Throws ConfigError on an
/// unknown name.
CorpusScores evaluate_corpus(std::span<const EvalPair> pairs, std::span<const std::string> selection = {});

/// Per-pair scores: sentence BLEU_1..4 (corpus of one), ROUGE_L, METEOR and
/// CIDEr-D with corpus-level document frequencies.
std::vector<CorpusScores> per_pair_scores(std::span<const EvalPair> pairs);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

struct MetricReport {
  std::map<std::string, MeanStd> metrics;
  std::size_t runs = 0;
  std::vector<std::string> notes;
};

/// Mean and population standard deviation across runs.
MetricReport summarize(std::span<const CorpusScores> runs);

std::string report_json(const MetricReport& report);
void write_report(const std::filesystem::path& path, const MetricReport& report);
void write_per_pair_csv(const std::filesystem::path& path, std::span<const std::string> ids,
                        std::span<const CorpusScores> scores);

/// One line per metric: "name  mean ±std".
std::string format_table(const MetricReport& report);

}  // namespace acap::metrics

// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <map>

#include "acap/errors.hpp"
#include "acap/metrics.hpp"

namespace acap::metrics {

namespace {

using Ngram = std::vector<std::string>;
using Counts = std::map<Ngram, double>;

std::vector<Counts> count_ngrams(const Tokens& tokens, int max_n) {
  std::vector<Counts> out(static_cast<std::size_t>(max_n));
  for (int n = 1; n <= max_n; ++n) {
    const auto un = static_cast<std::size_t>(n);
    for (std::size_t i = 0; i + un <= tokens.size(); ++i) {
      out[un - 1][Ngram(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                        tokens.begin() + static_cast<std::ptrdiff_t>(i + un))] += 1.0;
    }
  }
  return out;
}

struct Weighted {
  std::vector<Counts> vec;
  std::vector<double> norm;
  double length = 0.0;
};

Weighted weigh(const std::vector<Counts>& counts, const std::map<Ngram, double>& df, double log_docs,
               std::size_t length) {
  Weighted w;
  w.vec.resize(counts.size());
  w.norm.assign(counts.size(), 0.0);
  w.length = static_cast<double>(length);
  for (std::size_t n = 0; n < counts.size(); ++n) {
    for (const auto& [g, tf] : counts[n]) {
      const auto it = df.find(g);
      const double d = it == df.end() ? 0.0 : it->second;
      const double v = tf * (log_docs - std::log(std::max(1.0, d)));
      w.vec[n][g] = v;
      w.norm[n] += v * v;
    }
    w.norm[n] = std::sqrt(w.norm[n]);
  }
  return w;
}

std::vector<double> similarity(const Weighted& hyp, const Weighted& ref, double sigma) {
  const double delta = hyp.length - ref.length;
  const double penalty = std::exp(-(delta * delta) / (2.0 * sigma * sigma));
  std::vector<double> out(hyp.vec.size(), 0.0);
  for (std::size_t n = 0; n < hyp.vec.size(); ++n) {
    double val = 0.0;
    for (const auto& [g, h] : hyp.vec[n]) {
      const auto it = ref.vec[n].find(g);
      if (it != ref.vec[n].end()) val += std::min(h, it->second) * it->second;
    }
    if (hyp.norm[n] != 0.0 && ref.norm[n] != 0.0) {
      val /= hyp.norm[n] * ref.norm[n];
    } else {
      val = 0.0;
    }
    out[n] = val * penalty;
  }
  return out;
}

}  // namespace

std::vector<double> cider_d_scores(std::span<const EvalPair> pairs, const CiderParams& params) {
  check_corpus(pairs);
  if (params.max_n < 1) throw ConfigError("CIDEr-D max_n must be >= 1");
  std::vector<std::vector<std::vector<Counts>>> ref_counts(pairs.size());
  std::map<Ngram, double> df;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    std::map<Ngram, bool> seen;
    for (const Tokens& r : pairs[i].references) {
      ref_counts[i].push_back(count_ngrams(r, params.max_n));
      for (const Counts& c : ref_counts[i].back()) {
        for (const auto& entry : c) seen[entry.first] = true;
      }
    }
    for (const auto& entry : seen) df[entry.first] += 1.0;
  }
  const double log_docs = std::log(static_cast<double>(pairs.size()));

  std::vector<double> scores(pairs.size(), 0.0);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const Weighted hyp = weigh(count_ngrams(pairs[i].candidate, params.max_n), df, log_docs,
                               pairs[i].candidate.size());
    std::vector<double> per_n(static_cast<std::size_t>(params.max_n), 0.0);
    for (std::size_t k = 0; k < pairs[i].references.size(); ++k) {
      const Weighted ref = weigh(ref_counts[i][k], df, log_docs, pairs[i].references[k].size());
      const std::vector<double> s = similarity(hyp, ref, params.sigma);
      for (std::size_t n = 0; n < s.size(); ++n) per_n[n] += s[n];
    }
    double mean = 0.0;
    for (double v : per_n) mean += v;
    mean /= static_cast<double>(per_n.size());
    scores[i] = 10.0 * mean / static_cast<double>(pairs[i].references.size());
  }
  return scores;
}

double cider_d(std::span<const EvalPair> pairs, const CiderParams& params) {
  const std::vector<double> s = cider_d_scores(pairs, params);
  double total = 0.0;
  for (double v : s) total += v;
  return total / static_cast<double>(s.size());
}

}  // namespace acap::metrics

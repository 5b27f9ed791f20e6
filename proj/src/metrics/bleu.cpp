// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>

#include "acap/errors.hpp"
#include "acap/metrics.hpp"

namespace acap::metrics {

void check_corpus(std::span<const EvalPair> pairs) {
  if (pairs.empty()) throw ConfigError("empty evaluation corpus");
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (pairs[i].references.empty()) throw ConfigError("pair " + std::to_string(i) + " has no references");
  }
}

namespace {

using NgramCounts = std::map<std::vector<std::string>, int>;

NgramCounts ngrams(const Tokens& tokens, std::size_t n) {
  NgramCounts out;
  if (tokens.size() < n) return out;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++out[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                   tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return out;
}

std::size_t closest_reference_length(std::size_t c, std::span<const Tokens> refs) {
  std::size_t best = refs[0].size();
  for (const Tokens& r : refs) {
    const auto d = [c](std::size_t len) { return len > c ? len - c : c - len; };
    if (d(r.size()) < d(best) || (d(r.size()) == d(best) && r.size() < best)) best = r.size();
  }
  return best;
}

}  // namespace

BleuStats bleu_stats(std::span<const EvalPair> pairs) {
  check_corpus(pairs);
  BleuStats s;
  for (const EvalPair& p : pairs) {
    s.candidate_length += static_cast<double>(p.candidate.size());
    s.reference_length += static_cast<double>(closest_reference_length(p.candidate.size(), p.references));
    for (std::size_t n = 1; n <= 4; ++n) {
      const NgramCounts cand = ngrams(p.candidate, n);
      NgramCounts max_ref;
      for (const Tokens& r : p.references) {
        for (const auto& [g, c] : ngrams(r, n)) max_ref[g] = std::max(max_ref[g], c);
      }
      for (const auto& [g, c] : cand) {
        const auto it = max_ref.find(g);
        s.matches[n - 1] += it == max_ref.end() ? 0 : std::min(c, it->second);
        s.totals[n - 1] += c;
      }
    }
  }
  return s;
}

double bleu_from_stats(const BleuStats& s, int n) {
  if (n < 1 || n > 4) throw ConfigError("BLEU order must be in 1..4");
  double log_sum = 0.0;
  for (int k = 0; k < n; ++k) {
    if (s.totals[k] == 0.0 || s.matches[k] == 0.0) return 0.0;
    log_sum += std::log(s.matches[k] / s.totals[k]);
  }
  const double c = s.candidate_length;
  const double r = s.reference_length;
  const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
  return bp * std::exp(log_sum / n);
}

double bleu(std::span<const EvalPair> pairs, int n) {
  if (n < 1 || n > 4) throw ConfigError("BLEU order must be in 1..4");
  return bleu_from_stats(bleu_stats(pairs), n);
}

}  // namespace acap::metrics

// SPDX-License-Identifier: Apache-2.0
#include <algorithm>

#include "acap/errors.hpp"
#include "acap/metrics.hpp"

namespace acap::metrics {

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l_pair(const Tokens& candidate, std::span<const Tokens> references, double beta) {
  double best = 0.0;
  for (const Tokens& ref : references) {
    if (candidate.empty() || ref.empty()) continue;
    const double lcs = static_cast<double>(lcs_length(candidate, ref));
    const double p = lcs / static_cast<double>(candidate.size());
    const double r = lcs / static_cast<double>(ref.size());
    if (p + r == 0.0) continue;
    const double b2 = beta * beta;
    best = std::max(best, (1.0 + b2) * r * p / (r + b2 * p));
  }
  return best;
}

double rouge_l(std::span<const EvalPair> pairs, double beta) {
  check_corpus(pairs);
  double total = 0.0;
  for (const EvalPair& p : pairs) total += rouge_l_pair(p.candidate, p.references, beta);
  return total / static_cast<double>(pairs.size());
}

}  // namespace acap::metrics

// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>

#include "acap/errors.hpp"
#include "acap/metrics.hpp"

namespace acap::metrics {

MatchStage exact_stage() {
  return {"exact", [](const std::string& a, const std::string& b) { return a == b; }};
}

MatchStage stem_stage() {
  return {"stem", [](const std::string& a, const std::string& b) { return porter_stem(a) == porter_stem(b); }};
}

std::vector<MatchStage> default_stages() { return {exact_stage(), stem_stage()}; }

namespace {

using Edges = std::vector<std::vector<int>>;

bool augment(const Edges& edges, int u, std::vector<int>& match_ref, std::vector<char>& seen) {
  for (int v : edges[static_cast<std::size_t>(u)]) {
    if (seen[static_cast<std::size_t>(v)]) continue;
    seen[static_cast<std::size_t>(v)] = 1;
    if (match_ref[static_cast<std::size_t>(v)] < 0 ||
        augment(edges, match_ref[static_cast<std::size_t>(v)], match_ref, seen)) {
      match_ref[static_cast<std::size_t>(v)] = u;
      return true;
    }
  }
  return false;
}

std::size_t maximum_matching(const Edges& edges, std::size_t n_ref) {
  std::vector<int> match_ref(n_ref, -1);
  std::size_t m = 0;
  for (std::size_t u = 0; u < edges.size(); ++u) {
    std::vector<char> seen(n_ref, 0);
    if (augment(edges, static_cast<int>(u), match_ref, seen)) ++m;
  }
  return m;
}

std::size_t count_chunks(const std::vector<int>& reference_of) {
  std::size_t chunks = 0;
  int prev_cand = -2;
  int prev_ref = -2;
  for (std::size_t i = 0; i < reference_of.size(); ++i) {
    const int r = reference_of[i];
    if (r < 0) continue;
    if (static_cast<int>(i) != prev_cand + 1 || r != prev_ref + 1) ++chunks;
    prev_cand = static_cast<int>(i);
    prev_ref = r;
  }
  return chunks;
}

// Depth-first search over candidate positions for an alignment of exactly
// `target` matches with the fewest chunks.
class ChunkSearch {
 public:
  ChunkSearch(const Edges& edges, std::size_t n_ref, std::size_t target, std::size_t node_limit)
      : edges_(edges), target_(target), node_limit_(node_limit), used_(n_ref, 0),
        current_(edges.size(), -1), reachable_suffix_(edges.size() + 1, 0) {
    for (std::size_t i = edges.size(); i-- > 0;) {
      reachable_suffix_[i] = reachable_suffix_[i + 1] + (edges[i].empty() ? 0 : 1);
    }
  }

  MeteorAlignment run() {
    visit(0, 0, 0, -2, -2);
    MeteorAlignment a;
    a.matches = target_;
    a.chunks = best_chunks_;
    a.reference_of = best_;
    return a;
  }

 private:
  void visit(std::size_t i, std::size_t matched, std::size_t chunks, int prev_cand, int prev_ref) {
    if (++nodes_ > node_limit_ && found_) return;
    if (chunks >= best_chunks_ && found_) return;
    if (matched == target_) {
      best_chunks_ = chunks;
      best_ = current_;
      found_ = true;
      return;
    }
    if (i == edges_.size() || matched + reachable_suffix_[i] < target_) return;

    // Continuing the current chunk first finds good bounds early.
    std::vector<int> order = edges_[i];
    const int continuation = prev_cand == static_cast<int>(i) - 1 ? prev_ref + 1 : -3;
    std::stable_partition(order.begin(), order.end(), [&](int r) { return r == continuation; });
    for (int r : order) {
      if (used_[static_cast<std::size_t>(r)]) continue;
      const bool extends = static_cast<int>(i) == prev_cand + 1 && r == prev_ref + 1;
      used_[static_cast<std::size_t>(r)] = 1;
      current_[i] = r;
      visit(i + 1, matched + 1, chunks + (extends ? 0 : 1), static_cast<int>(i), r);
      current_[i] = -1;
      used_[static_cast<std::size_t>(r)] = 0;
    }
    visit(i + 1, matched, chunks, prev_cand, prev_ref);
  }

  const Edges& edges_;
  std::size_t target_;
  std::size_t node_limit_;
  std::vector<char> used_;
  std::vector<int> current_;
  std::vector<std::size_t> reachable_suffix_;
  std::vector<int> best_;
  std::size_t best_chunks_ = static_cast<std::size_t>(-1);
  std::size_t nodes_ = 0;
  bool found_ = false;
};

}  // namespace

MeteorAlignment meteor_align(const Tokens& candidate, const Tokens& reference, std::span<const MatchStage> stages,
                             std::size_t node_limit) {
  if (stages.empty()) throw ConfigError("METEOR needs at least one match stage");
  Edges edges(candidate.size());
  for (std::size_t i = 0; i < candidate.size(); ++i) {
    for (std::size_t j = 0; j < reference.size(); ++j) {
      for (const MatchStage& s : stages) {
        if (s.matches(candidate[i], reference[j])) {
          edges[i].push_back(static_cast<int>(j));
          break;
        }
      }
    }
  }
  const std::size_t target = maximum_matching(edges, reference.size());
  MeteorAlignment a;
  a.reference_of.assign(candidate.size(), -1);
  if (target == 0) return a;
  a = ChunkSearch(edges, reference.size(), target, node_limit).run();
  a.chunks = count_chunks(a.reference_of);
  return a;
}

MeteorDetail meteor_detail(const Tokens& candidate, const Tokens& reference, std::span<const MatchStage> stages,
                           const MeteorParams& params) {
  MeteorDetail d;
  const MeteorAlignment a = meteor_align(candidate, reference, stages, params.node_limit);
  d.matches = a.matches;
  d.chunks = a.chunks;
  if (d.matches == 0) return d;
  const double m = static_cast<double>(d.matches);
  d.precision = m / static_cast<double>(candidate.size());
  d.recall = m / static_cast<double>(reference.size());
  d.fmean = d.precision * d.recall / (params.alpha * d.precision + (1.0 - params.alpha) * d.recall);
  d.penalty = params.gamma * std::pow(static_cast<double>(d.chunks) / m, params.beta);
  d.score = d.fmean * (1.0 - d.penalty);
  return d;
}

double meteor_pair(const Tokens& candidate, std::span<const Tokens> references, std::span<const MatchStage> stages,
                   const MeteorParams& params) {
  double best = 0.0;
  for (const Tokens& r : references) best = std::max(best, meteor_detail(candidate, r, stages, params).score);
  return best;
}

double meteor(std::span<const EvalPair> pairs, std::span<const MatchStage> stages, const MeteorParams& params) {
  check_corpus(pairs);
  double total = 0.0;
  for (const EvalPair& p : pairs) total += meteor_pair(p.candidate, p.references, stages, params);
  return total / static_cast<double>(pairs.size());
}

double meteor(std::span<const EvalPair> pairs) {
  const std::vector<MatchStage> stages = default_stages();
  return meteor(pairs, stages);
}

}  // namespace acap::metrics

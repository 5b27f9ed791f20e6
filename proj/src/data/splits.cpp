// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <thread>
#include <unordered_map>

#include "acap/data_prep.hpp"
#include "acap/errors.hpp"
#include "json.hpp"

namespace acap::data {
namespace {

// Records reduced to interned word ids and caption groups, shared by every
// candidate.
struct Corpus {
  std::vector<std::vector<std::uint32_t>> words;  // per record
  std::vector<std::vector<std::size_t>> groups;   // records sharing one caption
  std::size_t vocab = 0;
};

Corpus intern(const std::vector<CaptionRecord>& records) {
  Corpus c;
  std::unordered_map<std::string, std::uint32_t> ids;
  std::map<Tokens, std::size_t> group_of;
  c.words.resize(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    for (const std::string& w : records[i].tokens) {
      const auto [it, added] = ids.emplace(w, static_cast<std::uint32_t>(ids.size()));
      c.words[i].push_back(it->second);
    }
    const auto [g, fresh] = group_of.emplace(records[i].tokens, c.groups.size());
    if (fresh) c.groups.emplace_back();
    c.groups[g->second].push_back(i);
  }
  c.vocab = ids.size();
  return c;
}

struct IndexSplit {
  std::array<std::vector<std::size_t>, 3> parts;  // train, validation, test
};

std::mt19937_64 candidate_rng(std::uint64_t seed, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

IndexSplit draw(const Corpus& c, std::uint64_t seed, std::size_t index) {
  const std::size_t n = c.words.size();
  const SplitSizes target = split_targets(n);
  std::mt19937_64 rng = candidate_rng(seed, index);

  // Test takes whole caption groups so none of its captions appear elsewhere.
  std::vector<std::size_t> order(c.groups.size());
  for (std::size_t g = 0; g < order.size(); ++g) order[g] = g;
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<char> in_test(n, 0);
  std::size_t test_size = 0;
  for (std::size_t g : order) {
    if (test_size == target.test) break;
    const std::size_t size = c.groups[g].size();
    if (test_size + size > target.test) continue;
    for (std::size_t r : c.groups[g]) in_test[r] = 1;
    test_size += size;
  }

  std::vector<std::size_t> rest;
  for (std::size_t r = 0; r < n; ++r) {
    if (!in_test[r]) rest.push_back(r);
  }
  std::shuffle(rest.begin(), rest.end(), rng);
  const std::size_t n_train = std::min(target.train, rest.size());

  if (test_size == 0 || n_train == 0 || n_train == rest.size()) {
    throw SplitError("cannot build a test split whose captions are absent from train/validation "
                     "(captions too repetitive or too few records)");
  }

  IndexSplit s;
  std::vector<char> which(n, 2);
  for (std::size_t i = 0; i < rest.size(); ++i) which[rest[i]] = i < n_train ? 0 : 1;
  for (std::size_t r = 0; r < n; ++r) s.parts[static_cast<std::size_t>(which[r])].push_back(r);
  return s;
}

std::size_t score(const Corpus& c, const IndexSplit& s, std::size_t min_count) {
  std::vector<std::array<std::uint32_t, 3>> counts(c.vocab, {0, 0, 0});
  for (std::size_t p = 0; p < 3; ++p) {
    for (std::size_t r : s.parts[p]) {
      for (std::uint32_t w : c.words[r]) ++counts[w][p];
    }
  }
  std::size_t total = 0;
  for (const auto& cnt : counts) {
    if (cnt[0] >= min_count && cnt[1] >= min_count && cnt[2] >= min_count) ++total;
  }
  return total;
}

SplitSet to_ids(const std::vector<CaptionRecord>& records, const IndexSplit& s, std::uint64_t seed,
                std::size_t index, std::size_t sc) {
  SplitSet out;
  std::vector<std::string>* dst[3] = {&out.train, &out.validation, &out.test};
  for (std::size_t p = 0; p < 3; ++p) {
    for (std::size_t r : s.parts[p]) dst[p]->push_back(records[r].id);
  }
  out.seed = seed;
  out.candidate_index = index;
  out.score = sc;
  return out;
}

}  // namespace

SplitSizes split_targets(std::size_t n) {
  SplitSizes s;
  s.test = static_cast<std::size_t>(std::llround(0.2 * static_cast<double>(n)));
  s.validation = s.test;
  s.train = n - s.test - s.validation;
  return s;
}

std::size_t common_word_score(const std::vector<CaptionRecord>& records, const SplitSet& split,
                              std::size_t min_count) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < records.size(); ++i) index.emplace(records[i].id, i);
  const Corpus c = intern(records);
  IndexSplit s;
  const std::vector<std::string>* src[3] = {&split.train, &split.validation, &split.test};
  for (std::size_t p = 0; p < 3; ++p) {
    for (const std::string& id : *src[p]) {
      const auto it = index.find(id);
      if (it == index.end()) throw ConfigError("split references unknown record id '" + id + "'");
      s.parts[p].push_back(it->second);
    }
  }
  return score(c, s, min_count);
}

SplitSet random_split(const std::vector<CaptionRecord>& records, std::uint64_t seed, std::size_t index) {
  const Corpus c = intern(records);
  const IndexSplit s = draw(c, seed, index);
  return to_ids(records, s, seed, index, score(c, s, 5));
}

SplitSet generate_split_candidates(const std::vector<CaptionRecord>& records, std::size_t n_candidates,
                                   std::uint64_t seed, std::size_t min_count, std::size_t threads) {
  if (n_candidates == 0) throw ConfigError("need at least one split candidate");
  if (records.size() < 5) throw SplitError("need at least 5 records to split 60/20/20");
  const Corpus c = intern(records);

  std::vector<std::size_t> scores(n_candidates);
  std::vector<std::exception_ptr> errors(n_candidates);
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = std::min(threads, n_candidates);
  auto work = [&](std::size_t worker) {
    for (std::size_t k = worker; k < n_candidates; k += threads) {
      try {
        scores[k] = score(c, draw(c, seed, k), min_count);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < threads; ++w) pool.emplace_back(work, w);
  work(0);
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::size_t best = 0;
  for (std::size_t k = 1; k < n_candidates; ++k) {
    if (scores[k] > scores[best]) best = k;
  }
  return to_ids(records, draw(c, seed, best), seed, best, scores[best]);
}

void SplitSet::save(const std::filesystem::path& path) const {
  nlohmann::json j;
  j["seed"] = seed;
  j["candidate_index"] = candidate_index;
  j["score"] = score;
  j["train"] = train;
  j["val"] = validation;
  j["test"] = test;
  std::ofstream out(path);
  if (!out) throw IoError("cannot write splits file " + path.string());
  out << j.dump(2) << '\n';
}

SplitSet SplitSet::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open splits file " + path.string());
  try {
    const nlohmann::json j = nlohmann::json::parse(in);
    SplitSet s;
    s.train = j.at("train").get<std::vector<std::string>>();
    s.validation = j.at("val").get<std::vector<std::string>>();
    s.test = j.at("test").get<std::vector<std::string>>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.candidate_index = j.value("candidate_index", std::size_t{0});
    s.score = j.value("score", std::size_t{0});
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace acap::data

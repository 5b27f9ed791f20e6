// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "acap/errors.hpp"
#include "acap/metrics.hpp"
#include "json.hpp"
#include "support.hpp"

using namespace acap;
using namespace acap::metrics;

namespace {

std::vector<EvalPair> one(const std::string& cand, const std::string& ref) {
  return {{data::split_whitespace(cand), {data::split_whitespace(ref)}}};
}

std::vector<EvalPair> random_corpus(std::mt19937_64& rng, std::size_t n, std::size_t pool) {
  const Vocabulary v = testing::synthetic_vocabulary(pool);
  std::uniform_int_distribution<std::size_t> len(1, 8), word(1, pool), refs(1, 3);
  std::vector<EvalPair> out(n);
  for (EvalPair& p : out) {
    for (std::size_t k = len(rng); k > 0; --k) p.candidate.push_back(v.word(static_cast<int>(word(rng))));
    for (std::size_t r = refs(rng); r > 0; --r) {
      Tokens t;
      for (std::size_t k = len(rng); k > 0; --k) t.push_back(v.word(static_cast<int>(word(rng))));
      p.references.push_back(std::move(t));
    }
  }
  return out;
}

// Exhaustive search over injective candidate -> reference maps: most
// matches, then fewest chunks.
std::pair<std::size_t, std::size_t> brute_alignment(const Tokens& c, const Tokens& r) {
  auto ok = [](const std::string& a, const std::string& b) { return a == b || porter_stem(a) == porter_stem(b); };
  std::pair<std::size_t, std::size_t> best{0, 0};
  std::vector<int> map(c.size(), -1);
  std::vector<char> used(r.size(), 0);
  auto rec = [&](auto&& self, std::size_t i) -> void {
    if (i == c.size()) {
      std::size_t m = 0, chunks = 0;
      int prev_c = -2, prev_r = -2;
      for (std::size_t k = 0; k < c.size(); ++k) {
        if (map[k] < 0) continue;
        ++m;
        if (!(static_cast<int>(k) == prev_c + 1 && map[k] == prev_r + 1)) ++chunks;
        prev_c = static_cast<int>(k);
        prev_r = map[k];
      }
      if (m > best.first || (m == best.first && chunks < best.second)) best = {m, chunks};
      return;
    }
    self(self, i + 1);
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (used[j] || !ok(c[i], r[j])) continue;
      used[j] = 1;
      map[i] = static_cast<int>(j);
      self(self, i + 1);
      map[i] = -1;
      used[j] = 0;
    }
  };
  rec(rec, 0);
  return best;
}

}  // namespace

TEST_CASE("metric oracles") {
  for (const testing::MetricOracle& o : testing::metric_oracles()) {
    CAPTURE(o.name);
    CHECK(std::abs(o.computed - o.expected) < 1e-6);
  }
}

TEST_CASE("BLEU details") {
  const BleuStats s = bleu_stats(one("the the the the the the the", "the cat is on the mat"));
  CHECK(s.matches[0] == 2.0);
  CHECK(s.totals[0] == 7.0);
  CHECK(s.candidate_length == 7.0);
  CHECK(s.reference_length == 6.0);
  // Zero bigram matches zero the whole score.
  CHECK(bleu(one("a b", "b a"), 2) == 0.0);
  // Closest reference length, ties to the shorter one.
  std::vector<EvalPair> tie{{data::split_whitespace("a b c d"), testing::tokens_of({"a b c", "a b c d e"})}};
  CHECK(bleu_stats(tie).reference_length == 3.0);
  CHECK(bleu(tie, 1) == doctest::Approx(1.0));
  std::vector<EvalPair> closer{{data::split_whitespace("a b c"), testing::tokens_of({"a b c d e f g h", "a b c d"})}};
  CHECK(bleu(closer, 1) == doctest::Approx(std::exp(1.0 - 4.0 / 3.0)).epsilon(1e-12));
  // Clipping can make p2 exceed p1.
  const BleuStats up = bleu_stats(one("a b a", "b b a b b"));
  CHECK(up.matches[0] / up.totals[0] == doctest::Approx(2.0 / 3.0));
  CHECK(up.matches[1] / up.totals[1] == 1.0);
  CHECK_THROWS_AS(bleu(one("a", "a"), 5), ConfigError);
  CHECK_THROWS_AS(bleu(std::vector<EvalPair>{}, 1), ConfigError);
  CHECK_THROWS_AS(bleu(std::vector<EvalPair>{{{"a"}, {}}}, 1), ConfigError);
}

TEST_CASE("ROUGE-L details") {
  const Tokens a = data::split_whitespace("a b c d"), b = data::split_whitespace("a c b d");
  CHECK(lcs_length(a, b) == 3);
  CHECK(rouge_l(one("a b", "c d")) == 0.0);
  CHECK(rouge_l(one("a b c", "a b c")) == doctest::Approx(1.0));
  // P = 1, R = 1/2: F = (1 + b^2) R P / (R + b^2 P).
  const double beta2 = 1.2 * 1.2;
  CHECK(rouge_l(one("a b", "a b c d")) == doctest::Approx((1 + beta2) * 0.5 / (0.5 + beta2)).epsilon(1e-14));
  const std::vector<Tokens> refs = testing::tokens_of({"x y", "a b c"});
  CHECK(rouge_l_pair(data::split_whitespace("a b c"), refs) == doctest::Approx(1.0));
}

TEST_CASE("METEOR details") {
  CHECK(meteor(one("a b", "c d")) == 0.0);
  const MeteorDetail d = meteor_detail(data::split_whitespace("the dogs barked"), data::split_whitespace("dog barking the"),
                                       default_stages());
  CHECK(d.matches == 3);
  CHECK(d.chunks == 2);
  const auto exact = std::vector<MatchStage>{exact_stage()};
  CHECK(meteor_detail(data::split_whitespace("the dogs barked"), data::split_whitespace("dog barking the"), exact).matches ==
        1);
  // Fmean = P R / (alpha P + (1 - alpha) R) with P = 1/2, R = 1.
  const MeteorDetail h = meteor_detail(data::split_whitespace("a x"), data::split_whitespace("a"), default_stages());
  CHECK(h.fmean == doctest::Approx(0.5 / (0.9 * 0.5 + 0.1)).epsilon(1e-14));
  CHECK(h.score == doctest::Approx(h.fmean * (1 - 0.5)).epsilon(1e-14));
}

TEST_CASE("METEOR alignment matches exhaustive search") {
  std::mt19937_64 rng(1);
  const std::vector<std::string> words{"dog", "dogs", "bark", "barking", "the", "a", "run", "running", "cat"};
  std::uniform_int_distribution<std::size_t> len(1, 7), pick(0, words.size() - 1);
  const auto stages = default_stages();
  for (int trial = 0; trial < 300; ++trial) {
    Tokens c, r;
    for (std::size_t k = len(rng); k > 0; --k) c.push_back(words[pick(rng)]);
    for (std::size_t k = len(rng); k > 0; --k) r.push_back(words[pick(rng)]);
    const auto [m, chunks] = brute_alignment(c, r);
    const MeteorAlignment a = meteor_align(c, r, stages);
    CAPTURE(data::join(c));
    CAPTURE(data::join(r));
    CHECK(a.matches == m);
    CHECK(a.chunks == chunks);
    std::vector<char> used(r.size(), 0);
    std::size_t counted = 0;
    for (int j : a.reference_of) {
      if (j < 0) continue;
      ++counted;
      CHECK_FALSE(used[static_cast<std::size_t>(j)]);
      used[static_cast<std::size_t>(j)] = 1;
    }
    CHECK(counted == a.matches);
  }
}

TEST_CASE("CIDEr-D details") {
  // Two-word captions have no 3- or 4-grams, so only n = 1, 2 contribute.
  CHECK(cider_d(std::vector<EvalPair>{one("a b", "c d")[0], one("e f", "e f")[0]}) == doctest::Approx(2.5));
  const auto scores = cider_d_scores(std::vector<EvalPair>{one("a b", "c d")[0], one("e f", "e f")[0]});
  REQUIRE(scores.size() == 2);
  CHECK(scores[0] == 0.0);
  CHECK(scores[1] == doctest::Approx(5.0));
  // Length penalty exp(-d^2 / 2 sigma^2) for a repeated-word candidate is
  // visible against the same corpus without it.
  std::vector<EvalPair> base{one("x y z", "x y z")[0], one("p q", "p q")[0]};
  std::vector<EvalPair> longer{one("x y z x y z", "x y z")[0], one("p q", "p q")[0]};
  CHECK(cider_d_scores(longer)[0] < cider_d_scores(base)[0]);
  CHECK(cider_d_scores(longer)[0] <= 10.0 * std::exp(-9.0 / 72.0) + 1e-12);
}

TEST_CASE("perfect corpus scores one") {
  std::mt19937_64 rng(2);
  auto corpus = random_corpus(rng, 40, 30);
  for (auto& p : corpus) p.candidate = p.references[0];
  for (auto& p : corpus) p.references.resize(1);
  for (int n = 1; n <= 4; ++n) {
    std::vector<EvalPair> long_enough;
    for (const auto& p : corpus) {
      if (p.candidate.size() >= 4) long_enough.push_back(p);
    }
    CHECK(bleu(long_enough, n) == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(rouge_l(corpus) == doctest::Approx(1.0).epsilon(1e-12));
  const auto s = evaluate_corpus(corpus);
  CHECK(s.at("ROUGE_L") == doctest::Approx(1.0));
  CHECK(s.at("BLEU_1") == doctest::Approx(1.0));
}

TEST_CASE("scores lie in range and ignore corpus order") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    auto corpus = random_corpus(rng, 15, 6 + trial);
    const CorpusScores a = evaluate_corpus(corpus);
    for (const auto& [name, v] : a) {
      CAPTURE(name);
      CHECK(v >= 0.0);
      CHECK(v <= (name == "CIDEr_D" ? 10.0 : 1.0) + 1e-12);
    }
    std::shuffle(corpus.begin(), corpus.end(), rng);
    const CorpusScores b = evaluate_corpus(corpus);
    for (const auto& [name, v] : a) CHECK(b.at(name) == doctest::Approx(v).epsilon(1e-12));
    for (auto& p : corpus) std::shuffle(p.references.begin(), p.references.end(), rng);
    const CorpusScores c = evaluate_corpus(corpus);
    for (const auto& [name, v] : a) CHECK(c.at(name) == doctest::Approx(v).epsilon(1e-12));
  }
}

TEST_CASE("evaluate_corpus selection") {
  const auto corpus = testing::oracle_corpus();
  const std::vector<std::string> pick{"BLEU_4", "METEOR"};
  const CorpusScores s = evaluate_corpus(corpus, pick);
  CHECK(s.size() == 2);
  CHECK(s.at("BLEU_4") == bleu(corpus, 4));
  const std::vector<std::string> bad{"SPICE"};
  CHECK_THROWS_AS(evaluate_corpus(corpus, bad), ConfigError);
  CHECK(evaluate_corpus(corpus).size() == metric_names().size());
}

TEST_CASE("Porter stemmer reference outputs") {
  const std::vector<std::pair<std::string, std::string>> cases{
      {"caresses", "caress"}, {"ponies", "poni"},       {"ties", "ti"},         {"caress", "caress"},
      {"cats", "cat"},        {"feed", "feed"},         {"agreed", "agre"},     {"plastered", "plaster"},
      {"bled", "bled"},       {"motoring", "motor"},    {"sing", "sing"},       {"conflated", "conflat"},
      {"troubled", "troubl"}, {"sized", "size"},        {"hopping", "hop"},     {"tanned", "tan"},
      {"falling", "fall"},    {"hissing", "hiss"},      {"fizzed", "fizz"},     {"failing", "fail"},
      {"filing", "file"},     {"happy", "happi"},       {"sky", "sky"},         {"relational", "relat"},
      {"conditional", "condit"}, {"rational", "ration"}, {"digitizer", "digit"}, {"operator", "oper"},
      {"feudalism", "feudal"}, {"decisiveness", "decis"}, {"hopefulness", "hope"}, {"formaliti", "formal"},
      {"triplicate", "triplic"}, {"formative", "form"}, {"formalize", "formal"}, {"electrical", "electr"},
      {"goodness", "good"},   {"revival", "reviv"},     {"allowance", "allow"}, {"adjustable", "adjust"},
      {"replacement", "replac"}, {"adoption", "adopt"}, {"effective", "effect"}, {"probate", "probat"},
      {"rate", "rate"},       {"cease", "ceas"},        {"controll", "control"}, {"roll", "roll"},
      {"barking", "bark"},    {"dogs", "dog"},          {"is", "is"},           {"as", "as"}};
  for (const auto& [w, s] : cases) {
    CAPTURE(w);
    CHECK(porter_stem(w) == s);
  }
}

TEST_CASE("report summary uses population standard deviation") {
  std::vector<CorpusScores> runs{{{"BLEU_1", 0.2}, {"METEOR", 0.1}}, {{"BLEU_1", 0.4}, {"METEOR", 0.1}}};
  const MetricReport r = summarize(runs);
  CHECK(r.runs == 2);
  CHECK(r.metrics.at("BLEU_1").mean == doctest::Approx(0.3));
  CHECK(r.metrics.at("BLEU_1").std == doctest::Approx(0.1));
  CHECK(r.metrics.at("METEOR").std == 0.0);
  const auto j = nlohmann::json::parse(report_json(r));
  CHECK(j.at("metrics").at("BLEU_1").at("mean").get<double>() == doctest::Approx(0.3));
  CHECK(j.at("runs").get<int>() == 2);
  CHECK(format_table(r).find("BLEU_1") != std::string::npos);
  CHECK_THROWS_AS(summarize(std::vector<CorpusScores>{}), ConfigError);
}

TEST_CASE("per-pair scores and CSV") {
  const auto corpus = testing::oracle_corpus();
  const auto scores = per_pair_scores(corpus);
  REQUIRE(scores.size() == corpus.size());
  double rouge_mean = 0.0;
  const auto cider = cider_d_scores(corpus);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    rouge_mean += scores[i].at("ROUGE_L") / static_cast<double>(scores.size());
    CHECK(scores[i].at("CIDEr_D") == cider[i]);
  }
  CHECK(rouge_mean == doctest::Approx(rouge_l(corpus)).epsilon(1e-12));
  testing::TempDir dir;
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < corpus.size(); ++i) ids.push_back("r" + std::to_string(i));
  write_per_pair_csv(dir / "pp.csv", ids, scores);
  std::ifstream in(dir / "pp.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header.rfind("id,", 0) == 0);
  std::size_t lines = 0;
  for (std::string l; std::getline(in, l);) ++lines;
  CHECK(lines == corpus.size());
}

// SPDX-License-Identifier: Apache-2.0
#include "support.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <set>

namespace acap::testing {

namespace fs = std::filesystem;

TempDir::TempDir() {
  static std::atomic<unsigned> counter{0};
  const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
  path_ = fs::temp_directory_path() /
          ("acap-test-" + std::to_string(stamp) + "-" + std::to_string(counter++));
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

ng::Tensor random_tensor(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double scale) {
  ng::Tensor t({rows, cols});
  std::normal_distribution<double> nd(0.0, scale);
  for (double& v : t.values()) v = nd(rng);
  return t;
}

model::ModelParams random_params(const model::ModelConfig& config, std::mt19937_64& rng, double scale) {
  model::ModelParams p = model::ModelParams::zeros(config);
  std::normal_distribution<double> nd(0.0, scale);
  p.for_each([&](const std::string&, ng::Tensor& t) {
    for (double& v : t.values()) v = nd(rng);
  });
  return p;
}

std::vector<training::EncodedRecord> overfit_records(std::uint64_t seed) {
  const model::ModelConfig mc = model::ModelConfig::tiny();
  std::mt19937_64 rng(seed);
  std::vector<training::EncodedRecord> out;
  for (int i = 0; i < 16; ++i) {
    training::EncodedRecord r;
    r.id = "pair" + std::to_string(i);
    const int first = 1 + i % 3;
    const int second = (i / 3) % 4;
    r.targets = second == 0 ? std::vector<int>{first, 0, 0} : std::vector<int>{first, second, 0};
    r.features = random_tensor(mc.seq_len, mc.n_feats, rng);
    out.push_back(std::move(r));
  }
  return out;
}

training::TrainConfig overfit_train_config(std::uint64_t seed) {
  training::TrainConfig tc;
  tc.batch_size = 1;
  tc.input_dropout = 0.0;
  tc.recurrent_dropout = 0.0;
  tc.max_epochs = 500;
  tc.patience = 0;
  tc.seed = seed;
  tc.threads = 1;
  return tc;
}

std::vector<int> expected_indices(const training::EncodedRecord& record) {
  std::vector<int> out;
  for (int t : record.targets) {
    if (t == 0) break;
    out.push_back(t);
  }
  return out;
}

std::vector<data::CaptionRecord> synthetic_corpus(std::size_t n_records, std::size_t pool, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> weights;
  for (std::size_t i = 0; i < pool; ++i) weights.push_back(1.0 / static_cast<double>(i + 1));
  std::discrete_distribution<std::size_t> word(weights.begin(), weights.end());
  std::uniform_int_distribution<std::size_t> length(3, 9);
  std::bernoulli_distribution reuse(0.1);
  std::vector<data::CaptionRecord> out;
  for (std::size_t i = 0; i < n_records; ++i) {
    data::CaptionRecord r;
    r.id = "rec" + std::to_string(i);
    r.audio_path = r.id + ".wav";
    if (!out.empty() && reuse(rng)) {
      std::uniform_int_distribution<std::size_t> pick(0, out.size() - 1);
      r.tokens = out[pick(rng)].tokens;
    } else {
      const std::size_t n = length(rng);
      for (std::size_t k = 0; k < n; ++k) {
        std::string w = "w" + std::to_string(word(rng));
        if (r.tokens.empty() || r.tokens.back() != w) r.tokens.push_back(std::move(w));
      }
    }
    r.raw_caption = data::join(r.tokens);
    out.push_back(std::move(r));
  }
  return out;
}

std::size_t test_caption_overlap(const std::vector<data::CaptionRecord>& records, const data::SplitSet& split) {
  std::map<std::string, const data::CaptionRecord*> by_id;
  for (const auto& r : records) by_id[r.id] = &r;
  std::size_t overlap = 0;
  for (const std::string& t : split.test) {
    for (const auto* other : {&split.train, &split.validation}) {
      for (const std::string& o : *other) {
        if (by_id.at(t)->tokens == by_id.at(o)->tokens) ++overlap;
      }
    }
  }
  return overlap;
}

Vocabulary synthetic_vocabulary(std::size_t n_words) {
  std::vector<std::string> words;
  for (std::size_t i = 0; i < n_words; ++i) words.push_back("word" + std::to_string(i));
  return Vocabulary(words);
}

std::vector<metrics::Tokens> synthetic_references(const Vocabulary& vocab, std::size_t n_pairs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> length(3, 10);
  std::vector<double> weights;
  for (std::size_t i = 1; i < vocab.size(); ++i) weights.push_back(1.0 / static_cast<double>(i));
  std::discrete_distribution<int> word(weights.begin(), weights.end());
  std::vector<metrics::Tokens> out;
  for (std::size_t i = 0; i < n_pairs; ++i) {
    metrics::Tokens t;
    const std::size_t n = length(rng);
    for (std::size_t k = 0; k < n; ++k) t.push_back(vocab.word(1 + word(rng)));
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<metrics::Tokens> tokens_of(const std::vector<std::string>& lines) {
  std::vector<metrics::Tokens> out;
  for (const std::string& l : lines) out.push_back(data::split_whitespace(l));
  return out;
}

std::vector<metrics::EvalPair> oracle_corpus() {
  const std::vector<std::pair<std::string, std::vector<std::string>>> raw{
      {"a dog barks loudly", {"a dog is barking loudly", "dogs bark"}},
      {"birds chirping in the trees", {"birds chirp in the tall trees"}},
      {"a car passes by", {"a car drives by on the road"}},
      {"water running in a sink", {"running water fills a sink", "water runs into the sink"}},
      {"people talking in a room", {"people are talking in a large room"}},
      {"rain falls on the roof", {"heavy rain falls on the metal roof"}},
      {"a door closes", {"a door slams shut", "someone closes a door"}},
      {"wind blowing through trees", {"strong wind blows through the trees"}},
      {"a man is speaking", {"a man speaks to a crowd"}},
      {"footsteps on the wooden floor", {"footsteps walking on a wooden floor"}},
  };
  std::vector<metrics::EvalPair> out;
  for (const auto& [cand, refs] : raw) out.push_back({data::split_whitespace(cand), tokens_of(refs)});
  return out;
}

std::vector<MetricOracle> metric_oracles() {
  using metrics::EvalPair;
  auto one = [](const std::string& cand, const std::string& ref) {
    return std::vector<EvalPair>{{data::split_whitespace(cand), {data::split_whitespace(ref)}}};
  };
  const auto stages = metrics::default_stages();
  std::vector<MetricOracle> out;
  // Clipped unigram count: "the" is clipped to its 2 reference occurrences.
  out.push_back({"BLEU_1 clipped precision", metrics::bleu(one("the the the the the the the", "the cat is on the mat"), 1),
                 2.0 / 7.0});
  // c = 5, r = 10, p1 = 1: BP = exp(1 - 10/5).
  out.push_back({"BLEU_1 brevity penalty", metrics::bleu(one("a b c d e", "a b c d e f g h i j"), 1), std::exp(-1.0)});
  // LCS 3 over lengths 4 and 4.
  out.push_back({"ROUGE_L transposition", metrics::rouge_l(one("a b c d", "a c b d")), 0.75});
  // m = 3, one chunk: 1 - 0.5 (1/3)^3.
  out.push_back({"METEOR one chunk", metrics::meteor(one("a b c", "a b c")), 1.0 - 0.5 / 27.0});
  // m = 2, two chunks: 1 - 0.5 (2/2)^3.
  out.push_back({"METEOR two chunks", metrics::meteor(one("b a", "a b")), 0.5});
  // Two disjoint perfect pairs of at least four words: every IDF is ln 2,
  // cosine 1, no length penalty.
  std::vector<EvalPair> two = one("a dog barks loudly", "a dog barks loudly");
  two.push_back(one("rain falls on the roof", "rain falls on the roof")[0]);
  out.push_back({"CIDEr_D two-document corpus", metrics::cider_d(two), 10.0});
  // One document: every IDF is ln 1 = 0.
  out.push_back({"CIDEr_D single document", metrics::cider_d(one("dog barks", "dog barks")), 0.0});
  // Reference values for the fixed corpus: BLEU and CIDEr-D from the MS COCO
  // caption scorer, ROUGE-L and METEOR from exhaustive alignment search.
  const auto corpus = oracle_corpus();
  out.push_back({"BLEU_1 fixed corpus", metrics::bleu(corpus, 1), 0.58182836140747884});
  out.push_back({"BLEU_2 fixed corpus", metrics::bleu(corpus, 2), 0.38213880362385616});
  out.push_back({"BLEU_3 fixed corpus", metrics::bleu(corpus, 3), 0.23501691353156312});
  out.push_back({"BLEU_4 fixed corpus", metrics::bleu(corpus, 4), 0.16024282605843712});
  out.push_back({"ROUGE_L fixed corpus", metrics::rouge_l(corpus), 0.63448474704630742});
  out.push_back({"METEOR fixed corpus", metrics::meteor(corpus, stages), 0.63303280048159816});
  out.push_back({"CIDEr_D fixed corpus", metrics::cider_d(corpus), 2.3577177754043217});
  return out;
}

}  // namespace acap::testing

// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "acap/audio_features.hpp"
#include "acap/cli.hpp"
#include "acap/errors.hpp"
#include "json.hpp"
#include "support.hpp"

using namespace acap;
namespace fs = std::filesystem;

namespace {

struct Result {
  int status = 0;
  std::string out;
  std::string err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int status = cli::run_command(args, out, err);
  return {status, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

// Short tones; load_audio pads them to the full clip length.
void write_tone(const fs::path& p, double hz) {
  std::vector<double> s(22050);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = 0.4 * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / audio::kSampleRate);
  }
  audio::write_wav(p, s);
}

fs::path make_corpus(const testing::TempDir& dir, std::size_t n) {
  const std::vector<std::string> captions{"A dog barks loudly.", "Rain falls on the roof!", "a car passes by",
                                          "Birds chirping, birds chirping", "water running in a sink",
                                          "a dog barks at the car", "rain and wind outside", "a door closes",
                                          "people talking in a room", "wind blows through trees"};
  std::vector<data::CaptionRecord> rows;
  for (std::size_t i = 0; i < n; ++i) {
    data::CaptionRecord r;
    r.id = "rec" + std::to_string(i);
    r.audio_path = r.id + ".wav";
    r.raw_caption = captions[i % captions.size()];
    write_tone(dir / r.audio_path, 200.0 + 150.0 * static_cast<double>(i));
    rows.push_back(r);
  }
  data::write_manifest(dir / "manifest.csv", rows);
  return dir / "manifest.csv";
}

}  // namespace

TEST_CASE("extract writes one feature file per manifest row") {
  testing::TempDir dir;
  const fs::path manifest = make_corpus(dir, 3);
  const Result r = run({"extract", "--manifest", manifest.string(), "--out", (dir / "feats").string(), "--seed", "3"});
  CHECK(r.status == 0);
  for (int i = 0; i < 3; ++i) {
    const auto f = audio::read_feature_file(dir / "feats" / ("rec" + std::to_string(i) + ".acf"));
    CHECK(f.frames == 1289);
    CHECK(f.bands == 64);
    CHECK(slurp(dir / "feats" / ("rec" + std::to_string(i) + ".acf")).substr(0, 4) == "ACF1");
  }
  const auto meta = nlohmann::json::parse(slurp(dir / "feats" / "extract.meta.json"));
  CHECK(meta.at("seed").get<int>() == 3);
  CHECK(meta.at("records").get<int>() == 3);
}

TEST_CASE("evaluate with identical files reports BLEU_1 = 1") {
  testing::TempDir dir;
  write_text(dir / "c.txt", "a dog barks loudly\nrain falls on the roof\na car passes by slowly\n");
  write_text(dir / "r.txt", "a dog barks loudly\nrain falls on the roof\na car passes by slowly\n");
  const Result r = run({"evaluate", "--candidates", (dir / "c.txt").string(), "--references",
                        (dir / "r.txt").string(), "--out", (dir / "report.json").string(), "--per-pair",
                        (dir / "pp.csv").string()});
  CHECK(r.status == 0);
  const auto j = nlohmann::json::parse(slurp(dir / "report.json"));
  CHECK(j.at("metrics").at("BLEU_1").at("mean").get<double>() == doctest::Approx(1.0));
  CHECK(j.at("metrics").at("BLEU_4").at("mean").get<double>() == doctest::Approx(1.0));
  CHECK(j.at("metrics").at("ROUGE_L").at("mean").get<double>() == doctest::Approx(1.0));
  CHECK(j.at("runs").get<int>() == 1);
  CHECK(j.contains("seed"));
  CHECK(r.out.find("BLEU_1") != std::string::npos);
  CHECK(fs::exists(dir / "pp.csv"));
}

TEST_CASE("evaluate over several runs reports mean and std") {
  testing::TempDir dir;
  write_text(dir / "r.txt", "a dog barks\nrain falls down\n");
  write_text(dir / "c1.txt", "a dog barks\nrain falls down\n");
  write_text(dir / "c2.txt", "a cat meows\nsnow falls down\n");
  const Result r = run({"evaluate", "--candidates", (dir / "c1.txt").string(), "--candidates",
                        (dir / "c2.txt").string(), "--references", (dir / "r.txt").string(), "--out",
                        (dir / "report.json").string()});
  REQUIRE(r.status == 0);
  const auto j = nlohmann::json::parse(slurp(dir / "report.json"));
  CHECK(j.at("runs").get<int>() == 2);
  const double rl = j.at("metrics").at("ROUGE_L").at("mean").get<double>();
  CHECK(rl > 0.5);
  CHECK(rl < 1.0);
  CHECK(j.at("metrics").at("ROUGE_L").at("std").get<double>() > 0.0);
}

TEST_CASE("baseline random-words is seeded") {
  testing::TempDir dir;
  testing::synthetic_vocabulary(20).save(dir / "vocab.txt");
  auto go = [&](const std::string& name, const std::string& seed) {
    return run({"baseline", "--mode", "random-words", "--seed", seed, "--vocab", (dir / "vocab.txt").string(),
                "--count", "25", "--out", (dir / name).string()});
  };
  REQUIRE(go("a.txt", "7").status == 0);
  REQUIRE(go("b.txt", "7").status == 0);
  REQUIRE(go("c.txt", "8").status == 0);
  CHECK(slurp(dir / "a.txt") == slurp(dir / "b.txt"));
  CHECK(slurp(dir / "a.txt") != slurp(dir / "c.txt"));
  const auto meta = nlohmann::json::parse(slurp(dir / "a.txt.meta.json"));
  CHECK(meta.at("seed").get<int>() == 7);
}

TEST_CASE("errors give nonzero status") {
  testing::TempDir dir;
  CHECK(run({}).status != 0);
  CHECK(run({"no-such-command"}).status != 0);
  CHECK(run({"evaluate", "--bogus-flag", "x"}).status != 0);
  const Result missing = run({"evaluate", "--references", "r.txt"});
  CHECK(missing.status == 2);
  CHECK(missing.err.find("--candidates") != std::string::npos);
  const Result io = run({"extract", "--manifest", (dir / "absent.csv").string(), "--out", (dir / "f").string()});
  CHECK(io.status == 1);
  CHECK_FALSE(io.err.empty());
  testing::synthetic_vocabulary(5).save(dir / "vocab.txt");
  CHECK(run({"baseline", "--mode", "sideways", "--vocab", (dir / "vocab.txt").string(), "--out",
             (dir / "x.txt").string()})
            .status != 0);
  write_text(dir / "bad.json", "{\"epochs\": 3, \"colour\": 1}");
  CHECK(run({"baseline", "--config", (dir / "bad.json").string(), "--vocab", (dir / "vocab.txt").string(), "--count",
             "2", "--out", (dir / "x.txt").string()})
            .status == 1);
  CHECK(run({"--help"}).status == 0);
}

TEST_CASE("flags take precedence over the config file") {
  testing::TempDir dir;
  testing::synthetic_vocabulary(20).save(dir / "vocab.txt");
  write_text(dir / "cfg.json", "{\"seed\": 5, \"count\": 4, \"mode\": \"random-words\", \"vocab\": \"" +
                                   (dir / "vocab.txt").string() + "\"}");
  REQUIRE(run({"baseline", "--config", (dir / "cfg.json").string(), "--out", (dir / "a.txt").string()}).status == 0);
  REQUIRE(run({"baseline", "--config", (dir / "cfg.json").string(), "--seed", "6", "--count", "9", "--out",
               (dir / "b.txt").string()})
              .status == 0);
  const auto a = nlohmann::json::parse(slurp(dir / "a.txt.meta.json"));
  const auto b = nlohmann::json::parse(slurp(dir / "b.txt.meta.json"));
  CHECK(a.at("seed").get<int>() == 5);
  CHECK(b.at("seed").get<int>() == 6);
  std::size_t lines = 0;
  for (char c : slurp(dir / "b.txt")) lines += c == '\n';
  CHECK(lines == 9);
}

TEST_CASE("apply_json") {
  cli::RunConfig c;
  c.apply_json(R"({"encoder_hidden": [8, 8, 16], "decoder_hidden": [4, 6], "lr": 0.01, "epochs": 7})");
  CHECK(c.model.encoder_hidden[2] == 16);
  CHECK(c.model.decoder_hidden[1] == 6);
  CHECK(c.train.adam.lr == 0.01);
  CHECK(c.train.max_epochs == 7);
  CHECK_THROWS_AS(c.apply_json("[1, 2]"), ConfigError);
  CHECK_THROWS_AS(c.apply_json("{\"lr\": \"fast\"}"), ConfigError);
  CHECK_THROWS_AS(c.apply_json("{\"encoder_hidden\": [1, 2]}"), ConfigError);
  CHECK_THROWS_AS(c.apply_json("not json"), ConfigError);
}

TEST_CASE("end-to-end pipeline") {
  testing::TempDir dir;
  const fs::path raw = make_corpus(dir, 20);
  const std::string d = dir.path().string() + "/";
  write_text(dir / "cfg.json", R"({"min_count": 1, "encoder_hidden": [3, 3, 4], "decoder_hidden": [4, 4],
    "batch_size": 4, "threads": 1})");
  const std::string cfg = d + "cfg.json";

  REQUIRE(run({"extract", "--manifest", raw.string(), "--out", d + "feats"}).status == 0);
  REQUIRE(run({"prep-captions", "--manifest", raw.string(), "--out", d + "clean.csv"}).status == 0);
  const auto clean = data::read_manifest(dir / "clean.csv");
  CHECK(clean.size() == 20);
  CHECK(clean[0].raw_caption == "a dog barks loudly");

  REQUIRE(run({"make-splits", "--config", cfg, "--manifest", d + "clean.csv", "--candidates-count", "5", "--seed", "2",
               "--out", d + "splits.json", "--vocab", d + "vocab.txt"})
              .status == 0);
  const data::SplitSet split = data::SplitSet::load(dir / "splits.json");
  CHECK(split.train.size() == 12);
  CHECK(split.test.size() == 4);
  CHECK(split.seed == 2);

  const Result tr = run({"train", "--config", cfg, "--manifest", d + "clean.csv", "--features", d + "feats", "--splits",
                         d + "splits.json", "--vocab", d + "vocab.txt", "--checkpoint", d + "model.ackp", "--epochs", "2",
                         "--seed", "4"});
  REQUIRE_MESSAGE(tr.status == 0, tr.err);
  const model::Checkpoint ck = model::load_checkpoint(dir / "model.ackp");
  CHECK(ck.config.encoder_hidden[2] == 4);
  CHECK(ck.config.seq_len == 1289);
  CHECK(ck.config.vocab_size == Vocabulary::load(dir / "vocab.txt").size());
  CHECK(slurp(dir / "model.ackp.history.csv").rfind("epoch,train_loss,val_loss\n", 0) == 0);

  const std::vector<std::string> caption_args{"caption", "--checkpoint", d + "model.ackp", "--vocab", d + "vocab.txt",
                                              "--features", d + "feats", "--manifest", d + "clean.csv", "--splits",
                                              d + "splits.json", "--references", d + "refs.txt", "--out", d + "cands.txt"};
  REQUIRE(run(caption_args).status == 0);
  const std::string first = slurp(dir / "cands.txt");
  REQUIRE(run(caption_args).status == 0);
  CHECK(slurp(dir / "cands.txt") == first);
  std::size_t lines = 0;
  for (char c : slurp(dir / "refs.txt")) lines += c == '\n';
  CHECK(lines == 4);

  REQUIRE(run({"baseline", "--mode", "random-input", "--seed", "9", "--checkpoint", d + "model.ackp", "--vocab",
               d + "vocab.txt", "--features", d + "feats", "--manifest", d + "clean.csv", "--splits", d + "splits.json",
               "--out", d + "rand_input.txt"})
              .status == 0);
  REQUIRE(run({"baseline", "--mode", "random-words", "--seed", "9", "--vocab", d + "vocab.txt", "--manifest",
               d + "clean.csv", "--splits", d + "splits.json", "--out", d + "rand_words.txt"})
              .status == 0);
  const Result ev = run({"evaluate", "--candidates", d + "rand_words.txt", "--references", d + "refs.txt", "--out",
                         d + "report.json", "--seed", "9"});
  REQUIRE_MESSAGE(ev.status == 0, ev.err);
  const auto j = nlohmann::json::parse(slurp(dir / "report.json"));
  for (const std::string& m : metrics::metric_names()) CHECK(j.at("metrics").contains(m));
}

// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <atomic>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "acap/audio_features.hpp"
#include "acap/cli.hpp"
#include "acap/data_prep.hpp"
#include "acap/errors.hpp"
#include "acap/metrics.hpp"

namespace acap::cli {

namespace fs = std::filesystem;
using nlohmann::json;

// ---- config ----------------------------------------------------------------

namespace {

template <typename T>
void read_array(const json& j, const char* key, T& dst) {
  if (!j.is_array() || j.size() != dst.size()) {
    throw ConfigError(std::string("config key '") + key + "' must be an array of " + std::to_string(dst.size()));
  }
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = j[i].get<typename T::value_type>();
}

}  // namespace

void RunConfig::apply_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  const std::map<std::string, std::function<void(const json&)>> setters{
      {"manifest", [&](const json& v) { manifest = v.get<std::string>(); }},
      {"features", [&](const json& v) { features = v.get<std::string>(); }},
      {"dictionary", [&](const json& v) { dictionary = v.get<std::string>(); }},
      {"vocab", [&](const json& v) { vocab = v.get<std::string>(); }},
      {"splits", [&](const json& v) { splits = v.get<std::string>(); }},
      {"checkpoint", [&](const json& v) { checkpoint = v.get<std::string>(); }},
      {"out", [&](const json& v) { out = v.get<std::string>(); }},
      {"mode", [&](const json& v) { mode = v.get<std::string>(); }},
      {"seed", [&](const json& v) { seed = v.get<std::uint64_t>(); }},
      {"candidates_count", [&](const json& v) { candidates_count = v.get<std::size_t>(); }},
      {"min_count", [&](const json& v) { min_count = v.get<std::size_t>(); }},
      {"count", [&](const json& v) { count = v.get<std::size_t>(); }},
      {"threads", [&](const json& v) { threads = v.get<std::size_t>(); }},
      {"encoder_hidden", [&](const json& v) { read_array(v, "encoder_hidden", model.encoder_hidden); }},
      {"decoder_hidden", [&](const json& v) { read_array(v, "decoder_hidden", model.decoder_hidden); }},
      {"caption_steps", [&](const json& v) { model.caption_steps = v.get<std::uint32_t>(); }},
      {"epochs", [&](const json& v) { train.max_epochs = v.get<std::size_t>(); }},
      {"patience", [&](const json& v) { train.patience = v.get<std::size_t>(); }},
      {"batch_size", [&](const json& v) { train.batch_size = v.get<std::size_t>(); }},
      {"input_dropout", [&](const json& v) { train.input_dropout = v.get<double>(); }},
      {"recurrent_dropout", [&](const json& v) { train.recurrent_dropout = v.get<double>(); }},
      {"lr", [&](const json& v) { train.adam.lr = v.get<double>(); }},
      {"beta1", [&](const json& v) { train.adam.beta1 = v.get<double>(); }},
      {"beta2", [&](const json& v) { train.adam.beta2 = v.get<double>(); }},
      {"eps", [&](const json& v) { train.adam.eps = v.get<double>(); }},
  };
  for (const auto& [key, value] : j.items()) {
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("unknown config key '" + key + "'");
    try {
      it->second(value);
    } catch (const json::exception& e) {
      throw ConfigError("config key '" + key + "': " + e.what());
    }
  }
}

namespace {

// ---- helpers ---------------------------------------------------------------

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const std::string& l : lines) out << l << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

void write_meta(const fs::path& artifact, const std::string& command, const RunConfig& cfg, json extra = json::object()) {
  json j = std::move(extra);
  j["command"] = command;
  j["seed"] = cfg.seed;
  fs::path meta = artifact;
  meta += ".meta.json";
  std::ofstream out(meta);
  if (!out) throw IoError("cannot write " + meta.string());
  out << j.dump(2) << '\n';
}

void require(const fs::path& p, const char* flag) {
  if (p.empty()) throw UsageError(std::string("missing required flag ") + flag);
}

void require_exists(const fs::path& p, const char* flag) {
  require(p, flag);
  if (!fs::exists(p)) throw IoError(std::string(flag) + ": no such file or directory: " + p.string());
}

fs::path feature_path(const fs::path& dir, const std::string& id) {
  if (id.empty() || id.find('/') != std::string::npos || id.find('\\') != std::string::npos || id == "." ||
      id == "..") {
    throw FormatError("record id '" + id + "' cannot name a feature file");
  }
  return dir / (id + ".acf");
}

std::vector<data::CaptionRecord> load_clean_manifest(const fs::path& path) {
  std::vector<data::CaptionRecord> records = data::read_manifest(path);
  for (data::CaptionRecord& r : records) r.tokens = data::normalize_caption(r.raw_caption);
  return records;
}

std::map<std::string, const data::CaptionRecord*> index_by_id(const std::vector<data::CaptionRecord>& records) {
  std::map<std::string, const data::CaptionRecord*> m;
  for (const auto& r : records) {
    if (!m.emplace(r.id, &r).second) throw FormatError("duplicate record id '" + r.id + "'");
  }
  return m;
}

std::vector<const data::CaptionRecord*> select(const std::map<std::string, const data::CaptionRecord*>& by_id,
                                               const std::vector<std::string>& ids) {
  std::vector<const data::CaptionRecord*> out;
  for (const std::string& id : ids) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) throw SplitError("split names unknown record '" + id + "'");
    out.push_back(it->second);
  }
  return out;
}

ng::Tensor load_features(const fs::path& dir, const std::string& id) {
  const audio::FeatureMatrix f = audio::read_feature_file(feature_path(dir, id));
  return model::features_tensor(f.values, f.frames, f.bands);
}

// Records of the test split when --splits is given, else every record.
std::vector<const data::CaptionRecord*> evaluation_records(const RunConfig& cfg,
                                                           const std::vector<data::CaptionRecord>& records) {
  if (cfg.splits.empty()) {
    std::vector<const data::CaptionRecord*> all;
    for (const auto& r : records) all.push_back(&r);
    return all;
  }
  const data::SplitSet split = data::SplitSet::load(cfg.splits);
  return select(index_by_id(records), split.test);
}

template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn fn) {
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(n, 1));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(threads);
  auto work = [&](std::size_t w) {
    try {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    } catch (...) {
      errors[w] = std::current_exception();
      next = n;
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < threads; ++w) pool.emplace_back(work, w);
  work(0);
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// ---- subcommands -----------------------------------------------------------

void cmd_extract(const RunConfig& cfg, std::ostream& out) {
  require_exists(cfg.manifest, "--manifest");
  require(cfg.out, "--out");
  const std::vector<data::CaptionRecord> records = data::read_manifest(cfg.manifest);
  fs::create_directories(cfg.out);
  const fs::path base = cfg.manifest.parent_path();
  parallel_for(records.size(), cfg.threads, [&](std::size_t i) {
    const data::CaptionRecord& r = records[i];
    fs::path audio_path = r.audio_path;
    if (audio_path.is_relative()) audio_path = base / audio_path;
    try {
      const audio::FeatureMatrix f = audio::extract_features(audio::load_audio(audio_path));
      audio::write_feature_file(feature_path(cfg.out, r.id), f);
    } catch (const Error& e) {
      throw IoError("record '" + r.id + "': " + e.what());
    }
  });
  write_meta(cfg.out / "extract", "extract", cfg, {{"records", records.size()}});
  out << "extracted " << records.size() << " feature files to " << cfg.out.string() << '\n';
}

void cmd_prep_captions(const RunConfig& cfg, std::ostream& out) {
  require_exists(cfg.manifest, "--manifest");
  require(cfg.out, "--out");
  data::Dictionary dict;
  const bool use_dict = !cfg.dictionary.empty();
  if (use_dict) {
    require_exists(cfg.dictionary, "--dictionary");
    dict = data::load_dictionary(cfg.dictionary);
  }
  std::vector<data::CaptionRecord> kept;
  std::size_t dropped = 0;
  for (data::CaptionRecord& r : data::read_manifest(cfg.manifest)) {
    r.tokens = data::normalize_caption(r.raw_caption, use_dict ? &dict : nullptr);
    if (r.tokens.empty()) {
      ++dropped;
      continue;
    }
    kept.push_back(std::move(r));
  }
  if (cfg.out.has_parent_path()) fs::create_directories(cfg.out.parent_path());
  data::write_manifest(cfg.out, kept);
  write_meta(cfg.out, "prep-captions", cfg, {{"kept", kept.size()}, {"dropped_empty", dropped}});
  out << "kept " << kept.size() << " captions, dropped " << dropped << " empty\n";
}

void cmd_make_splits(const RunConfig& cfg, std::ostream& out) {
  require_exists(cfg.manifest, "--manifest");
  require(cfg.out, "--out");
  if (cfg.candidates_count == 0) throw UsageError("--candidates-count must be >= 1");
  const std::vector<data::CaptionRecord> records = load_clean_manifest(cfg.manifest);
  const data::SplitSet split =
      data::generate_split_candidates(records, cfg.candidates_count, cfg.seed, cfg.min_count, cfg.threads);
  if (cfg.out.has_parent_path()) fs::create_directories(cfg.out.parent_path());
  split.save(cfg.out);
  out << "split " << split.train.size() << "/" << split.validation.size() << "/" << split.test.size()
      << " (candidate " << split.candidate_index << ", " << split.score << " common words)\n";
  if (!cfg.vocab.empty()) {
    const Vocabulary vocab = data::build_vocabulary(records, split, cfg.min_count);
    vocab.save(cfg.vocab);
    write_meta(cfg.vocab, "make-splits", cfg, {{"words", vocab.size()}});
    out << "vocabulary of " << vocab.size() << " words written to " << cfg.vocab.string() << '\n';
  }
}

std::vector<training::EncodedRecord> encode_records(const std::vector<const data::CaptionRecord*>& records,
                                                    const Vocabulary& vocab, const fs::path& features,
                                                    std::size_t steps, std::size_t& excluded) {
  std::vector<training::EncodedRecord> out;
  for (const data::CaptionRecord* r : records) {
    const std::optional<std::vector<int>> targets = data::encode_caption(r->tokens, vocab, steps);
    if (!targets) {
      ++excluded;
      continue;
    }
    out.push_back({r->id, load_features(features, r->id), *targets});
  }
  return out;
}

void cmd_train(const RunConfig& cfg, std::ostream& out) {
  require_exists(cfg.manifest, "--manifest");
  require_exists(cfg.features, "--features");
  require_exists(cfg.splits, "--splits");
  require_exists(cfg.vocab, "--vocab");
  require(cfg.checkpoint, "--checkpoint");
  const std::vector<data::CaptionRecord> records = load_clean_manifest(cfg.manifest);
  const auto by_id = index_by_id(records);
  const data::SplitSet split = data::SplitSet::load(cfg.splits);
  const Vocabulary vocab = Vocabulary::load(cfg.vocab);

  model::ModelConfig mc = cfg.model;
  mc.vocab_size = static_cast<std::uint32_t>(vocab.size());
  training::Dataset data;
  std::size_t excluded = 0;
  data.train = encode_records(select(by_id, split.train), vocab, cfg.features, mc.caption_steps, excluded);
  data.validation =
      encode_records(select(by_id, split.validation), vocab, cfg.features, mc.caption_steps, excluded);
  if (data.train.empty()) throw ConfigError("no trainable records after encoding");
  mc.seq_len = static_cast<std::uint32_t>(data.train[0].features.rows());
  mc.n_feats = static_cast<std::uint32_t>(data.train[0].features.cols());

  training::TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;
  tc.threads = cfg.threads;
  out << "training on " << data.train.size() << " records, validating on " << data.validation.size() << " ("
      << excluded << " excluded), " << model::count_params(mc) << " parameters\n";
  const training::TrainResult result = training::train(data, tc, mc, [&](const training::EpochLoss& e) {
    out << "epoch " << e.epoch << " train " << e.train_loss << " val " << e.val_loss << '\n';
  });
  if (cfg.checkpoint.has_parent_path()) fs::create_directories(cfg.checkpoint.parent_path());
  model::save_checkpoint(cfg.checkpoint, result.best, mc);
  fs::path history = cfg.out;
  if (history.empty()) {
    history = cfg.checkpoint;
    history += ".history.csv";
  }
  training::write_loss_history(history, result.history);
  write_meta(cfg.checkpoint, "train", cfg,
             {{"best_epoch", result.best_epoch}, {"stopped_early", result.stopped_early}, {"history", history.string()}});
  out << "best epoch " << result.best_epoch << "; checkpoint " << cfg.checkpoint.string() << '\n';
}

void write_references(const fs::path& path, const std::vector<const data::CaptionRecord*>& records) {
  std::vector<std::string> lines;
  for (const data::CaptionRecord* r : records) lines.push_back(data::join(r->tokens));
  write_lines(path, lines);
}

std::vector<std::string> ids_of(const std::vector<const data::CaptionRecord*>& records) {
  std::vector<std::string> ids;
  for (const data::CaptionRecord* r : records) ids.push_back(r->id);
  return ids;
}

void cmd_caption(const RunConfig& cfg, std::ostream& out) {
  require_exists(cfg.checkpoint, "--checkpoint");
  require_exists(cfg.vocab, "--vocab");
  require_exists(cfg.features, "--features");
  require_exists(cfg.manifest, "--manifest");
  require(cfg.out, "--out");
  const model::Checkpoint ck = model::load_checkpoint(cfg.checkpoint);
  const Vocabulary vocab = Vocabulary::load(cfg.vocab);
  if (vocab.size() != ck.config.vocab_size) throw ConfigError("vocabulary size differs from the checkpoint");
  const std::vector<data::CaptionRecord> records = load_clean_manifest(cfg.manifest);
  const std::vector<const data::CaptionRecord*> eval = evaluation_records(cfg, records);
  std::vector<std::string> lines(eval.size());
  parallel_for(eval.size(), cfg.threads, [&](std::size_t i) {
    const ng::Tensor x = load_features(cfg.features, eval[i]->id);
    lines[i] = data::join(model::predict_caption(x, ck.params, vocab, ck.config.caption_steps));
  });
  write_lines(cfg.out, lines);
  write_meta(cfg.out, "caption", cfg, {{"ids", ids_of(eval)}});
  if (!cfg.references.empty()) write_references(cfg.references[0], eval);
  out << "captioned " << eval.size() << " records\n";
}

void cmd_evaluate(const RunConfig& cfg, std::ostream& out) {
  if (cfg.candidates.empty()) throw UsageError("missing required flag --candidates");
  if (cfg.references.empty()) throw UsageError("missing required flag --references");
  std::vector<std::vector<std::string>> ref_sets;
  for (const fs::path& p : cfg.references) ref_sets.push_back(read_lines(p));
  const std::size_t n = ref_sets[0].size();
  for (std::size_t k = 0; k < ref_sets.size(); ++k) {
    if (ref_sets[k].size() != n) {
      throw DimensionError("reference file " + cfg.references[k].string() + " has " +
                           std::to_string(ref_sets[k].size()) + " lines, expected " + std::to_string(n));
    }
  }
  std::vector<metrics::CorpusScores> runs;
  std::vector<metrics::EvalPair> first_run;
  for (const fs::path& cand_path : cfg.candidates) {
    const std::vector<std::string> cands = read_lines(cand_path);
    if (cands.size() != n) {
      throw DimensionError("candidate file " + cand_path.string() + " has " + std::to_string(cands.size()) +
                           " lines, references have " + std::to_string(n));
    }
    std::vector<metrics::EvalPair> pairs(n);
    for (std::size_t i = 0; i < n; ++i) {
      pairs[i].candidate = data::split_whitespace(cands[i]);
      for (const auto& set : ref_sets) {
        data::Tokens ref = data::split_whitespace(set[i]);
        if (!ref.empty()) pairs[i].references.push_back(std::move(ref));
      }
    }
    runs.push_back(metrics::evaluate_corpus(pairs));
    if (first_run.empty()) first_run = std::move(pairs);
  }
  const metrics::MetricReport report = metrics::summarize(runs);
  if (!cfg.out.empty()) {
    if (cfg.out.has_parent_path()) fs::create_directories(cfg.out.parent_path());
    json j = json::parse(metrics::report_json(report));
    j["seed"] = cfg.seed;
    std::ofstream f(cfg.out);
    if (!f) throw IoError("cannot write " + cfg.out.string());
    f << j.dump(2) << '\n';
  }
  if (!cfg.per_pair.empty()) {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back(std::to_string(i));
    metrics::write_per_pair_csv(cfg.per_pair, ids, metrics::per_pair_scores(first_run));
  }
  out << metrics::format_table(report);
}

void cmd_baseline(const RunConfig& cfg, std::ostream& out) {
  require(cfg.out, "--out");
  require_exists(cfg.vocab, "--vocab");
  const Vocabulary vocab = Vocabulary::load(cfg.vocab);
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::string> lines;
  json extra = json::object();
  if (cfg.mode == "random-words") {
    std::size_t n = cfg.count;
    if (n == 0) {
      require_exists(cfg.manifest, "--manifest");
      const std::vector<data::CaptionRecord> records = load_clean_manifest(cfg.manifest);
      const auto eval = evaluation_records(cfg, records);
      n = eval.size();
      extra["ids"] = ids_of(eval);
      if (!cfg.references.empty()) write_references(cfg.references[0], eval);
    }
    for (std::size_t i = 0; i < n; ++i) lines.push_back(data::join(data::random_caption_baseline(vocab, rng)));
  } else if (cfg.mode == "random-input") {
    require_exists(cfg.checkpoint, "--checkpoint");
    require_exists(cfg.features, "--features");
    require_exists(cfg.manifest, "--manifest");
    require_exists(cfg.splits, "--splits");
    const model::Checkpoint ck = model::load_checkpoint(cfg.checkpoint);
    const std::vector<data::CaptionRecord> records = load_clean_manifest(cfg.manifest);
    const data::SplitSet split = data::SplitSet::load(cfg.splits);
    const auto by_id = index_by_id(records);
    std::vector<audio::FeatureMatrix> train_feats;
    for (const data::CaptionRecord* r : select(by_id, split.train)) {
      train_feats.push_back(audio::read_feature_file(feature_path(cfg.features, r->id)));
    }
    const data::FeatureDistribution dist = data::FeatureDistribution::fit(train_feats);
    const auto eval = select(by_id, split.test);
    for (std::size_t i = 0; i < eval.size(); ++i) {
      const audio::FeatureMatrix f = data::random_input_baseline(dist, rng);
      const ng::Tensor x = model::features_tensor(f.values, f.frames, f.bands);
      lines.push_back(data::join(model::predict_caption(x, ck.params, vocab, ck.config.caption_steps)));
    }
    extra["ids"] = ids_of(eval);
    if (!cfg.references.empty()) write_references(cfg.references[0], eval);
  } else {
    throw UsageError("--mode must be random-words or random-input");
  }
  write_lines(cfg.out, lines);
  write_meta(cfg.out, "baseline", cfg, std::move(extra));
  out << "wrote " << lines.size() << " " << cfg.mode << " captions\n";
}

// ---- argument wiring -------------------------------------------------------

// Flags are parsed into `flags`; after parsing, those actually given are
// copied over the config-file values.
class Wiring {
 public:
  explicit Wiring(RunConfig& flags) : flags_(flags) {}

  template <typename T>
  void add(CLI::App* sub, const std::string& name, T RunConfig::*field, const std::string& help) {
    CLI::Option* opt = sub->add_option(name, flags_.*field, help);
    overrides_.push_back({opt, [field, this](RunConfig& c) { c.*field = flags_.*field; }});
  }

  template <typename Fn>
  CLI::Option* add_custom(CLI::App* sub, const std::string& name, std::size_t& storage, Fn apply,
                          const std::string& help) {
    CLI::Option* opt = sub->add_option(name, storage, help);
    overrides_.push_back({opt, apply});
    return opt;
  }

  void apply(RunConfig& cfg) const {
    for (const auto& [opt, fn] : overrides_) {
      if (opt->count() > 0) fn(cfg);
    }
  }

 private:
  RunConfig& flags_;
  std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> overrides_;
};

using Handler = void (*)(const RunConfig&, std::ostream&);

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Audio captioning toolkit", "acap"};
  app.require_subcommand(1);
  RunConfig flags;
  Wiring wiring(flags);
  std::size_t epochs = 0, patience = 0;
  fs::path config_path;
  std::map<CLI::App*, Handler> handlers;

  auto sub = [&](const char* name, const char* help, Handler h) {
    CLI::App* s = app.add_subcommand(name, help);
    s->add_option("--config", config_path, "JSON config file; flags take precedence");
    wiring.add(s, "--seed", &RunConfig::seed, "Random seed");
    wiring.add(s, "--out", &RunConfig::out, "Output path");
    handlers[s] = h;
    return s;
  };

  CLI::App* extract = sub("extract", "Compute log-mel feature files for every manifest row", cmd_extract);
  wiring.add(extract, "--manifest", &RunConfig::manifest, "Manifest CSV (id,audio_path,caption)");
  wiring.add(extract, "--threads", &RunConfig::threads, "Worker threads (0 = all cores)");

  CLI::App* prep = sub("prep-captions", "Clean captions and drop empty ones", cmd_prep_captions);
  wiring.add(prep, "--manifest", &RunConfig::manifest, "Raw manifest CSV");
  wiring.add(prep, "--dictionary", &RunConfig::dictionary, "Word list, one word per line");

  CLI::App* splits = sub("make-splits", "Select a 60/20/20 split among random candidates", cmd_make_splits);
  wiring.add(splits, "--manifest", &RunConfig::manifest, "Cleaned manifest CSV");
  wiring.add(splits, "--candidates-count", &RunConfig::candidates_count, "Number of candidate splits");
  wiring.add(splits, "--vocab", &RunConfig::vocab, "Also write the vocabulary here");
  wiring.add(splits, "--threads", &RunConfig::threads, "Worker threads (0 = all cores)");

  CLI::App* train = sub("train", "Train the captioning model", cmd_train);
  wiring.add(train, "--manifest", &RunConfig::manifest, "Cleaned manifest CSV");
  wiring.add(train, "--features", &RunConfig::features, "Directory of feature files");
  wiring.add(train, "--splits", &RunConfig::splits, "Splits JSON");
  wiring.add(train, "--vocab", &RunConfig::vocab, "Vocabulary file");
  wiring.add(train, "--checkpoint", &RunConfig::checkpoint, "Checkpoint to write");
  wiring.add(train, "--threads", &RunConfig::threads, "Worker threads (0 = all cores)");
  wiring.add_custom(train, "--epochs", epochs, [&](RunConfig& c) { c.train.max_epochs = epochs; }, "Maximum epochs");
  wiring.add_custom(train, "--patience", patience, [&](RunConfig& c) { c.train.patience = patience; },
                    "Early-stopping patience (0 disables)");

  CLI::App* caption = sub("caption", "Greedy captions for the test split (or all records)", cmd_caption);
  wiring.add(caption, "--checkpoint", &RunConfig::checkpoint, "Trained checkpoint");
  wiring.add(caption, "--vocab", &RunConfig::vocab, "Vocabulary file");
  wiring.add(caption, "--features", &RunConfig::features, "Directory of feature files");
  wiring.add(caption, "--manifest", &RunConfig::manifest, "Cleaned manifest CSV");
  wiring.add(caption, "--splits", &RunConfig::splits, "Splits JSON; captions its test records");
  wiring.add(caption, "--references", &RunConfig::references, "Also write line-aligned references here");
  wiring.add(caption, "--threads", &RunConfig::threads, "Worker threads (0 = all cores)");

  CLI::App* evaluate = sub("evaluate", "Score candidate files against references", cmd_evaluate);
  wiring.add(evaluate, "--candidates", &RunConfig::candidates, "Candidate file, one per run (repeatable)");
  wiring.add(evaluate, "--references", &RunConfig::references, "Reference file (repeatable, one per reference set)");
  wiring.add(evaluate, "--per-pair", &RunConfig::per_pair, "Per-pair CSV of the first run");

  CLI::App* baseline = sub("baseline", "Random-words or random-input baseline captions", cmd_baseline);
  wiring.add(baseline, "--mode", &RunConfig::mode, "random-words or random-input");
  wiring.add(baseline, "--vocab", &RunConfig::vocab, "Vocabulary file");
  wiring.add(baseline, "--manifest", &RunConfig::manifest, "Cleaned manifest CSV");
  wiring.add(baseline, "--splits", &RunConfig::splits, "Splits JSON");
  wiring.add(baseline, "--checkpoint", &RunConfig::checkpoint, "Checkpoint (random-input)");
  wiring.add(baseline, "--features", &RunConfig::features, "Directory of feature files (random-input)");
  wiring.add(baseline, "--references", &RunConfig::references, "Also write line-aligned references here");
  wiring.add(baseline, "--count", &RunConfig::count, "Number of captions when no manifest is given");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg.apply_json(read_text(config_path));
    wiring.apply(cfg);
    for (const auto& [s, h] : handlers) {
      if (s->parsed()) {
        h(cfg, out);
        return 0;
      }
    }
    throw UsageError("no subcommand given");
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int run_command(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_command(args, std::cout, std::cerr);
}

}  // namespace acap::cli

// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "acap/errors.hpp"
#include "acap/metrics.hpp"

namespace acap::metrics {

const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names{"BLEU_1", "BLEU_2", "BLEU_3", "BLEU_4",
                                              "ROUGE_L", "METEOR", "CIDEr_D"};
  return names;
}

CorpusScores evaluate_corpus(std::span<const EvalPair> pairs, std::span<const std::string> selection) {
  check_corpus(pairs);
  std::vector<std::string> wanted(selection.begin(), selection.end());
  if (wanted.empty()) wanted = metric_names();
  for (const std::string& w : wanted) {
    if (std::find(metric_names().begin(), metric_names().end(), w) == metric_names().end()) {
      throw ConfigError("unknown metric '" + w + "'");
    }
  }
  const auto want = [&](const std::string& n) { return std::find(wanted.begin(), wanted.end(), n) != wanted.end(); };

  CorpusScores out;
  if (want("BLEU_1") || want("BLEU_2") || want("BLEU_3") || want("BLEU_4")) {
    const BleuStats s = bleu_stats(pairs);
    for (int n = 1; n <= 4; ++n) {
      const std::string name = "BLEU_" + std::to_string(n);
      if (want(name)) out[name] = bleu_from_stats(s, n);
    }
  }
  if (want("ROUGE_L")) out["ROUGE_L"] = rouge_l(pairs);
  if (want("METEOR")) out["METEOR"] = meteor(pairs);
  if (want("CIDEr_D")) out["CIDEr_D"] = cider_d(pairs);
  return out;
}

std::vector<CorpusScores> per_pair_scores(std::span<const EvalPair> pairs) {
  check_corpus(pairs);
  const std::vector<double> cider = cider_d_scores(pairs);
  const std::vector<MatchStage> stages = default_stages();
  std::vector<CorpusScores> out(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const BleuStats s = bleu_stats(pairs.subspan(i, 1));
    for (int n = 1; n <= 4; ++n) out[i]["BLEU_" + std::to_string(n)] = bleu_from_stats(s, n);
    out[i]["ROUGE_L"] = rouge_l_pair(pairs[i].candidate, pairs[i].references);
    out[i]["METEOR"] = meteor_pair(pairs[i].candidate, pairs[i].references, stages);
    out[i]["CIDEr_D"] = cider[i];
  }
  return out;
}

MetricReport summarize(std::span<const CorpusScores> runs) {
  if (runs.empty()) throw ConfigError("no runs to summarize");
  MetricReport r;
  r.runs = runs.size();
  for (const auto& [name, unused] : runs[0]) {
    double sum = 0.0;
    for (const CorpusScores& run : runs) {
      const auto it = run.find(name);
      if (it == run.end()) throw ConfigError("metric '" + name + "' missing from a run");
      sum += it->second;
    }
    const double mean = sum / static_cast<double>(runs.size());
    double sq = 0.0;
    for (const CorpusScores& run : runs) sq += (run.at(name) - mean) * (run.at(name) - mean);
    r.metrics[name] = {mean, std::sqrt(sq / static_cast<double>(runs.size()))};
  }
  if (r.metrics.count("METEOR") != 0) {
    r.notes.push_back("METEOR uses exact and Porter-stem matching only; no synonym or paraphrase stages.");
  }
  r.notes.push_back("Tokens are whitespace-separated after caption normalization.");
  return r;
}

std::string report_json(const MetricReport& report) {
  nlohmann::ordered_json j;
  j["notes"] = report.notes;
  j["runs"] = report.runs;
  nlohmann::ordered_json m = nlohmann::ordered_json::object();
  for (const std::string& name : metric_names()) {
    const auto it = report.metrics.find(name);
    if (it != report.metrics.end()) m[name] = {{"mean", it->second.mean}, {"std", it->second.std}};
  }
  j["metrics"] = m;
  return j.dump(2) + "\n";
}

void write_report(const std::filesystem::path& path, const MetricReport& report) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << report_json(report);
  if (!out) throw IoError("write failed: " + path.string());
}

void write_per_pair_csv(const std::filesystem::path& path, std::span<const std::string> ids,
                        std::span<const CorpusScores> scores) {
  if (ids.size() != scores.size()) throw DimensionError("per-pair CSV: ids and scores differ in length");
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "id";
  for (const std::string& n : metric_names()) out << ',' << n;
  out << '\n' << std::setprecision(10);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out << ids[i];
    for (const std::string& n : metric_names()) {
      const auto it = scores[i].find(n);
      out << ',';
      if (it != scores[i].end()) out << it->second;
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

std::string format_table(const MetricReport& report) {
  std::ostringstream os;
  for (const std::string& name : metric_names()) {
    const auto it = report.metrics.find(name);
    if (it == report.metrics.end()) continue;
    char line[96];
    std::snprintf(line, sizeof line, "%-8s %.3f \xC2\xB1%.3f\n", name.c_str(), it->second.mean, it->second.std);
    os << line;
  }
  return os.str();
}

}  // namespace acap::metrics

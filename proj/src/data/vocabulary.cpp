// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <unordered_map>

#include "acap/data_prep.hpp"
#include "acap/errors.hpp"
#include "acap/vocabulary.hpp"

namespace acap {

Vocabulary::Vocabulary() : Vocabulary(std::vector<std::string>{}) {}

Vocabulary::Vocabulary(const std::vector<std::string>& words) {
  words_.reserve(words.size() + 1);
  words_.emplace_back(kEos);
  index_.emplace(kEos, kEosIndex);
  for (const std::string& w : words) {
    if (w == kEos) throw ConfigError("vocabulary words must not include the EOS token");
    if (!index_.emplace(w, static_cast<int>(words_.size())).second) {
      throw ConfigError("duplicate vocabulary word '" + w + "'");
    }
    words_.push_back(w);
  }
}

const std::string& Vocabulary::word(int index) const {
  if (index < 0 || static_cast<std::size_t>(index) >= words_.size()) {
    throw DimensionError("vocabulary index " + std::to_string(index) + " out of range");
  }
  return words_[static_cast<std::size_t>(index)];
}

int Vocabulary::index(const std::string& word) const {
  const auto it = index_.find(word);
  return it == index_.end() ? -1 : it->second;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write vocabulary " + path.string());
  for (const std::string& w : words_) out << w << '\n';
  if (!out) throw IoError("short write to " + path.string());
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open vocabulary " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  if (lines.empty() || lines[0] != kEos) {
    throw FormatError(path.string() + ": first line must be the EOS token " + kEos);
  }
  lines.erase(lines.begin());
  return Vocabulary(lines);
}

namespace data {

Vocabulary build_vocabulary(const std::vector<CaptionRecord>& records, const SplitSet& split,
                            std::size_t min_count) {
  std::unordered_map<std::string, const CaptionRecord*> by_id;
  for (const CaptionRecord& r : records) by_id.emplace(r.id, &r);

  std::map<std::string, std::array<std::size_t, 3>> counts;
  const std::vector<std::string>* parts[3] = {&split.train, &split.validation, &split.test};
  for (std::size_t s = 0; s < 3; ++s) {
    for (const std::string& id : *parts[s]) {
      const auto it = by_id.find(id);
      if (it == by_id.end()) throw ConfigError("split references unknown record id '" + id + "'");
      for (const std::string& w : it->second->tokens) ++counts[w][s];
    }
  }

  std::vector<std::pair<std::string, std::size_t>> kept;
  for (const auto& [word, c] : counts) {
    if (word == Vocabulary::kEos) continue;
    if (c[0] >= min_count && c[1] >= min_count && c[2] >= min_count) {
      kept.emplace_back(word, c[0] + c[1] + c[2]);
    }
  }
  if (kept.empty()) throw ConfigError("no word reaches the minimum count in every split");
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::vector<std::string> words;
  words.reserve(kept.size());
  for (auto& [w, n] : kept) words.push_back(w);
  return Vocabulary(words);
}

}  // namespace data
}  // namespace acap

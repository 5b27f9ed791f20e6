// SPDX-License-Identifier: Apache-2.0
#include <cctype>
#include <fstream>

#include "acap/data_prep.hpp"
#include "acap/errors.hpp"

namespace acap::data {
namespace {

bool is_ascii_punct(unsigned char c) { return c < 0x80 && std::ispunct(c); }

std::string lower_ascii(std::string s) {
  for (char& c : s) {
    const auto u = static_cast<unsigned char>(c);
    if (u < 0x80) c = static_cast<char>(std::tolower(u));
  }
  return s;
}

}  // namespace

Dictionary load_dictionary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dictionary " + path.string());
  Dictionary dict;
  std::string line;
  while (std::getline(in, line)) {
    for (const std::string& w : split_whitespace(lower_ascii(line))) dict.insert(w);
  }
  return dict;
}

std::vector<std::string> split_whitespace(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::string join(const Tokens& tokens, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += sep;
    out += tokens[i];
  }
  return out;
}

// Dictionary filtering runs before the repeat collapse so that a second pass
// never finds a run the first one left behind ("bird xqzt bird").
Tokens normalize_caption(const std::string& raw, const Dictionary* dictionary) {
  std::string cleaned;
  cleaned.reserve(raw.size());
  for (char c : raw) {
    const auto u = static_cast<unsigned char>(c);
    if (is_ascii_punct(u)) continue;
    cleaned += u < 0x80 ? static_cast<char>(std::tolower(u)) : c;
  }
  Tokens out;
  for (std::string& w : split_whitespace(cleaned)) {
    if (dictionary && !dictionary->count(w)) continue;
    if (!out.empty() && out.back() == w) continue;
    out.push_back(std::move(w));
  }
  return out;
}

std::optional<std::vector<int>> encode_caption(const Tokens& tokens, const Vocabulary& vocab,
                                               std::size_t steps) {
  if (steps == 0) throw ConfigError("caption steps must be >= 1");
  std::vector<int> out;
  out.reserve(steps);
  for (const std::string& w : tokens) {
    if (out.size() + 1 >= steps) break;
    const int idx = vocab.index(w);
    if (idx < 0 || idx == Vocabulary::kEosIndex) continue;
    out.push_back(idx);
  }
  if (out.empty()) return std::nullopt;
  out.resize(steps, Vocabulary::kEosIndex);
  return out;
}

}  // namespace acap::data

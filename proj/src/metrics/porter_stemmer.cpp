// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <array>
#include <string_view>

#include "acap/metrics.hpp"

namespace acap::metrics {

namespace {

struct Rule {
  std::string_view suffix;
  std::string_view replacement;
};

bool is_consonant(const std::string& w, std::size_t i) {
  switch (w[i]) {
    case 'a':
    case 'e':
    case 'i':
    case 'o':
    case 'u':
      return false;
    case 'y':
      return i == 0 || !is_consonant(w, i - 1);
    default:
      return true;
  }
}

// Number of VC sequences in w[0, len).
int measure(const std::string& w, std::size_t len) {
  std::size_t i = 0;
  while (i < len && is_consonant(w, i)) ++i;
  int m = 0;
  while (i < len) {
    while (i < len && !is_consonant(w, i)) ++i;
    if (i >= len) break;
    while (i < len && is_consonant(w, i)) ++i;
    ++m;
  }
  return m;
}

bool has_vowel(const std::string& w, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) {
    if (!is_consonant(w, i)) return true;
  }
  return false;
}

bool double_consonant(const std::string& w, std::size_t len) {
  return len >= 2 && w[len - 1] == w[len - 2] && is_consonant(w, len - 1);
}

// *o: stem ends consonant-vowel-consonant, last not w, x or y.
bool cvc(const std::string& w, std::size_t len) {
  if (len < 3) return false;
  if (!is_consonant(w, len - 1) || is_consonant(w, len - 2) || !is_consonant(w, len - 3)) return false;
  const char c = w[len - 1];
  return c != 'w' && c != 'x' && c != 'y';
}

bool ends_with(const std::string& w, std::string_view s) {
  return w.size() >= s.size() && std::string_view(w).substr(w.size() - s.size()) == s;
}

void replace_suffix(std::string& w, std::size_t suffix_len, std::string_view repl) {
  w.resize(w.size() - suffix_len);
  w.append(repl);
}

// First (longest) matching suffix decides; it is replaced when the stem
// measure exceeds `min_measure`.
template <std::size_t N>
void apply_rules(std::string& w, const std::array<Rule, N>& rules, int min_measure) {
  for (const Rule& r : rules) {
    if (!ends_with(w, r.suffix)) continue;
    const std::size_t stem = w.size() - r.suffix.size();
    if (measure(w, stem) > min_measure) replace_suffix(w, r.suffix.size(), r.replacement);
    return;
  }
}

void step1a(std::string& w) {
  if (ends_with(w, "sses")) {
    replace_suffix(w, 4, "ss");
  } else if (ends_with(w, "ies")) {
    replace_suffix(w, 3, "i");
  } else if (ends_with(w, "ss")) {
  } else if (ends_with(w, "s")) {
    w.pop_back();
  }
}

void step1b(std::string& w) {
  bool cleanup = false;
  if (ends_with(w, "eed")) {
    if (measure(w, w.size() - 3) > 0) w.pop_back();
  } else if (ends_with(w, "ed") && has_vowel(w, w.size() - 2)) {
    w.resize(w.size() - 2);
    cleanup = true;
  } else if (ends_with(w, "ing") && has_vowel(w, w.size() - 3)) {
    w.resize(w.size() - 3);
    cleanup = true;
  }
  if (!cleanup) return;
  if (ends_with(w, "at") || ends_with(w, "bl") || ends_with(w, "iz")) {
    w.push_back('e');
  } else if (double_consonant(w, w.size())) {
    const char c = w.back();
    if (c != 'l' && c != 's' && c != 'z') w.pop_back();
  } else if (measure(w, w.size()) == 1 && cvc(w, w.size())) {
    w.push_back('e');
  }
}

void step1c(std::string& w) {
  if (ends_with(w, "y") && has_vowel(w, w.size() - 1)) w.back() = 'i';
}

constexpr std::array<Rule, 20> kStep2{{
    {"ational", "ate"}, {"ization", "ize"}, {"iveness", "ive"}, {"fulness", "ful"}, {"ousness", "ous"},
    {"tional", "tion"}, {"biliti", "ble"},  {"entli", "ent"},   {"ousli", "ous"},   {"ation", "ate"},
    {"alism", "al"},    {"aliti", "al"},    {"iviti", "ive"},   {"enci", "ence"},   {"anci", "ance"},
    {"izer", "ize"},    {"abli", "able"},   {"alli", "al"},     {"ator", "ate"},    {"eli", "e"},
}};

constexpr std::array<Rule, 7> kStep3{{
    {"icate", "ic"}, {"ative", ""}, {"alize", "al"}, {"iciti", "ic"}, {"ical", "ic"}, {"ness", ""}, {"ful", ""},
}};

void step4(std::string& w) {
  constexpr std::array<std::string_view, 19> kSuffixes{
      "ement", "ance", "ence", "able", "ible", "ment", "ant", "ent", "ion", "ism",
      "ate",   "iti",  "ous",  "ive",  "ize",  "al",   "er",  "ic",  "ou",
  };
  for (std::string_view s : kSuffixes) {
    if (!ends_with(w, s)) continue;
    const std::size_t stem = w.size() - s.size();
    if (measure(w, stem) <= 1) return;
    if (s == "ion" && !(stem > 0 && (w[stem - 1] == 's' || w[stem - 1] == 't'))) return;
    w.resize(stem);
    return;
  }
}

void step5(std::string& w) {
  if (ends_with(w, "e")) {
    const std::size_t stem = w.size() - 1;
    const int m = measure(w, stem);
    if (m > 1 || (m == 1 && !cvc(w, stem))) w.pop_back();
  }
  if (measure(w, w.size()) > 1 && double_consonant(w, w.size()) && w.back() == 'l') w.pop_back();
}

}  // namespace

std::string porter_stem(const std::string& word) {
  std::string w = word;
  if (w.size() <= 2) return w;
  step1a(w);
  step1b(w);
  step1c(w);
  apply_rules(w, kStep2, 0);
  apply_rules(w, kStep3, 0);
  step4(w);
  step5(w);
  return w;
}

}  // namespace acap::metrics

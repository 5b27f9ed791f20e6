// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

namespace acap {

/// Word <-> index map. The end-of-sentence token always sits at index 0.
class Vocabulary {
 public:
  static constexpr const char* kEos = "<eos>";
  static constexpr int kEosIndex = 0;

  Vocabulary();
  /// `words` must not contain the EOS token or duplicates.
  explicit Vocabulary(const std::vector<std::string>& words);

  std::size_t size() const { return words_.size(); }
  const std::string& word(int index) const;
  /// -1 when absent.
  int index(const std::string& word) const;
  bool contains(const std::string& word) const { return index(word) >= 0; }
  const std::vector<std::string>& words() const { return words_; }

  /// One word per line, line number = index, EOS on line 0.
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.words_ == b.words_; }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace acap

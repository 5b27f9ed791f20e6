// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: extract, prep-captions, make-splits, train,
// caption, evaluate, baseline.
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "acap/model.hpp"
#include "acap/training.hpp"

namespace acap::cli {

/// Settings shared by the subcommands. Precedence: flags > --config file > defaults.
struct RunConfig {
  std::filesystem::path manifest;
  std::filesystem::path features;
  std::filesystem::path dictionary;
  std::filesystem::path vocab;
  std::filesystem::path splits;
  std::filesystem::path checkpoint;
  std::filesystem::path out;
  std::vector<std::filesystem::path> candidates;
  std::vector<std::filesystem::path> references;
  std::filesystem::path per_pair;
  std::string mode = "random-words";
  std::uint64_t seed = 0;
  std::size_t candidates_count = 1000;
  std::size_t min_count = 5;
  std::size_t count = 0;
  std::size_t threads = 0;
  model::ModelConfig model;
  training::TrainConfig train;

  /// Applies the keys of a JSON object; unknown keys raise ConfigError.
  void apply_json(const std::string& text);
};

/// Runs one subcommand; args exclude the program name. Errors are printed to
/// `err` and turn into a nonzero status.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_command(int argc, char** argv);

}  // namespace acap::cli

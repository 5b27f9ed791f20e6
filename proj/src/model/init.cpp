// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "acap/errors.hpp"
#include "acap/model.hpp"

namespace acap::model {
namespace {

void glorot_uniform(Tensor& w, std::mt19937_64& rng) {
  const double fan_in = static_cast<double>(w.rows());
  const double fan_out = static_cast<double>(w.cols());
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (double& v : w.values()) v = dist(rng);
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

// Gram-Schmidt with one re-orthogonalisation pass per column. Diagonal of R
// is the column norm, so it is positive and no sign fix-up remains.
Tensor orthogonal_matrix(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::vector<double>> cols(n, std::vector<double>(n));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) cols[c][r] = normal(rng);
  }
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double>& v = cols[j];
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = 0; k < j; ++k) {
        double proj = 0.0;
        for (std::size_t i = 0; i < n; ++i) proj += cols[k][i] * v[i];
        for (std::size_t i = 0; i < n; ++i) v[i] -= proj * cols[k][i];
      }
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm < 1e-12) throw NumericError("orthogonal init: rank-deficient draw");
    for (double& x : v) x /= norm;
  }
  Tensor q({n, n});
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) q.at(r, c) = cols[c][r];
  }
  return q;
}

ModelParams init_params(const ModelConfig& config, std::uint64_t seed) {
  ModelParams p = ModelParams::zeros(config);
  std::mt19937_64 rng(seed);
  p.for_each([&](const std::string& name, Tensor& t) {
    const std::size_t dot = name.rfind('.');
    const std::string leaf = name.substr(dot + 1);
    if (leaf.rfind("u_", 0) == 0) {
      t = orthogonal_matrix(t.rows(), rng);
    } else if (leaf.rfind("w_", 0) == 0 || ends_with(name, ".weight")) {
      glorot_uniform(t, rng);
    } else {
      t.fill(0.0);
    }
  });
  return p;
}

}  // namespace acap::model

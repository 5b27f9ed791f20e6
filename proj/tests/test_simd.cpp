// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <random>

#include "acap/audio_features.hpp"
#include "acap/model.hpp"
#include "acap/simd/kernels.hpp"
#include "support.hpp"

using namespace acap;

namespace {

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

std::vector<simd::Backend> accelerated() {
  std::vector<simd::Backend> out;
  for (simd::Backend b : simd::available_backends()) {
    if (b != simd::Backend::Scalar) out.push_back(b);
  }
  return out;
}

}  // namespace

TEST_CASE("scalar backend is always available") {
  CHECK(simd::supported(simd::Backend::Scalar));
  CHECK(simd::backend_name(simd::Backend::Scalar) == "scalar");
  const auto all = simd::available_backends();
  CHECK(std::find(all.begin(), all.end(), simd::Backend::Scalar) != all.end());
}

TEST_CASE("unsupported backend is rejected") {
  for (simd::Backend b : {simd::Backend::Avx2, simd::Backend::Neon}) {
    if (!simd::supported(b)) CHECK_THROWS(simd::kernels_for(b));
  }
}

TEST_CASE("scoped backend restores the previous selection") {
  const simd::Backend before = simd::active_backend();
  {
    simd::ScopedBackend s(simd::Backend::Scalar);
    CHECK(simd::active_backend() == simd::Backend::Scalar);
  }
  CHECK(simd::active_backend() == before);
}

TEST_CASE("accelerated kernels match scalar kernels") {
  const simd::KernelTable& ref = simd::scalar_kernels();
  std::mt19937_64 rng(11);
  for (simd::Backend b : accelerated()) {
    const simd::KernelTable& k = simd::kernels_for(b);
    CAPTURE(k.name);
    for (std::size_t n : {0U, 1U, 2U, 3U, 4U, 5U, 7U, 8U, 15U, 16U, 17U, 31U, 64U, 65U, 1025U}) {
      CAPTURE(n);
      const auto a = random_vector(n, rng);
      const auto x = random_vector(n, rng);
      const double d_ref = ref.dot(a.data(), x.data(), n);
      const double d = k.dot(a.data(), x.data(), n);
      CHECK(std::abs(d - d_ref) <= 1e-12 * (1.0 + std::abs(d_ref)));

      auto y_ref = random_vector(n, rng);
      auto y = y_ref;
      ref.axpy(0.37, x.data(), y_ref.data(), n);
      k.axpy(0.37, x.data(), y.data(), n);
      CHECK(max_abs_diff(y, y_ref) <= 1e-15);

      for (std::size_t rows : {1U, 3U, 4U, 5U, 9U}) {
        const auto m = random_vector(rows * n, rng);
        std::vector<double> g_ref(rows), g(rows);
        ref.gemv(m.data(), rows, n, x.data(), g_ref.data());
        k.gemv(m.data(), rows, n, x.data(), g.data());
        CHECK(max_abs_diff(g, g_ref) <= 1e-12 * (1.0 + static_cast<double>(n)));
      }
    }
  }
}

TEST_CASE("feature extraction agrees across backends") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd(0.0, 0.1);
  audio::PcmSignal s;
  s.samples.resize(audio::kClipSamples);
  for (double& v : s.samples) v = nd(rng);
  audio::FeatureMatrix ref;
  {
    simd::ScopedBackend scope(simd::Backend::Scalar);
    ref = audio::extract_features(s);
  }
  for (simd::Backend b : accelerated()) {
    simd::ScopedBackend scope(b);
    const audio::FeatureMatrix f = audio::extract_features(s);
    CHECK(max_abs_diff(f.values, ref.values) <= 1e-9);
  }
}

TEST_CASE("model forward pass agrees across backends") {
  model::ModelConfig mc;
  mc.seq_len = 40;
  mc.vocab_size = 50;
  std::mt19937_64 rng(5);
  const model::ModelParams p = model::init_params(mc, 9);
  const ng::Tensor x = testing::random_tensor(mc.seq_len, mc.n_feats, rng);
  model::Prediction ref;
  {
    simd::ScopedBackend scope(simd::Backend::Scalar);
    ref = model::run_model(x, p, mc.caption_steps);
  }
  for (simd::Backend b : accelerated()) {
    simd::ScopedBackend scope(b);
    const model::Prediction pred = model::run_model(x, p, mc.caption_steps);
    std::vector<double> a(pred.probabilities.values().begin(), pred.probabilities.values().end());
    std::vector<double> r(ref.probabilities.values().begin(), ref.probabilities.values().end());
    CHECK(max_abs_diff(a, r) <= 1e-10);
  }
}

// SPDX-License-Identifier: Apache-2.0
#include "acap/errors.hpp"
#include "acap/training.hpp"

namespace acap::training {

Tensor dropout_mask(std::size_t rows, std::size_t cols, double rate, std::mt19937_64& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ConfigError("dropout rate must be in [0, 1)");
  Tensor mask({rows, cols}, 1.0);
  if (rate == 0.0) return mask;
  const double keep_scale = 1.0 / (1.0 - rate);
  std::bernoulli_distribution keep(1.0 - rate);
  for (double& v : mask.values()) v = keep(rng) ? keep_scale : 0.0;
  return mask;
}

Tensor apply_dropout(const Tensor& x, double rate, std::mt19937_64& rng, DropoutMode mode) {
  Tensor out = x;
  if (rate == 0.0) return out;
  if (mode == DropoutMode::Input) {
    const Tensor mask = dropout_mask(x.rows(), x.cols(), rate, rng);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  } else {
    const Tensor mask = dropout_mask(1, x.cols(), rate, rng);
    for (std::size_t r = 0; r < out.rows(); ++r) {
      for (std::size_t c = 0; c < out.cols(); ++c) out.at(r, c) *= mask[c];
    }
  }
  return out;
}

DropoutMasks::DropoutMasks(double input_rate, double recurrent_rate, std::uint64_t seed)
    : input_rate_(input_rate), recurrent_rate_(recurrent_rate), rng_(seed) {}

Tensor DropoutMasks::encoder_input(std::size_t, std::size_t, std::size_t rows, std::size_t cols) {
  if (input_rate_ == 0.0) return {};
  return dropout_mask(rows, cols, input_rate_, rng_);
}

Tensor DropoutMasks::encoder_recurrent(std::size_t, std::size_t, std::size_t hid) {
  if (recurrent_rate_ == 0.0) return {};
  return dropout_mask(1, hid, recurrent_rate_, rng_);
}

Tensor DropoutMasks::decoder_input(std::size_t, std::size_t, std::size_t cols) {
  if (input_rate_ == 0.0) return {};
  return dropout_mask(1, cols, input_rate_, rng_);
}

Tensor DropoutMasks::decoder_recurrent(std::size_t, std::size_t hid) {
  if (recurrent_rate_ == 0.0) return {};
  return dropout_mask(1, hid, recurrent_rate_, rng_);
}

}  // namespace acap::training

// SPDX-License-Identifier: Apache-2.0
#include "acap/errors.hpp"
#include "acap/model.hpp"

namespace acap::model {

void ModelConfig::validate() const {
  auto positive = [](std::uint32_t v, const char* what) {
    if (v == 0) throw ConfigError(std::string("model config: ") + what + " must be >= 1");
  };
  positive(n_feats, "n_feats");
  for (auto h : encoder_hidden) positive(h, "encoder hidden size");
  for (auto h : decoder_hidden) positive(h, "decoder hidden size");
  positive(vocab_size, "vocab_size");
  positive(caption_steps, "caption_steps");
  positive(seq_len, "seq_len");
  if (encoder_hidden[0] != encoder_hidden[1]) {
    throw ConfigError("model config: encoder layers 1 and 2 must have equal width for the residual sum");
  }
}

ModelConfig ModelConfig::tiny() {
  ModelConfig c;
  c.n_feats = 3;
  c.encoder_hidden = {2, 2, 3};
  c.decoder_hidden = {8, 8};
  c.vocab_size = 4;
  c.caption_steps = 3;
  c.seq_len = 5;
  return c;
}

std::size_t gru_layer_param_count(std::size_t inputs, std::size_t hidden) {
  return 3 * (inputs * hidden + hidden * hidden + hidden);
}

std::size_t dense_param_count(std::size_t inputs, std::size_t outputs) {
  return inputs * outputs + outputs;
}

std::size_t count_params(const ModelConfig& c) {
  c.validate();
  std::size_t total = 0;
  std::size_t in = c.n_feats;
  for (std::size_t l = 0; l < 3; ++l) {
    total += 2 * gru_layer_param_count(in, c.encoder_hidden[l]);
    in = 2 * c.encoder_hidden[l];
  }
  total += dense_param_count(c.alignment_inputs(), 1);
  total += gru_layer_param_count(c.encoder_width(), c.decoder_hidden[0]);
  total += gru_layer_param_count(c.decoder_hidden[0], c.decoder_hidden[1]);
  total += dense_param_count(c.decoder_hidden[1], c.vocab_size);
  return total;
}

}  // namespace acap::model

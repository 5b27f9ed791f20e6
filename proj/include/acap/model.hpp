// SPDX-License-Identifier: Apache-2.0
//
// Encoder / attention / decoder captioning network.
//
//   encoder:   three bidirectional GRU layers; layer 3 reads H1 + H2
//   attention: one dense scorer over [h3_t ; h'_{i-1}], softmax over t
//   decoder:   two GRU layers fed only by the context vector, then a dense
//              softmax classifier over the vocabulary
//
// GRU convention: h_t = z * h_{t-1} + (1 - z) * candidate.
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "acap/numgraph.hpp"
#include "acap/vocabulary.hpp"

namespace acap::model {

using ng::Tape;
using ng::Tensor;
using ng::Var;

struct ModelConfig {
  std::uint32_t n_feats = 64;
  std::array<std::uint32_t, 3> encoder_hidden{64, 64, 128};  // per direction
  std::array<std::uint32_t, 2> decoder_hidden{128, 256};
  std::uint32_t vocab_size = 633;
  std::uint32_t caption_steps = 11;
  std::uint32_t seq_len = 1289;

  /// Throws ConfigError on zero sizes or when layers 1 and 2 differ in
  /// width (the residual sum needs equal widths).
  void validate() const;
  std::uint32_t encoder_width() const { return 2 * encoder_hidden[2]; }
  std::uint32_t alignment_inputs() const { return encoder_width() + decoder_hidden[0]; }

  /// T = 5, n_feats = 3, encoder 2/2/3, decoder 8/8, vocab 4, I = 3.
  static ModelConfig tiny();

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct GruLayerParams {
  Tensor w_update, w_reset, w_candidate;  // in x hid
  Tensor u_update, u_reset, u_candidate;  // hid x hid
  Tensor b_update, b_reset, b_candidate;  // hid

  std::size_t inputs() const { return w_update.rows(); }
  std::size_t hidden() const { return w_update.cols(); }
};

struct BiGruParams {
  GruLayerParams forward;
  GruLayerParams backward;
};

struct DenseParams {
  Tensor weight;  // in x out
  Tensor bias;    // out
};

struct ModelParams {
  std::array<BiGruParams, 3> encoder;
  DenseParams alignment;
  std::array<GruLayerParams, 2> decoder;
  DenseParams classifier;

  /// Zero-valued parameters with the shapes implied by `config`.
  static ModelParams zeros(const ModelConfig& config);

  /// Visits every tensor with a stable dotted name, e.g. "encoder.0.fwd.w_update".
  void for_each(const std::function<void(const std::string&, Tensor&)>& fn);
  void for_each(const std::function<void(const std::string&, const Tensor&)>& fn) const;

  std::size_t tensor_count() const;
  std::size_t parameter_count() const;
  bool all_finite() const;

  friend bool operator==(const ModelParams& a, const ModelParams& b);
};

/// Trainable-parameter total under one bias vector per gate.
std::size_t count_params(const ModelConfig& config);

/// Parameter count of one unidirectional GRU layer.
std::size_t gru_layer_param_count(std::size_t inputs, std::size_t hidden);
std::size_t dense_param_count(std::size_t inputs, std::size_t outputs);

/// Glorot-uniform input and dense weights, orthogonal recurrent weights,
/// zero biases. Deterministic in `seed`.
ModelParams init_params(const ModelConfig& config, std::uint64_t seed);

/// Orthogonal n x n matrix: Q of the QR decomposition of a standard-normal
/// matrix, with columns sign-fixed so diag(R) > 0.
Tensor orthogonal_matrix(std::size_t n, std::mt19937_64& rng);

// ---- graph construction ----------------------------------------------------

struct GruVars {
  Var w_update, w_reset, w_candidate;
  Var u_update, u_reset, u_candidate;
  Var b_update, b_reset, b_candidate;
};

struct DenseVars {
  Var weight, bias;
};

struct ModelVars {
  std::array<std::array<GruVars, 2>, 3> encoder;  // [layer][0 = fwd, 1 = bwd]
  DenseVars alignment;
  std::array<GruVars, 2> decoder;
  DenseVars classifier;
};

GruVars bind(Tape& tape, const GruLayerParams& p);
ModelVars bind(Tape& tape, const ModelParams& p);

/// Parameter handles in ModelParams::for_each order.
std::vector<Var> flatten(const ModelVars& vars);

/// Inverse of flatten. Throws DimensionError on a wrong handle count.
ModelVars unflatten(std::span<const Var> flat);

/// Supplies dropout masks while a graph is built; the default supplies
/// none. Empty tensors mean "no mask". Input masks multiply a layer's input,
/// recurrent masks multiply h_{t-1} before the recurrent products.
class MaskSource {
 public:
  virtual ~MaskSource() = default;
  /// Mask for the whole input sequence of encoder layer `layer`, direction `dir`.
  virtual Tensor encoder_input(std::size_t /*layer*/, std::size_t /*dir*/, std::size_t /*rows*/,
                               std::size_t /*cols*/) {
    return {};
  }
  virtual Tensor encoder_recurrent(std::size_t /*layer*/, std::size_t /*dir*/, std::size_t /*hid*/) {
    return {};
  }
  /// Mask for decoder layer `layer` input at one step.
  virtual Tensor decoder_input(std::size_t /*layer*/, std::size_t /*step*/, std::size_t /*cols*/) {
    return {};
  }
  virtual Tensor decoder_recurrent(std::size_t /*layer*/, std::size_t /*hid*/) { return {}; }
};

/// One GRU step from precomputed input projections x W + b (each 1 x hid).
/// `recurrent_mask` is a constant 1 x hid node or an invalid Var for none.
Var gru_step(Var x_update, Var x_reset, Var x_candidate, Var h_prev, const GruVars& p,
             Var recurrent_mask = {});

/// Single GRU cell from a raw input vector: projections plus one step.
Var gru_cell(Var x, Var h_prev, const GruVars& p, const Tensor& recurrent_mask = {});

/// Runs one direction over a T x in sequence; returns T x hid in time order.
Var gru_sequence(Var seq, const GruVars& p, bool reverse, const Tensor& input_mask,
                 const Tensor& recurrent_mask);

/// Bidirectional layer: row t = [forward h_t ; backward h_t].
Var bigru_layer(Var seq, const GruVars& fwd, const GruVars& bwd, MaskSource* masks = nullptr,
                std::size_t layer = 0);

/// T x n_feats -> T x (2 * encoder_hidden[2]).
Var encode(Var features, const ModelVars& p, MaskSource* masks = nullptr);

struct Attention {
  Var context;  // 1 x encoder width
  Var weights;  // 1 x T
};

/// Encoder-side alignment scores H3 * w[0:enc] (T x 1); independent of the
/// decoder step, so decode computes it once.
Var alignment_keys(Var encoded, const DenseVars& alignment);

Attention attend(Var encoded, Var keys, Var decoder_prev, const DenseVars& alignment);
Attention attend(Var encoded, Var decoder_prev, const DenseVars& alignment);

struct Decoded {
  Var probabilities;             // I x vocab
  std::vector<Var> attention;    // I entries, each 1 x T
};

Decoded decode(Var encoded, const ModelVars& p, std::size_t steps, MaskSource* masks = nullptr);

// ---- whole-model helpers without a caller-managed tape --------------------

struct Prediction {
  Tensor probabilities;                  // I x vocab
  std::vector<std::vector<double>> attention;
};

/// Inference forward pass (no dropout, no gradient recording).
Prediction run_model(const Tensor& features, const ModelParams& p, std::size_t steps);

/// Features as a T x n_feats tensor.
Tensor features_tensor(std::span<const double> values, std::size_t frames, std::size_t bands);

/// Argmax word index at each step, cut at the first occurrence of `eos_index`.
std::vector<int> greedy_indices(const Tensor& probabilities, int eos_index);

/// Greedy caption: most probable word per step, mapped through `vocab`,
/// truncated at the first EOS. At most caption_steps words.
std::vector<std::string> predict_caption(const Tensor& features, const ModelParams& p,
                                         const Vocabulary& vocab, std::size_t steps);

// ---- checkpoint ("ACKP") ---------------------------------------------------

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params,
                     const ModelConfig& config);

struct Checkpoint {
  ModelParams params;
  ModelConfig config;
};

Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace acap::model

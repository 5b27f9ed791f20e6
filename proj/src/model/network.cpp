// SPDX-License-Identifier: Apache-2.0
#include <algorithm>

#include "acap/errors.hpp"
#include "acap/model.hpp"

namespace acap::model {

GruVars bind(Tape& tape, const GruLayerParams& p) {
  return {tape.parameter(p.w_update), tape.parameter(p.w_reset), tape.parameter(p.w_candidate),
          tape.parameter(p.u_update), tape.parameter(p.u_reset), tape.parameter(p.u_candidate),
          tape.parameter(p.b_update), tape.parameter(p.b_reset), tape.parameter(p.b_candidate)};
}

ModelVars bind(Tape& tape, const ModelParams& p) {
  ModelVars v;
  for (std::size_t l = 0; l < 3; ++l) {
    v.encoder[l][0] = bind(tape, p.encoder[l].forward);
    v.encoder[l][1] = bind(tape, p.encoder[l].backward);
  }
  v.alignment = {tape.parameter(p.alignment.weight), tape.parameter(p.alignment.bias)};
  v.decoder[0] = bind(tape, p.decoder[0]);
  v.decoder[1] = bind(tape, p.decoder[1]);
  v.classifier = {tape.parameter(p.classifier.weight), tape.parameter(p.classifier.bias)};
  return v;
}

std::vector<Var> flatten(const ModelVars& vars) {
  std::vector<Var> out;
  auto gru = [&](const GruVars& g) {
    for (const Var& v : {g.w_update, g.w_reset, g.w_candidate, g.u_update, g.u_reset, g.u_candidate,
                         g.b_update, g.b_reset, g.b_candidate}) {
      out.push_back(v);
    }
  };
  for (const auto& layer : vars.encoder) {
    gru(layer[0]);
    gru(layer[1]);
  }
  out.push_back(vars.alignment.weight);
  out.push_back(vars.alignment.bias);
  gru(vars.decoder[0]);
  gru(vars.decoder[1]);
  out.push_back(vars.classifier.weight);
  out.push_back(vars.classifier.bias);
  return out;
}

ModelVars unflatten(std::span<const Var> flat) {
  ModelVars vars;
  std::size_t k = 0;
  auto next = [&]() -> Var {
    if (k >= flat.size()) throw DimensionError("unflatten: too few handles");
    return flat[k++];
  };
  auto gru = [&](GruVars& g) {
    for (Var* v : {&g.w_update, &g.w_reset, &g.w_candidate, &g.u_update, &g.u_reset, &g.u_candidate,
                   &g.b_update, &g.b_reset, &g.b_candidate}) {
      *v = next();
    }
  };
  for (auto& layer : vars.encoder) {
    gru(layer[0]);
    gru(layer[1]);
  }
  vars.alignment.weight = next();
  vars.alignment.bias = next();
  gru(vars.decoder[0]);
  gru(vars.decoder[1]);
  vars.classifier.weight = next();
  vars.classifier.bias = next();
  if (k != flat.size()) throw DimensionError("unflatten: too many handles");
  return vars;
}

Var gru_step(Var x_update, Var x_reset, Var x_candidate, Var h_prev, const GruVars& p,
             Var recurrent_mask) {
  const Var h = recurrent_mask.valid() ? ng::mul(h_prev, recurrent_mask) : h_prev;
  const Var z = ng::sigmoid(ng::add(x_update, ng::matmul(h, p.u_update)));
  const Var r = ng::sigmoid(ng::add(x_reset, ng::matmul(h, p.u_reset)));
  const Var candidate = ng::tanh(ng::add(x_candidate, ng::matmul(ng::mul(r, h), p.u_candidate)));
  return ng::gate_blend(z, h_prev, candidate);
}

Var gru_cell(Var x, Var h_prev, const GruVars& p, const Tensor& recurrent_mask) {
  if (x.cols() != p.w_update.rows() || h_prev.cols() != p.u_update.rows()) {
    throw DimensionError("gru_cell: input " + x.value().shape_string() + " / hidden " +
                         h_prev.value().shape_string() + " do not match weights " +
                         p.w_update.value().shape_string());
  }
  Tape& tape = x.tape();
  const Var xz = ng::add_row(ng::matmul(x, p.w_update), p.b_update);
  const Var xr = ng::add_row(ng::matmul(x, p.w_reset), p.b_reset);
  const Var xh = ng::add_row(ng::matmul(x, p.w_candidate), p.b_candidate);
  const Var mask = recurrent_mask.empty() ? Var{} : tape.constant(recurrent_mask);
  return gru_step(xz, xr, xh, h_prev, p, mask);
}

Var gru_sequence(Var seq, const GruVars& p, bool reverse, const Tensor& input_mask,
                 const Tensor& recurrent_mask) {
  Tape& tape = seq.tape();
  if (seq.cols() != p.w_update.rows()) {
    throw DimensionError("gru layer expects " + std::to_string(p.w_update.rows()) +
                         " inputs, sequence has " + std::to_string(seq.cols()));
  }
  const std::size_t steps = seq.rows();
  const std::size_t hid = p.u_update.rows();
  const Var x = input_mask.empty() ? seq : ng::mul(seq, tape.constant(input_mask));
  // Input projections for all timesteps at once.
  const Var xz = ng::add_row(ng::matmul(x, p.w_update), p.b_update);
  const Var xr = ng::add_row(ng::matmul(x, p.w_reset), p.b_reset);
  const Var xh = ng::add_row(ng::matmul(x, p.w_candidate), p.b_candidate);
  const Var mask = recurrent_mask.empty() ? Var{} : tape.constant(recurrent_mask);

  Var h = tape.constant(Tensor({1, hid}));
  std::vector<Var> out(steps);
  for (std::size_t s = 0; s < steps; ++s) {
    const std::size_t t = reverse ? steps - 1 - s : s;
    h = gru_step(ng::row(xz, t), ng::row(xr, t), ng::row(xh, t), h, p, mask);
    out[t] = h;
  }
  return ng::stack_rows(out);
}

Var bigru_layer(Var seq, const GruVars& fwd, const GruVars& bwd, MaskSource* masks,
                std::size_t layer) {
  if (fwd.u_update.rows() != bwd.u_update.rows()) {
    throw DimensionError("bidirectional layer needs equal hidden sizes in both directions");
  }
  const std::size_t hid = fwd.u_update.rows();
  Tensor in_mask[2], rec_mask[2];
  if (masks) {
    for (std::size_t d = 0; d < 2; ++d) {
      in_mask[d] = masks->encoder_input(layer, d, seq.rows(), seq.cols());
      rec_mask[d] = masks->encoder_recurrent(layer, d, hid);
    }
  }
  const Var f = gru_sequence(seq, fwd, false, in_mask[0], rec_mask[0]);
  const Var b = gru_sequence(seq, bwd, true, in_mask[1], rec_mask[1]);
  return ng::concat_cols(f, b);
}

Var encode(Var features, const ModelVars& p, MaskSource* masks) {
  const Var h1 = bigru_layer(features, p.encoder[0][0], p.encoder[0][1], masks, 0);
  const Var h2 = bigru_layer(h1, p.encoder[1][0], p.encoder[1][1], masks, 1);
  return bigru_layer(ng::add(h1, h2), p.encoder[2][0], p.encoder[2][1], masks, 2);
}

Var alignment_keys(Var encoded, const DenseVars& alignment) {
  const std::size_t width = encoded.cols();
  if (alignment.weight.rows() <= width || alignment.weight.cols() != 1) {
    throw DimensionError("alignment weight " + alignment.weight.value().shape_string() +
                         " does not fit encoder width " + std::to_string(width));
  }
  return ng::matmul(encoded, ng::slice_rows(alignment.weight, 0, width));
}

// score_t = [h3_t ; s] . w + b, split as h3_t . w_enc + (s . w_dec + b).
Attention attend(Var encoded, Var keys, Var decoder_prev, const DenseVars& alignment) {
  const std::size_t width = encoded.cols();
  const std::size_t dec = alignment.weight.rows() - width;
  if (decoder_prev.cols() != dec) {
    throw DimensionError("attend: decoder state has " + std::to_string(decoder_prev.cols()) +
                         " values, alignment layer expects " + std::to_string(dec));
  }
  const Var query = ng::add(ng::matmul(decoder_prev, ng::slice_rows(alignment.weight, width, dec)),
                            alignment.bias);
  const Var scores = ng::reshape(ng::add(keys, query), 1, encoded.rows());
  const Var weights = ng::softmax_rows(scores);
  return {ng::matmul(weights, encoded), weights};
}

Attention attend(Var encoded, Var decoder_prev, const DenseVars& alignment) {
  return attend(encoded, alignment_keys(encoded, alignment), decoder_prev, alignment);
}

Decoded decode(Var encoded, const ModelVars& p, std::size_t steps, MaskSource* masks) {
  Tape& tape = encoded.tape();
  const std::size_t hid1 = p.decoder[0].u_update.rows();
  const std::size_t hid2 = p.decoder[1].u_update.rows();
  const Var keys = alignment_keys(encoded, p.alignment);
  Tensor rec1, rec2;
  if (masks) {
    rec1 = masks->decoder_recurrent(0, hid1);
    rec2 = masks->decoder_recurrent(1, hid2);
  }
  const Var rec1_var = rec1.empty() ? Var{} : tape.constant(rec1);
  const Var rec2_var = rec2.empty() ? Var{} : tape.constant(rec2);

  auto step_input = [&](Var x, std::size_t layer, std::size_t i) {
    if (!masks) return x;
    Tensor m = masks->decoder_input(layer, i, x.cols());
    return m.empty() ? x : ng::mul(x, tape.constant(std::move(m)));
  };
  auto project = [](Var x, const GruVars& g) {
    return std::array<Var, 3>{ng::add_row(ng::matmul(x, g.w_update), g.b_update),
                              ng::add_row(ng::matmul(x, g.w_reset), g.b_reset),
                              ng::add_row(ng::matmul(x, g.w_candidate), g.b_candidate)};
  };

  Var h1 = tape.constant(Tensor({1, hid1}));
  Var h2 = tape.constant(Tensor({1, hid2}));
  Decoded out;
  std::vector<Var> logits;
  logits.reserve(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    const Attention att = attend(encoded, keys, h1, p.alignment);
    out.attention.push_back(att.weights);
    const auto x1 = project(step_input(att.context, 0, i), p.decoder[0]);
    h1 = gru_step(x1[0], x1[1], x1[2], h1, p.decoder[0], rec1_var);
    const auto x2 = project(step_input(h1, 1, i), p.decoder[1]);
    h2 = gru_step(x2[0], x2[1], x2[2], h2, p.decoder[1], rec2_var);
    logits.push_back(ng::add_row(ng::matmul(h2, p.classifier.weight), p.classifier.bias));
  }
  out.probabilities = ng::softmax_rows(ng::stack_rows(logits));
  return out;
}

Tensor features_tensor(std::span<const double> values, std::size_t frames, std::size_t bands) {
  return Tensor::matrix(frames, bands, std::vector<double>(values.begin(), values.end()));
}

Prediction run_model(const Tensor& features, const ModelParams& p, std::size_t steps) {
  Tape tape(false);
  const ModelVars vars = bind(tape, p);
  const Var x = tape.constant(features);
  const Decoded d = decode(encode(x, vars), vars, steps);
  Prediction pred;
  pred.probabilities = d.probabilities.value();
  for (const Var& w : d.attention) {
    pred.attention.emplace_back(w.value().values().begin(), w.value().values().end());
  }
  return pred;
}

std::vector<int> greedy_indices(const Tensor& probabilities, int eos_index) {
  std::vector<int> out;
  for (std::size_t i = 0; i < probabilities.rows(); ++i) {
    const auto row = probabilities.row(i);
    const int best = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    if (best == eos_index) break;
    out.push_back(best);
  }
  return out;
}

std::vector<std::string> predict_caption(const Tensor& features, const ModelParams& p,
                                         const Vocabulary& vocab, std::size_t steps) {
  if (p.classifier.bias.size() != vocab.size()) {
    throw DimensionError("classifier has " + std::to_string(p.classifier.bias.size()) +
                         " outputs but vocabulary has " + std::to_string(vocab.size()) + " words");
  }
  const Prediction pred = run_model(features, p, steps);
  std::vector<std::string> words;
  for (int idx : greedy_indices(pred.probabilities, Vocabulary::kEosIndex)) words.push_back(vocab.word(idx));
  return words;
}

}  // namespace acap::model

// SPDX-License-Identifier: Apache-2.0
#include "acap/errors.hpp"
#include "acap/model.hpp"

namespace acap::model {
namespace {

GruLayerParams gru_zeros(std::size_t in, std::size_t hid) {
  GruLayerParams p;
  for (Tensor* w : {&p.w_update, &p.w_reset, &p.w_candidate}) *w = Tensor({in, hid});
  for (Tensor* u : {&p.u_update, &p.u_reset, &p.u_candidate}) *u = Tensor({hid, hid});
  for (Tensor* b : {&p.b_update, &p.b_reset, &p.b_candidate}) *b = Tensor({hid});
  return p;
}

DenseParams dense_zeros(std::size_t in, std::size_t out) {
  return {Tensor({in, out}), Tensor({out})};
}

template <class Layer, class Fn>
void visit_gru(const std::string& prefix, Layer& p, Fn&& fn) {
  fn(prefix + ".w_update", p.w_update);
  fn(prefix + ".w_reset", p.w_reset);
  fn(prefix + ".w_candidate", p.w_candidate);
  fn(prefix + ".u_update", p.u_update);
  fn(prefix + ".u_reset", p.u_reset);
  fn(prefix + ".u_candidate", p.u_candidate);
  fn(prefix + ".b_update", p.b_update);
  fn(prefix + ".b_reset", p.b_reset);
  fn(prefix + ".b_candidate", p.b_candidate);
}

template <class Params, class Fn>
void visit_all(Params& p, Fn&& fn) {
  for (std::size_t l = 0; l < p.encoder.size(); ++l) {
    const std::string base = "encoder." + std::to_string(l);
    visit_gru(base + ".fwd", p.encoder[l].forward, fn);
    visit_gru(base + ".bwd", p.encoder[l].backward, fn);
  }
  fn(std::string("alignment.weight"), p.alignment.weight);
  fn(std::string("alignment.bias"), p.alignment.bias);
  for (std::size_t l = 0; l < p.decoder.size(); ++l) {
    visit_gru("decoder." + std::to_string(l), p.decoder[l], fn);
  }
  fn(std::string("classifier.weight"), p.classifier.weight);
  fn(std::string("classifier.bias"), p.classifier.bias);
}

}  // namespace

ModelParams ModelParams::zeros(const ModelConfig& c) {
  c.validate();
  ModelParams p;
  std::size_t in = c.n_feats;
  for (std::size_t l = 0; l < 3; ++l) {
    p.encoder[l].forward = gru_zeros(in, c.encoder_hidden[l]);
    p.encoder[l].backward = gru_zeros(in, c.encoder_hidden[l]);
    in = 2 * c.encoder_hidden[l];
  }
  p.alignment = dense_zeros(c.alignment_inputs(), 1);
  p.decoder[0] = gru_zeros(c.encoder_width(), c.decoder_hidden[0]);
  p.decoder[1] = gru_zeros(c.decoder_hidden[0], c.decoder_hidden[1]);
  p.classifier = dense_zeros(c.decoder_hidden[1], c.vocab_size);
  return p;
}

void ModelParams::for_each(const std::function<void(const std::string&, Tensor&)>& fn) {
  visit_all(*this, fn);
}

void ModelParams::for_each(const std::function<void(const std::string&, const Tensor&)>& fn) const {
  visit_all(*this, fn);
}

std::size_t ModelParams::tensor_count() const {
  std::size_t n = 0;
  for_each([&](const std::string&, const Tensor&) { ++n; });
  return n;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for_each([&](const std::string&, const Tensor& t) { n += t.size(); });
  return n;
}

bool ModelParams::all_finite() const {
  bool ok = true;
  for_each([&](const std::string&, const Tensor& t) { ok = ok && t.all_finite(); });
  return ok;
}

bool operator==(const ModelParams& a, const ModelParams& b) {
  std::vector<const Tensor*> lhs, rhs;
  a.for_each([&](const std::string&, const Tensor& t) { lhs.push_back(&t); });
  b.for_each([&](const std::string&, const Tensor& t) { rhs.push_back(&t); });
  if (lhs.size() != rhs.size()) return false;
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    if (!(*lhs[i] == *rhs[i])) return false;
  }
  return true;
}

}  // namespace acap::model

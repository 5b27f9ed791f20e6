// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "acap/errors.hpp"
#include "acap/training.hpp"

namespace acap::training {

AdamState AdamState::zeros_like(const ModelParams& params, AdamHyper hyper) {
  AdamState s;
  s.hyper = hyper;
  s.m = params;
  s.m.for_each([](const std::string&, Tensor& t) { t.fill(0.0); });
  s.v = s.m;
  return s;
}

void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state) {
  std::vector<std::pair<std::string, const Tensor*>> g;
  grads.for_each([&](const std::string& name, const Tensor& t) { g.emplace_back(name, &t); });
  std::vector<Tensor*> p, m, v;
  params.for_each([&](const std::string&, Tensor& t) { p.push_back(&t); });
  state.m.for_each([&](const std::string&, Tensor& t) { m.push_back(&t); });
  state.v.for_each([&](const std::string&, Tensor& t) { v.push_back(&t); });
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!g[k].second->same_shape(*p[k]) || !m[k]->same_shape(*p[k]) || !v[k]->same_shape(*p[k])) {
      throw DimensionError("adam_step: shape mismatch for " + g[k].first);
    }
    if (!g[k].second->all_finite()) throw NumericError("adam_step: non-finite gradient in " + g[k].first);
  }

  const AdamHyper& h = state.hyper;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correct1 = 1.0 - std::pow(h.beta1, t);
  const double correct2 = 1.0 - std::pow(h.beta2, t);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Tensor& gk = *g[k].second;
    Tensor& pk = *p[k];
    Tensor& mk = *m[k];
    Tensor& vk = *v[k];
    for (std::size_t i = 0; i < pk.size(); ++i) {
      mk[i] = h.beta1 * mk[i] + (1.0 - h.beta1) * gk[i];
      vk[i] = h.beta2 * vk[i] + (1.0 - h.beta2) * gk[i] * gk[i];
      const double m_hat = mk[i] / correct1;
      const double v_hat = vk[i] / correct2;
      pk[i] -= h.lr * m_hat / (std::sqrt(v_hat) + h.eps);
    }
  }
}

}  // namespace acap::training

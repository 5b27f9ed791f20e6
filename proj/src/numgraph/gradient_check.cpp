// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>

#include "acap/errors.hpp"
#include "acap/numgraph.hpp"

namespace acap::ng {
namespace {

double evaluate(const ScalarFn& fn, const std::vector<Tensor>& params) {
  Tape tape(false);
  std::vector<Var> vars;
  vars.reserve(params.size());
  for (const Tensor& p : params) vars.push_back(tape.parameter(p));
  const double v = fn(tape, vars).value()[0];
  if (!std::isfinite(v)) throw NumericError("gradient_check: non-finite function value");
  return v;
}

}  // namespace

double gradient_check(const ScalarFn& fn, std::vector<Tensor>& params, double eps, Stencil stencil) {
  std::vector<Tensor> analytic;
  {
    Tape tape(true);
    std::vector<Var> vars;
    vars.reserve(params.size());
    for (const Tensor& p : params) vars.push_back(tape.parameter(p));
    const Var out = fn(tape, vars);
    if (!std::isfinite(out.value()[0])) throw NumericError("gradient_check: non-finite function value");
    tape.backward(out);
    for (const Var& v : vars) {
      analytic.push_back(tape.grad(v));
      if (!analytic.back().all_finite()) throw NumericError("gradient_check: non-finite gradient");
    }
  }

  double worst = 0.0;
  for (std::size_t p = 0; p < params.size(); ++p) {
    for (std::size_t i = 0; i < params[p].size(); ++i) {
      const double saved = params[p][i];
      const auto at = [&](double offset) {
        params[p][i] = saved + offset;
        return evaluate(fn, params);
      };
      double numeric = 0.0;
      if (stencil == Stencil::ThreePoint) {
        numeric = (at(eps) - at(-eps)) / (2.0 * eps);
      } else {
        numeric = (8.0 * (at(eps) - at(-eps)) - (at(2.0 * eps) - at(-2.0 * eps))) / (12.0 * eps);
      }
      params[p][i] = saved;
      const double a = analytic[p][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-12});
      worst = std::max(worst, std::abs(a - numeric) / denom);
    }
  }
  return worst;
}

}  // namespace acap::ng

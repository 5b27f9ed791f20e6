// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <thread>

#include "acap/errors.hpp"
#include "acap/training.hpp"

namespace acap::training {

double cross_entropy_loss(const Tensor& probabilities, std::span<const int> targets) {
  if (targets.size() != probabilities.rows()) {
    throw DimensionError("cross_entropy_loss: " + std::to_string(targets.size()) + " targets for " +
                         std::to_string(probabilities.rows()) + " steps");
  }
  if (targets.empty()) throw DimensionError("cross_entropy_loss: no steps");
  double total = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] < 0 || static_cast<std::size_t>(targets[i]) >= probabilities.cols()) {
      throw DimensionError("cross_entropy_loss: target " + std::to_string(targets[i]) +
                           " outside [0, " + std::to_string(probabilities.cols()) + ")");
    }
    total -= std::log(probabilities.at(i, static_cast<std::size_t>(targets[i])));
  }
  return total / static_cast<double>(targets.size());
}

namespace {

void check_record(const EncodedRecord& record, std::size_t steps) {
  if (record.targets.size() != steps) {
    throw DimensionError("record '" + record.id + "' has " + std::to_string(record.targets.size()) +
                         " targets, model decodes " + std::to_string(steps) + " steps");
  }
}

}  // namespace

LossAndGrad loss_and_grad(const ModelParams& params, const EncodedRecord& record, std::size_t steps,
                          model::MaskSource* masks) {
  check_record(record, steps);
  ng::Tape tape(true);
  const model::ModelVars vars = model::bind(tape, params);
  const ng::Var x = tape.constant(record.features);
  const model::Decoded d = model::decode(model::encode(x, vars, masks), vars, steps, masks);
  const ng::Var loss = ng::nll(d.probabilities, record.targets);
  tape.backward(loss);

  LossAndGrad out;
  out.loss = loss.value()[0];
  out.grads = params;
  const std::vector<ng::Var> flat = model::flatten(vars);
  std::size_t k = 0;
  out.grads.for_each([&](const std::string&, Tensor& g) { g = tape.grad(flat[k++]); });
  return out;
}

double model_gradient_check(const ModelParams& params, const EncodedRecord& record, std::size_t steps,
                            double eps, ng::Stencil stencil) {
  check_record(record, steps);
  std::vector<Tensor> flat;
  params.for_each([&](const std::string&, const Tensor& t) { flat.push_back(t); });
  const ng::ScalarFn fn = [&](ng::Tape& tape, std::span<const ng::Var> vars) {
    const model::ModelVars mv = model::unflatten(vars);
    const ng::Var x = tape.constant(record.features);
    const model::Decoded d = model::decode(model::encode(x, mv), mv, steps);
    return ng::nll(d.probabilities, record.targets);
  };
  return ng::gradient_check(fn, flat, eps, stencil);
}

double record_loss(const ModelParams& params, const EncodedRecord& record, std::size_t steps) {
  check_record(record, steps);
  const model::Prediction pred = model::run_model(record.features, params, steps);
  return cross_entropy_loss(pred.probabilities, record.targets);
}

double dataset_loss(const ModelParams& params, std::span<const EncodedRecord> records, std::size_t steps,
                    std::size_t threads) {
  if (records.empty()) throw ConfigError("dataset_loss over an empty set");
  std::vector<double> losses(records.size());
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = std::min(threads, records.size());
  std::vector<std::exception_ptr> errors(threads);
  auto work = [&](std::size_t w) {
    try {
      for (std::size_t i = w; i < records.size(); i += threads) losses[i] = record_loss(params, records[i], steps);
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < threads; ++w) pool.emplace_back(work, w);
  work(0);
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  double total = 0.0;
  for (double l : losses) total += l;
  return total / static_cast<double>(records.size());
}

}  // namespace acap::training

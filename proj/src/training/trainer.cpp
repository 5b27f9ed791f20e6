// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <thread>

#include "acap/errors.hpp"
#include "acap/training.hpp"

namespace acap::training {

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (!(input_dropout >= 0.0 && input_dropout < 1.0)) throw ConfigError("input_dropout must be in [0, 1)");
  if (!(recurrent_dropout >= 0.0 && recurrent_dropout < 1.0)) {
    throw ConfigError("recurrent_dropout must be in [0, 1)");
  }
  if (max_epochs == 0) throw ConfigError("max_epochs must be >= 1");
  if (!(adam.lr >= 0.0) || !(adam.eps > 0.0) || !(adam.beta1 >= 0.0 && adam.beta1 < 1.0) ||
      !(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
    throw ConfigError("invalid Adam hyperparameters");
  }
}

std::uint64_t record_seed(std::uint64_t seed, std::size_t epoch, std::size_t position) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(epoch), static_cast<std::uint32_t>(position), 0x5eedU};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

namespace {

std::size_t resolve_threads(std::size_t requested) {
  if (requested != 0) return requested;
  return std::max(1U, std::thread::hardware_concurrency());
}

void accumulate(ModelParams& total, const ModelParams& part) {
  std::vector<const Tensor*> src;
  part.for_each([&](const std::string&, const Tensor& t) { src.push_back(&t); });
  std::size_t k = 0;
  total.for_each([&](const std::string&, Tensor& t) {
    const Tensor& s = *src[k++];
    for (std::size_t i = 0; i < t.size(); ++i) t[i] += s[i];
  });
}

}  // namespace

double train_step(ModelParams& params, AdamState& state, std::span<const EncodedRecord* const> batch,
                  std::span<const std::uint64_t> record_seeds, const TrainConfig& config, std::size_t steps) {
  if (batch.empty()) throw ConfigError("train_step on an empty batch");
  if (record_seeds.size() != batch.size()) throw DimensionError("train_step: one seed per record required");

  const std::size_t n = batch.size();
  std::vector<LossAndGrad> results(n);
  const std::size_t threads = std::min(resolve_threads(config.threads), n);
  std::vector<std::exception_ptr> errors(threads);
  auto work = [&](std::size_t w) {
    try {
      for (std::size_t i = w; i < n; i += threads) {
        DropoutMasks masks(config.input_dropout, config.recurrent_dropout, record_seeds[i]);
        results[i] = loss_and_grad(params, *batch[i], steps, &masks);
      }
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

  ModelParams grads = std::move(results[0].grads);
  double loss = results[0].loss;
  for (std::size_t i = 1; i < n; ++i) {
    accumulate(grads, results[i].grads);
    loss += results[i].loss;
  }
  const double inv = 1.0 / static_cast<double>(n);
  grads.for_each([&](const std::string&, Tensor& t) {
    for (double& v : t.values()) v *= inv;
  });
  loss *= inv;
  if (!std::isfinite(loss)) throw NumericError("non-finite batch loss");
  adam_step(params, grads, state);
  return loss;
}

TrainResult train(const Dataset& data, const TrainConfig& config, const ModelConfig& model_config,
                  const EpochCallback& on_epoch) {
  model_config.validate();
  return train_from(model::init_params(model_config, config.seed), data, config, model_config, on_epoch);
}

TrainResult train_from(ModelParams params, const Dataset& data, const TrainConfig& config,
                       const ModelConfig& model_config, const EpochCallback& on_epoch) {
  config.validate();
  model_config.validate();
  if (data.train.empty()) throw ConfigError("training set is empty");
  const std::size_t steps = model_config.caption_steps;
  for (const auto* set : {&data.train, &data.validation}) {
    for (const EncodedRecord& r : *set) {
      if (r.targets.size() != steps) {
        throw DimensionError("record '" + r.id + "' has " + std::to_string(r.targets.size()) + " targets, expected " +
                             std::to_string(steps));
      }
      if (r.features.cols() != model_config.n_feats) {
        throw DimensionError("record '" + r.id + "' has " + std::to_string(r.features.cols()) +
                             " feature bands, expected " + std::to_string(model_config.n_feats));
      }
    }
  }

  AdamState state = AdamState::zeros_like(params, config.adam);
  std::mt19937_64 order_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(data.train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result;
  result.best = params;
  double best_loss = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  const bool has_val = !data.validation.empty();

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    if (config.shuffle) std::shuffle(order.begin(), order.end(), order_rng);
    double loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::vector<const EncodedRecord*> batch;
      std::vector<std::uint64_t> seeds;
      for (std::size_t pos = start; pos < end; ++pos) {
        batch.push_back(&data.train[order[pos]]);
        seeds.push_back(record_seed(config.seed, epoch, pos));
      }
      double loss = 0.0;
      try {
        loss = train_step(params, state, batch, seeds, config, steps);
      } catch (const NumericError& e) {
        throw NumericError("epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch_index) + ": " +
                           e.what());
      }
      loss_sum += loss * static_cast<double>(end - start);
    }

    EpochLoss row;
    row.epoch = epoch;
    row.train_loss = loss_sum / static_cast<double>(order.size());
    row.val_loss = has_val ? dataset_loss(params, data.validation, steps, resolve_threads(config.threads))
                           : row.train_loss;
    if (!std::isfinite(row.val_loss)) {
      throw NumericError("epoch " + std::to_string(epoch) + ": non-finite validation loss");
    }
    result.history.push_back(row);
    if (on_epoch) on_epoch(row);

    if (row.val_loss < best_loss) {
      best_loss = row.val_loss;
      result.best = params;
      result.best_epoch = epoch;
      since_best = 0;
    } else if (config.patience != 0 && ++since_best >= config.patience) {
      result.stopped_early = true;
      break;
    }
  }
  result.last = std::move(params);
  return result;
}

void write_loss_history(const std::filesystem::path& path, const std::vector<EpochLoss>& history) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "epoch,train_loss,val_loss\n" << std::setprecision(17);
  for (const EpochLoss& e : history) out << e.epoch << ',' << e.train_loss << ',' << e.val_loss << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace acap::training

// SPDX-License-Identifier: Apache-2.0
//
// Adam on step-averaged categorical cross-entropy, with inverted dropout on
// GRU inputs and a per-sequence recurrent mask.
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "acap/model.hpp"

namespace acap::training {

using model::ModelConfig;
using model::ModelParams;
using ng::Tensor;

/// Mean over steps of -ln Y[i, target_i]. Throws DimensionError on an
/// out-of-range target.
double cross_entropy_loss(const Tensor& probabilities, std::span<const int> targets);

struct AdamHyper {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamHyper hyper;
  ModelParams m;
  ModelParams v;
  std::uint64_t step = 0;

  static AdamState zeros_like(const ModelParams& params, AdamHyper hyper = {});
};

/// One bias-corrected Adam update. Throws NumericError naming the first
/// parameter whose gradient is not finite (params untouched in that case).
void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state);

enum class DropoutMode { Input, Recurrent };

/// Inverted dropout: kept entries scaled by 1 / (1 - rate). Input mode draws a
/// fresh mask per entry; Recurrent mode draws one 1 x cols mask and applies
/// it to every row (timestep).
Tensor apply_dropout(const Tensor& x, double rate, std::mt19937_64& rng, DropoutMode mode);

/// Mask only (same shapes and semantics as apply_dropout).
Tensor dropout_mask(std::size_t rows, std::size_t cols, double rate, std::mt19937_64& rng);

/// Draws dropout masks for one training sequence.
class DropoutMasks : public model::MaskSource {
 public:
  DropoutMasks(double input_rate, double recurrent_rate, std::uint64_t seed);
  Tensor encoder_input(std::size_t layer, std::size_t dir, std::size_t rows, std::size_t cols) override;
  Tensor encoder_recurrent(std::size_t layer, std::size_t dir, std::size_t hid) override;
  Tensor decoder_input(std::size_t layer, std::size_t step, std::size_t cols) override;
  Tensor decoder_recurrent(std::size_t layer, std::size_t hid) override;

 private:
  double input_rate_;
  double recurrent_rate_;
  std::mt19937_64 rng_;
};

struct EncodedRecord {
  std::string id;
  Tensor features;           // T x n_feats
  std::vector<int> targets;  // caption_steps indices
};

struct TrainConfig {
  std::size_t batch_size = 64;
  double input_dropout = 0.5;
  double recurrent_dropout = 0.25;
  std::size_t max_epochs = 100;
  /// Epochs without validation improvement before stopping; 0 disables.
  std::size_t patience = 10;
  std::uint64_t seed = 0;
  AdamHyper adam;
  /// Worker threads for per-record gradients; 0 = hardware concurrency.
  /// Results do not depend on this value.
  std::size_t threads = 0;
  bool shuffle = true;

  void validate() const;
};

struct LossAndGrad {
  double loss = 0.0;
  ModelParams grads;
};

/// Forward + backward for one record. `masks` may be null (no dropout).
LossAndGrad loss_and_grad(const ModelParams& params, const EncodedRecord& record,
                          std::size_t steps, model::MaskSource* masks);

/// Max relative error between the analytic gradient of the dropout-free
/// loss of one record and central differences, over every parameter entry.
double model_gradient_check(const ModelParams& params, const EncodedRecord& record, std::size_t steps,
                            double eps = 1e-3, ng::Stencil stencil = ng::Stencil::FivePoint);

/// Inference-mode loss (no dropout) of one record.
double record_loss(const ModelParams& params, const EncodedRecord& record, std::size_t steps);

/// Mean inference-mode loss over records.
double dataset_loss(const ModelParams& params, std::span<const EncodedRecord> records,
                    std::size_t steps, std::size_t threads = 0);

/// Seed of the dropout masks for the record at `position` of `epoch`'s order.
std::uint64_t record_seed(std::uint64_t seed, std::size_t epoch, std::size_t position);

/// One optimisation step on a batch. Per-record gradients are summed in
/// batch order, scaled by 1/B, then passed to adam_step. Returns the mean
/// (training-mode) batch loss.
double train_step(ModelParams& params, AdamState& state, std::span<const EncodedRecord* const> batch,
                  std::span<const std::uint64_t> record_seeds, const TrainConfig& config,
                  std::size_t steps);

struct EpochLoss {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainResult {
  ModelParams best;
  ModelParams last;
  std::vector<EpochLoss> history;
  std::size_t best_epoch = 0;
  bool stopped_early = false;
};

struct Dataset {
  std::vector<EncodedRecord> train;
  std::vector<EncodedRecord> validation;
};

using EpochCallback = std::function<void(const EpochLoss&)>;

/// Mini-batch Adam training from init_params(model_config, seed). With no
/// validation records the training loss drives early stopping and best
/// checkpoint selection.
TrainResult train(const Dataset& data, const TrainConfig& config, const ModelConfig& model_config,
                  const EpochCallback& on_epoch = {});

/// Same, continuing from given parameters.
TrainResult train_from(ModelParams params, const Dataset& data, const TrainConfig& config,
                       const ModelConfig& model_config, const EpochCallback& on_epoch = {});

/// CSV with header epoch,train_loss,val_loss.
void write_loss_history(const std::filesystem::path& path, const std::vector<EpochLoss>& history);

}  // namespace acap::training

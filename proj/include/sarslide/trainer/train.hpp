#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include <json.hpp>

#include "sarslide/chipstore/normalize.hpp"
#include "sarslide/nets/arch.hpp"
#include "sarslide/nets/networks.hpp"
#include "sarslide/trainer/checkpoint.hpp"
#include "sarslide/trainer/embeddings.hpp"
#include "sarslide/trainer/hyperparams.hpp"

namespace sarslide::trainer {

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_metric = 0.0;
};

struct TrainResult {
  /// Best `top_k_checkpoints` epochs, val_metric descending (ties: earlier epoch first).
  std::vector<Checkpoint> checkpoints;
  std::vector<EpochRecord> log;
  bool early_stopped = false;
};

using SampleBatch = std::span<const chipstore::Sample* const>;

/// Accumulates d(mean batch loss)/d(params) into `grads` (same layout as the
/// params, not cleared here) and returns the mean batch loss.
double stage1_batch_gradients(const nets::Stage1Params& params, SampleBatch batch, nets::ParamStore& grads);
double stage2_batch_gradients(const nets::Stage2Params& params, SampleBatch batch, EmbeddingProvider* frozen,
                              double dice_smoothing, nets::ParamStore& grads);

struct ValidationScore {
  /// Stage 1: accuracy of logit > 0. Stage 2: pixel-pooled APRC.
  double metric = 0.0;
  double loss = 0.0;
};

ValidationScore evaluate_stage1(const nets::Stage1Params& params, std::span<const chipstore::Sample> set);
/// Throws DataError when `set` holds no positive pixel.
ValidationScore evaluate_stage2(const nets::Stage2Params& params, std::span<const chipstore::Sample> set,
                                EmbeddingProvider* frozen, double dice_smoothing);

/// Chip-level classifier on the pretraining split with cross-entropy loss.
TrainResult train_stage1(std::span<const chipstore::Sample> train, std::span<const chipstore::Sample> val,
                         const nets::ArchConfig& arch, const Hyperparams& hyper);

/// Segmenter with dice loss. With `pretrained`, its stage-1 parameters feed
/// frozen embeddings and are never modified. `provider` may share an
/// embedding cache built from the same parameters; null builds a private one.
TrainResult train_stage2(std::span<const chipstore::Sample> train, std::span<const chipstore::Sample> val,
                         const Checkpoint* pretrained, const nets::ArchConfig& arch, const Hyperparams& hyper,
                         EmbeddingProvider* provider = nullptr);

nlohmann::json train_log_json(const TrainResult& result);

}  // namespace sarslide::trainer

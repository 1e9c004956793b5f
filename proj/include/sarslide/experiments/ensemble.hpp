#pragma once

#include <span>

#include "sarslide/chipstore/normalize.hpp"
#include "sarslide/tensor.hpp"
#include "sarslide/trainer/checkpoint.hpp"
#include "sarslide/trainer/embeddings.hpp"

namespace sarslide::experiments {

/// (1, S, S) sigmoid probabilities of one stage-2 checkpoint.
Tensor predict_probabilities(const trainer::Checkpoint& cp, const chipstore::Sample& sample,
                             trainer::EmbeddingProvider* frozen);

/// Mean of the members' probability maps (accumulated in double). All
/// members must be stage-2 with one architecture and one uses_pretrained
/// flag; `frozen` is required iff they use pretraining and must hold the
/// stage-1 parameters they were trained on.
Tensor ensemble_predict(std::span<const trainer::Checkpoint> checkpoints, const chipstore::Sample& sample,
                        trainer::EmbeddingProvider* frozen);

/// Throws DataError if the members cannot be ensembled with `frozen`.
void check_ensemble(std::span<const trainer::Checkpoint> checkpoints, const trainer::EmbeddingProvider* frozen);

}  // namespace sarslide::experiments

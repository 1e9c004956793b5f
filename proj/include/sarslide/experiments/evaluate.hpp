#pragma once

#include <set>
#include <span>
#include <string>
#include <vector>

#include "sarslide/chipstore/normalize.hpp"
#include "sarslide/metrics/aggregate.hpp"
#include "sarslide/tensor.hpp"
#include "sarslide/trainer/checkpoint.hpp"
#include "sarslide/trainer/embeddings.hpp"

namespace sarslide::experiments {

/// One ensemble member together with a label for the per-run tables.
struct Member {
  std::string run_id;
  trainer::Checkpoint checkpoint;
};

struct SuiteOutputs {
  std::string variant;
  /// Ensemble probability map per test chip, in test-set order.
  std::vector<Tensor> probabilities;
  metrics::AggregateInputs inputs;
};

/// Throws DataError naming the first test chip found in `training_ids`.
void audit_leakage(std::span<const chipstore::Sample> test, const std::set<std::string>& training_ids);

/// Scores every member and their ensemble on `test`. Each member is one run
/// for the error bars. Throws DataError on leakage, an empty test split, or a
/// test split without positive pixels.
SuiteOutputs evaluate_suite(std::span<const Member> members, std::span<const chipstore::Sample> test,
                            const std::string& variant, const std::set<std::string>& training_ids,
                            trainer::EmbeddingProvider* frozen);

}  // namespace sarslide::experiments

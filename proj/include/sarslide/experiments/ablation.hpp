#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "sarslide/chipstore/chip.hpp"
#include "sarslide/chipstore/normalize.hpp"
#include "sarslide/chipstore/splits.hpp"
#include "sarslide/experiments/results.hpp"
#include "sarslide/nets/arch.hpp"
#include "sarslide/trainer/hyperparams.hpp"

namespace sarslide::experiments {

inline const std::vector<std::string> kVariants = {"none", "pretrain_A", "pretrain_B"};

struct ExperimentConfig {
  std::vector<int> train_sizes = {2, 5, 10, 20, 110};
  /// Seeds per train size; sizes not listed get 5 seeds for size 2, else 3.
  std::map<int, int> seeds_per_size;
  std::vector<std::string> variants = {"none", "pretrain_A", "pretrain_B"};
  /// Stage-1 checkpoint for every pretrain_* variant.
  std::map<std::string, std::filesystem::path> pretrained;
  std::uint64_t base_seed = 0;
  int jobs = 1;

  trainer::Hyperparams hyper;
  nets::ArchConfig arch;
  std::filesystem::path chips_dir;
  std::filesystem::path split_dir;
  std::filesystem::path output_dir;

  int seed_count(int train_size) const;
  /// base_seed + 1000 * train_size + rep: disjoint across sizes and shared
  /// by every variant.
  std::vector<std::uint64_t> seeds(int train_size) const;

  /// Throws ConfigError.
  void validate() const;
};

/// Reads the `experiment` config section into `cfg` (strict keys).
void apply_experiment_json(const nlohmann::json& j, ExperimentConfig& cfg);
nlohmann::json experiment_json(const ExperimentConfig& cfg);

/// Sorted indices of a uniform n-subset of [0, population).
std::vector<std::size_t> subsample_indices(std::size_t population, std::size_t n, std::uint64_t seed);

/// Uniform subset without replacement, in the split's order.
chipstore::ChipSet subsample_training_set(const chipstore::ChipSet& split, std::size_t n, std::uint64_t seed);

/// Normalization shared by pretraining and segmentation on one dataset:
/// statistics of the pretrain and segmentation-training chips.
chipstore::NormStats training_norm_stats(const chipstore::ChipSet& chips, const chipstore::SplitManifest& manifest);

/// Trains every (variant, size, seed) run not yet marked done, then scores
/// each (variant, size) cell's checkpoint ensemble on the test split. A
/// failing run is recorded in its directory and leaves its cell incomplete.
ResultsTable run_ablation(const ExperimentConfig& cfg);

}  // namespace sarslide::experiments

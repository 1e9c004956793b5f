#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>

#include "sarslide/chipstore/normalize.hpp"
#include "sarslide/nets/networks.hpp"
#include "sarslide/trainer/checkpoint.hpp"

namespace sarslide::trainer {

/// Per-channel mean and standard deviation of the pre and post embeddings
/// of `set`. Channels without spread get std 1.
nets::EmbeddingStats compute_embedding_stats(const nets::Stage1Params& params, std::span<const chipstore::Sample> set);

/// Frozen stage-1 embeddings, standardized when statistics are given,
/// computed once per chip and cached by chip_id. Chip ids must identify the
/// normalized input. Safe to share across threads.
class EmbeddingProvider {
 public:
  explicit EmbeddingProvider(nets::Stage1Params stage1, std::optional<nets::EmbeddingStats> stats = std::nullopt);
  /// Uses the checkpoint's parameters and embedding statistics.
  explicit EmbeddingProvider(const Checkpoint& stage1);

  const nets::EmbeddingPair& get(const chipstore::Sample& sample);

  const nets::Stage1Params& stage1() const noexcept { return stage1_; }
  /// SHA-256 of the stage-1 parameters.
  const std::string& params_sha256() const noexcept { return sha_; }
  std::size_t cached() const;

 private:
  nets::Stage1Params stage1_;
  std::optional<nets::EmbeddingStats> stats_;
  std::string sha_;
  mutable std::mutex mutex_;
  std::map<std::string, std::unique_ptr<nets::EmbeddingPair>> cache_;
};

}  // namespace sarslide::trainer

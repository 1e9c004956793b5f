#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "sarslide/chipstore/normalize.hpp"
#include "sarslide/nets/arch.hpp"
#include "sarslide/nets/networks.hpp"
#include "sarslide/nets/params.hpp"

namespace sarslide::trainer {

inline constexpr int kCheckpointFormatVersion = 1;

struct Checkpoint {
  int stage = 1;
  nets::ArchConfig arch;
  bool uses_pretrained = false;
  nets::ParamStore params;
  int epoch = 0;
  /// Stage 1: validation accuracy. Stage 2: validation APRC.
  double val_metric = 0.0;
  double val_loss = 0.0;
  std::uint64_t seed = 0;
  /// SHA-256 of the frozen stage-1 parameters a stage-2 checkpoint was trained on.
  std::string pretrained_sha256;
  /// Input normalization the network was trained with.
  std::optional<chipstore::NormStats> norm;
  /// Stage 1: standardization of its embeddings over its training chips.
  std::optional<nets::EmbeddingStats> embedding_stats;

  nets::Stage1Params stage1() const;
  nets::Stage2Params stage2() const;
};

/// Writes `<stem>.json` (metadata) and `<stem>.bin` (little-endian float32
/// parameters in store order). Returns the JSON path.
std::filesystem::path save_checkpoint(const Checkpoint& cp, const std::filesystem::path& stem);

/// Accepts the stem or either file. `expected_stage` (if set) must match the
/// stored stage tag. Throws FormatError on version mismatch or corruption.
Checkpoint load_checkpoint(const std::filesystem::path& path, std::optional<int> expected_stage = std::nullopt);

}  // namespace sarslide::trainer

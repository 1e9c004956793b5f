#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sarslide::metrics {

inline constexpr double kDecisionThreshold = 0.5;

/// Pixel-count miscounts of one chip:
///   delta_count = sum(pred) - sum(true), delta_l1 = |delta_count|.
struct CountError {
  std::int64_t delta_l1 = 0;
  std::int64_t delta_count = 0;

  bool operator==(const CountError&) const = default;
};

/// Throws DataError for unequal sizes or non-binary values.
CountError count_errors(std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> truth);

/// Pixel is positive iff prob > threshold.
std::vector<std::uint8_t> binarize(std::span<const float> probs, double threshold = kDecisionThreshold);

/// One row of the per-chip count-error table.
struct ChipCountRecord {
  std::string chip_id;
  std::int64_t delta_l1 = 0;
  std::int64_t delta_count = 0;
  std::int64_t true_pixels = 0;
  std::int64_t predicted_pixels = 0;

  bool empty_chip() const noexcept { return true_pixels == 0; }
  bool operator==(const ChipCountRecord&) const = default;
};

ChipCountRecord count_record(const std::string& chip_id, std::span<const std::uint8_t> predicted,
                             std::span<const std::uint8_t> truth);

}  // namespace sarslide::metrics

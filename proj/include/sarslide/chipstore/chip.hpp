#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sarslide/tensor.hpp"

namespace sarslide::chipstore {

inline constexpr int kDefaultChipSize = 128;
inline constexpr int kChannels = 2;
inline constexpr std::array<const char*, kChannels> kChannelNames = {"VV", "VH"};
inline constexpr double kPixelSpacingM = 10.0;

/// One bitemporal sample: pre/post linear amplitudes (VV, VH) and a binary
/// landslide mask of the same footprint.
struct Chip {
  std::string chip_id;
  Tensor pre;                       // (2, size, size)
  Tensor post;                      // (2, size, size)
  std::vector<std::uint8_t> mask;   // size * size, row-major, values 0/1
  bool has_landslide = false;

  int size() const { return pre.rank() == 3 ? pre.dim(1) : 0; }
  std::int64_t mask_sum() const;

  /// Throws FormatError naming the first violated invariant.
  void validate() const;
};

/// Builds a chip from its parts, deriving `has_landslide` from the mask.
Chip make_chip(std::string chip_id, Tensor pre, Tensor post, std::vector<std::uint8_t> mask);

struct ChipSet {
  std::vector<Chip> chips;
  std::string provenance;
  double pixel_spacing_m = kPixelSpacingM;

  std::size_t size() const noexcept { return chips.size(); }
  std::size_t positives() const noexcept;

  /// Validates every chip plus chip_id uniqueness.
  void validate() const;
};

bool chips_bitwise_equal(const Chip& a, const Chip& b);

}  // namespace sarslide::chipstore

#pragma once

#include <array>
#include <string>
#include <vector>

#include <json.hpp>

#include "sarslide/chipstore/chip.hpp"

namespace sarslide::chipstore {

inline constexpr double kAmplitudeFloor = 1e-6;

/// Per-channel mean and standard deviation of 10*log10(amplitude).
struct NormStats {
  std::array<double, kChannels> mean_db{};
  std::array<double, kChannels> std_db{};
};

nlohmann::json to_json(const NormStats& stats);
NormStats norm_stats_from_json(const nlohmann::json& j);

/// A chip in network units: dB-standardized images and a float mask.
struct Sample {
  std::string chip_id;
  Tensor pre;   // (2, S, S)
  Tensor post;  // (2, S, S)
  Tensor mask;  // (1, S, S), values 0/1
  bool has_landslide = false;

  int size() const { return pre.dim(1); }
};

/// Population statistics over both acquisitions of every chip.
/// Throws DataError if any channel has zero spread.
NormStats compute_norm_stats(const ChipSet& chips);

Sample normalize_chip(const Chip& chip, const NormStats& stats);
std::vector<Sample> normalize_chipset(const ChipSet& chips, const NormStats& stats);

struct NormalizedSet {
  std::vector<Sample> samples;
  NormStats stats;
};

/// Computes stats from `chips` itself, then normalizes.
NormalizedSet normalize_chipset(const ChipSet& chips);

}  // namespace sarslide::chipstore

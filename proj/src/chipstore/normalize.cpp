#include "sarslide/chipstore/normalize.hpp"

#include <cmath>

#include "sarslide/errors.hpp"

namespace sarslide::chipstore {

namespace {

inline double to_db(float amplitude) { return 10.0 * std::log10(std::max(static_cast<double>(amplitude), kAmplitudeFloor)); }

Tensor standardize(const Tensor& image, const NormStats& stats) {
  Tensor out(image.shape());
  const std::size_t plane = static_cast<std::size_t>(image.dim(1)) * image.dim(2);
  for (int ch = 0; ch < kChannels; ++ch) {
    const double mean = stats.mean_db[ch];
    const double sd = stats.std_db[ch];
    for (std::size_t i = 0; i < plane; ++i) {
      const std::size_t k = ch * plane + i;
      out[k] = static_cast<float>((to_db(image[k]) - mean) / sd);
    }
  }
  return out;
}

}  // namespace

nlohmann::json to_json(const NormStats& stats) {
  return {{"mean_db", stats.mean_db}, {"std_db", stats.std_db}, {"floor", kAmplitudeFloor}};
}

NormStats norm_stats_from_json(const nlohmann::json& j) {
  NormStats s;
  try {
    s.mean_db = j.at("mean_db").get<std::array<double, kChannels>>();
    s.std_db = j.at("std_db").get<std::array<double, kChannels>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("norm stats: ") + e.what());
  }
  return s;
}

NormStats compute_norm_stats(const ChipSet& chips) {
  if (chips.chips.empty()) throw DataError("normalization stats need at least one chip");
  NormStats stats;
  for (int ch = 0; ch < kChannels; ++ch) {
    // Two passes in double keep the variance accurate for large sets.
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& chip : chips.chips) {
      const std::size_t plane = static_cast<std::size_t>(chip.size()) * chip.size();
      for (const Tensor* img : {&chip.pre, &chip.post}) {
        for (std::size_t i = 0; i < plane; ++i) sum += to_db((*img)[ch * plane + i]);
      }
      n += 2 * plane;
    }
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (const auto& chip : chips.chips) {
      const std::size_t plane = static_cast<std::size_t>(chip.size()) * chip.size();
      for (const Tensor* img : {&chip.pre, &chip.post}) {
        for (std::size_t i = 0; i < plane; ++i) {
          const double d = to_db((*img)[ch * plane + i]) - mean;
          ss += d * d;
        }
      }
    }
    const double sd = std::sqrt(ss / static_cast<double>(n));
    if (!(sd > 0.0)) {
      throw DataError(std::string("normalization: zero std in channel ") + kChannelNames[ch]);
    }
    stats.mean_db[ch] = mean;
    stats.std_db[ch] = sd;
  }
  return stats;
}

Sample normalize_chip(const Chip& chip, const NormStats& stats) {
  for (double sd : stats.std_db) {
    if (!(sd > 0.0)) throw DataError("normalization: zero std channel");
  }
  const int n = chip.size();
  Sample s;
  s.chip_id = chip.chip_id;
  s.pre = standardize(chip.pre, stats);
  s.post = standardize(chip.post, stats);
  s.mask = Tensor({1, n, n});
  for (std::size_t i = 0; i < chip.mask.size(); ++i) s.mask[i] = chip.mask[i] ? 1.0f : 0.0f;
  s.has_landslide = chip.has_landslide;
  return s;
}

std::vector<Sample> normalize_chipset(const ChipSet& chips, const NormStats& stats) {
  std::vector<Sample> out;
  out.reserve(chips.size());
  for (const auto& chip : chips.chips) out.push_back(normalize_chip(chip, stats));
  return out;
}

NormalizedSet normalize_chipset(const ChipSet& chips) {
  NormalizedSet out;
  out.stats = compute_norm_stats(chips);
  out.samples = normalize_chipset(chips, out.stats);
  return out;
}

}  // namespace sarslide::chipstore

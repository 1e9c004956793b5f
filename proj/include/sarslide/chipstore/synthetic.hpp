#pragma once

#include <cstdint>
#include <random>

#include <json.hpp>

#include "sarslide/chipstore/chip.hpp"

namespace sarslide::chipstore {

struct IntRange {
  int min = 0;
  int max = 0;
};

/// Parameters of the synthetic bitemporal PolSAR generator.
///
/// Each chip is a smooth random backscatter scene observed twice. Both
/// acquisitions carry independent multiplicative speckle drawn from a
/// unit-mean gamma distribution with shape `looks`. Positive chips get
/// elliptical blobs; inside them the post-event amplitude is scaled by
/// `contrast`.
struct SyntheticConfig {
  int n_chips = 100;
  double positive_fraction = 0.5;
  int looks = 4;
  double contrast = 2.0;
  IntRange blob_count_range{1, 3};
  IntRange blob_radius_range_px{4, 12};
  int chip_size = kDefaultChipSize;
  std::uint64_t seed = 0;

  void validate() const;
};

nlohmann::json to_json(const SyntheticConfig& config);
SyntheticConfig synthetic_config_from_json(const nlohmann::json& j);

ChipSet generate_synthetic_chipset(const SyntheticConfig& config);

/// Multiplies every element by an independent Gamma(looks, 1/looks) draw.
void apply_speckle(Tensor& image, int looks, std::mt19937_64& rng);

}  // namespace sarslide::chipstore

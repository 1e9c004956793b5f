#include "sarslide/chipstore/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>

#include "sarslide/errors.hpp"
#include "sarslide/io_util.hpp"
#include "sarslide/json_util.hpp"

namespace sarslide::chipstore {

using nlohmann::json;

namespace {

constexpr std::array<double, kChannels> kBaseAmplitude = {0.25, 0.06};
constexpr std::array<double, kChannels> kTextureGain = {1.0, 0.8};
constexpr int kTextureWaves = 3;

struct Blob {
  double cy, cx, a, b, cos_t, sin_t;

  bool covers(int y, int x) const {
    const double dy = y - cy;
    const double dx = x - cx;
    const double u = (dx * cos_t + dy * sin_t) / a;
    const double v = (-dx * sin_t + dy * cos_t) / b;
    return u * u + v * v <= 1.0;
  }
};

std::vector<double> texture_field(int size, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> amp(0.1, 0.3);
  std::uniform_real_distribution<double> freq(0.5, 3.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::vector<double> field(static_cast<std::size_t>(size) * size, 0.0);
  for (int k = 0; k < kTextureWaves; ++k) {
    const double a = amp(rng), fy = freq(rng), fx = freq(rng), ph = phase(rng);
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        field[static_cast<std::size_t>(y) * size + x] +=
            a * std::sin(2.0 * std::numbers::pi * (fy * y + fx * x) / size + ph);
      }
    }
  }
  return field;
}

std::vector<std::uint8_t> blob_mask(const SyntheticConfig& cfg, std::mt19937_64& rng) {
  const int s = cfg.chip_size;
  std::uniform_int_distribution<int> count(cfg.blob_count_range.min, cfg.blob_count_range.max);
  std::uniform_int_distribution<int> radius(cfg.blob_radius_range_px.min, cfg.blob_radius_range_px.max);
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(s) * s, 0);
  const int n = count(rng);
  for (int k = 0; k < n; ++k) {
    const int a = radius(rng);
    const int b = radius(rng);
    const double t = angle(rng);
    const int r = std::max(a, b);
    std::uniform_int_distribution<int> centre(r, s - 1 - r);
    const Blob blob{static_cast<double>(centre(rng)), static_cast<double>(centre(rng)), static_cast<double>(a),
                    static_cast<double>(b), std::cos(t), std::sin(t)};
    for (int y = 0; y < s; ++y) {
      for (int x = 0; x < s; ++x) {
        if (blob.covers(y, x)) mask[static_cast<std::size_t>(y) * s + x] = 1;
      }
    }
  }
  return mask;
}

Chip synth_chip(const SyntheticConfig& cfg, std::size_t index, bool positive) {
  std::mt19937_64 rng(derive_seed(cfg.seed, index));
  const int s = cfg.chip_size;
  const auto field = texture_field(s, rng);
  std::vector<std::uint8_t> mask = positive ? blob_mask(cfg, rng)
                                            : std::vector<std::uint8_t>(static_cast<std::size_t>(s) * s, 0);

  Tensor pre({kChannels, s, s});
  Tensor post({kChannels, s, s});
  for (int ch = 0; ch < kChannels; ++ch) {
    for (int y = 0; y < s; ++y) {
      for (int x = 0; x < s; ++x) {
        const std::size_t p = static_cast<std::size_t>(y) * s + x;
        const double scene = kBaseAmplitude[ch] * std::exp(kTextureGain[ch] * field[p]);
        pre.at(ch, y, x) = static_cast<float>(scene);
        post.at(ch, y, x) = static_cast<float>(mask[p] ? scene * cfg.contrast : scene);
      }
    }
  }
  apply_speckle(pre, cfg.looks, rng);
  apply_speckle(post, cfg.looks, rng);

  char id[64];
  std::snprintf(id, sizeof(id), "syn%llu_%05zu", static_cast<unsigned long long>(cfg.seed), index);
  return make_chip(id, std::move(pre), std::move(post), std::move(mask));
}

}  // namespace

void SyntheticConfig::validate() const {
  if (n_chips < 0) throw ConfigError("synthetic.n_chips must be >= 0");
  if (!(positive_fraction >= 0.0 && positive_fraction <= 1.0)) {
    throw ConfigError("synthetic.positive_fraction must lie in [0,1]");
  }
  if (looks < 1) throw ConfigError("synthetic.looks must be >= 1");
  if (!(contrast > 0.0) || !std::isfinite(contrast)) throw ConfigError("synthetic.contrast must be > 0");
  if (blob_count_range.min < 1 || blob_count_range.min > blob_count_range.max) {
    throw ConfigError("synthetic.blob_count_range must be a nonempty range of positive integers");
  }
  if (blob_radius_range_px.min < 1 || blob_radius_range_px.min > blob_radius_range_px.max) {
    throw ConfigError("synthetic.blob_radius_range_px must be a nonempty range of positive integers");
  }
  if (chip_size < 2 * blob_radius_range_px.max + 2) {
    throw ConfigError("synthetic.chip_size too small for the largest blob radius");
  }
}

void apply_speckle(Tensor& image, int looks, std::mt19937_64& rng) {
  if (looks < 1) throw ConfigError("looks must be >= 1");
  std::gamma_distribution<double> gamma(static_cast<double>(looks), 1.0 / looks);
  for (float& v : image.values()) v = static_cast<float>(v * gamma(rng));
}

ChipSet generate_synthetic_chipset(const SyntheticConfig& config) {
  config.validate();
  const auto n = static_cast<std::size_t>(config.n_chips);
  const auto n_pos = static_cast<std::size_t>(std::llround(config.positive_fraction * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(config.seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<bool> positive(n, false);
  for (std::size_t k = 0; k < n_pos; ++k) positive[order[k]] = true;

  ChipSet set;
  set.provenance = "synthetic:" + to_json(config).dump();
  set.chips.reserve(n);
  for (std::size_t i = 0; i < n; ++i) set.chips.push_back(synth_chip(config, i, positive[i]));
  return set;
}

json to_json(const SyntheticConfig& c) {
  return {
      {"n_chips", c.n_chips},
      {"positive_fraction", c.positive_fraction},
      {"looks", c.looks},
      {"contrast", c.contrast},
      {"blob_count_range", {c.blob_count_range.min, c.blob_count_range.max}},
      {"blob_radius_range_px", {c.blob_radius_range_px.min, c.blob_radius_range_px.max}},
      {"chip_size", c.chip_size},
      {"seed", c.seed},
  };
}

SyntheticConfig synthetic_config_from_json(const json& j) {
  const std::string ctx = "synthetic";
  require_known_keys(j, {"n_chips", "positive_fraction", "looks", "contrast", "blob_count_range",
                         "blob_radius_range_px", "chip_size", "seed"},
                     ctx);
  SyntheticConfig c;
  read_optional(j, "n_chips", c.n_chips, ctx);
  read_optional(j, "positive_fraction", c.positive_fraction, ctx);
  read_optional(j, "looks", c.looks, ctx);
  read_optional(j, "contrast", c.contrast, ctx);
  std::array<int, 2> range{c.blob_count_range.min, c.blob_count_range.max};
  read_optional(j, "blob_count_range", range, ctx);
  c.blob_count_range = {range[0], range[1]};
  range = {c.blob_radius_range_px.min, c.blob_radius_range_px.max};
  read_optional(j, "blob_radius_range_px", range, ctx);
  c.blob_radius_range_px = {range[0], range[1]};
  read_optional(j, "chip_size", c.chip_size, ctx);
  read_optional(j, "seed", c.seed, ctx);
  c.validate();
  return c;
}

}  // namespace sarslide::chipstore

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "sarslide/chipstore/chip_io.hpp"
#include "sarslide/chipstore/normalize.hpp"
#include "sarslide/chipstore/raster.hpp"
#include "sarslide/chipstore/synthetic.hpp"
#include "sarslide/errors.hpp"
#include "sarslide/io_util.hpp"
#include "test_util.hpp"

using namespace sarslide;
using namespace sarslide::chipstore;
using testing_util::TempDir;

namespace {

Chip tiny_chip(const std::string& id, bool positive) {
  Tensor pre({2, 4, 4}), post({2, 4, 4});
  for (std::size_t i = 0; i < pre.size(); ++i) {
    pre[i] = 0.1f + 0.01f * static_cast<float>(i);
    post[i] = 0.2f + 0.02f * static_cast<float>(i);
  }
  std::vector<std::uint8_t> mask(16, 0);
  if (positive) mask[5] = mask[6] = 1;
  return make_chip(id, pre, post, mask);
}

void truncate_file(const std::filesystem::path& p, std::uintmax_t bytes) {
  std::filesystem::resize_file(p, std::filesystem::file_size(p) - bytes);
}

}  // namespace

TEST(Chip, MakeChipDerivesFlag) {
  EXPECT_TRUE(tiny_chip("a", true).has_landslide);
  EXPECT_FALSE(tiny_chip("b", false).has_landslide);
  EXPECT_EQ(tiny_chip("a", true).mask_sum(), 2);
}

TEST(Chip, ValidateRejectsBrokenInvariants) {
  Chip c = tiny_chip("a", true);
  c.has_landslide = false;
  EXPECT_THROW(c.validate(), FormatError);
  c = tiny_chip("a", false);
  c.mask[0] = 2;
  EXPECT_THROW(c.validate(), FormatError);
  c = tiny_chip("a", false);
  c.pre[3] = -1.0f;
  EXPECT_THROW(c.validate(), FormatError);
  c = tiny_chip("", false);
  EXPECT_THROW(c.validate(), FormatError);

  ChipSet set;
  set.chips = {tiny_chip("x", false), tiny_chip("x", true)};
  EXPECT_THROW(set.validate(), FormatError);
}

TEST(ChipIo, RoundTripIsBitExact) {
  TempDir dir;
  const Chip c = tiny_chip("rt", true);
  const auto header = write_chip(c, dir.path());
  EXPECT_TRUE(std::filesystem::exists(dir / "rt.bin"));
  for (const auto& p : {header, dir / "rt.bin", dir / "rt"}) {
    const Chip back = read_chip(p);
    EXPECT_TRUE(chips_bitwise_equal(c, back));
  }
}

TEST(ChipIo, TruncatedPayload) {
  TempDir dir;
  write_chip(tiny_chip("t", false), dir.path());
  truncate_file(dir / "t.bin", 3);
  try {
    read_chip(dir / "t");
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("unexpected end of payload"), std::string::npos);
  }
}

TEST(ChipIo, TrailingBytesRejected) {
  TempDir dir;
  write_chip(tiny_chip("t", false), dir.path());
  std::ofstream(dir / "t.bin", std::ios::binary | std::ios::app) << "xxxx";
  EXPECT_THROW(read_chip(dir / "t"), FormatError);
}

TEST(ChipIo, MissingHeaderFieldNamed) {
  TempDir dir;
  write_chip(tiny_chip("h", false), dir.path());
  auto j = nlohmann::json::parse(read_text_file(dir / "h.json"));
  j.erase("shape");
  write_text_file(dir / "h.json", j.dump());
  try {
    read_chip(dir / "h");
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("shape"), std::string::npos);
  }
}

TEST(ChipIo, NonBinaryMaskInPayload) {
  TempDir dir;
  write_chip(tiny_chip("m", false), dir.path());
  {
    std::fstream f(dir / "m.bin", std::ios::binary | std::ios::in | std::ios::out);
    f.seekp(static_cast<std::streamoff>(4 * 4 * 16));
    const float half = 0.5f;
    write_f32_le(f, std::span<const float>(&half, 1));
  }
  EXPECT_THROW(read_chip(dir / "m"), FormatError);
}

TEST(ChipIo, ChipsetRoundTrip) {
  TempDir dir;
  ChipSet set;
  set.chips = {tiny_chip("b", false), tiny_chip("a", true)};
  set.provenance = "unit";
  write_chipset(set, dir.path(), nlohmann::json{{"k", 1}});
  const ChipSet back = read_chipset(dir.path());
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back.chips[0].chip_id, "b");
  EXPECT_EQ(back.provenance, "unit");
  EXPECT_TRUE(chips_bitwise_equal(set.chips[1], back.chips[1]));
  EXPECT_EQ(read_chipset_generator(dir.path()).at("k"), 1);
  EXPECT_THROW(read_chipset(dir / "nope"), DataError);
}

TEST(Raster, WindowsDropPartialEdges) {
  const auto w = chip_windows(10, 7, 4, 3);
  // rows 0,3,6 ; cols 0,3
  ASSERT_EQ(w.size(), 6u);
  EXPECT_EQ(w.back().row0, 6);
  EXPECT_EQ(w.back().col0, 3);
  EXPECT_TRUE(chip_windows(3, 3, 4, 4).empty());
  EXPECT_THROW(chip_windows(8, 8, 0, 1), ConfigError);
}

TEST(Raster, ExtractChipsAndLabels) {
  Tensor pre({2, 8, 8}, 1.0f), post({2, 8, 8}, 2.0f), labels({8, 8}, 0.0f);
  labels[5 * 8 + 6] = 1.0f;
  const ChipSet set = extract_chips_from_raster(pre, post, labels, 4, 4, "r");
  ASSERT_EQ(set.size(), 4u);
  EXPECT_EQ(set.positives(), 1u);
  EXPECT_EQ(set.chips[3].chip_id, "r_r4_c4");
  EXPECT_TRUE(set.chips[3].has_landslide);
  EXPECT_EQ(set.chips[3].mask[1 * 4 + 2], 1);
  labels[0] = 0.5f;
  EXPECT_THROW(extract_chips_from_raster(pre, post, labels, 4, 4), DataError);
}

TEST(Raster, PointLabels) {
  const auto windows = chip_windows(8, 8, 4, 4);
  const auto flags = flags_from_point_labels({{1, 1}, {6, 2}}, windows, 8, 8);
  EXPECT_EQ(flags, (std::vector<bool>{true, false, true, false}));
  EXPECT_THROW(flags_from_point_labels({{8, 0}}, windows, 8, 8), DataError);
  const Tensor r = rasterize_points({{2, 3}}, 4, 5);
  EXPECT_EQ(r.at(0, 2, 3), 1.0f);
  float total = 0;
  for (float v : r.values()) total += v;
  EXPECT_EQ(total, 1.0f);
}

TEST(Raster, AverageRevisits) {
  const Tensor a({1, 2}, std::vector<float>{1.0f, 3.0f});
  const Tensor b({1, 2}, std::vector<float>{3.0f, 5.0f});
  const Tensor m = average_revisits({a, b});
  EXPECT_FLOAT_EQ(m[0], 2.0f);
  EXPECT_FLOAT_EQ(m[1], 4.0f);
  EXPECT_THROW(average_revisits({}), DataError);
  EXPECT_THROW(average_revisits({a, Tensor({2})}), DataError);
}

TEST(Synthetic, DeterministicAndBalanced) {
  const auto cfg = testing_util::small_synthetic(20, 32, 9);
  const ChipSet a = generate_synthetic_chipset(cfg);
  const ChipSet b = generate_synthetic_chipset(cfg);
  ASSERT_EQ(a.size(), 20u);
  EXPECT_EQ(a.positives(), 10u);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_TRUE(chips_bitwise_equal(a.chips[i], b.chips[i]));
  a.validate();
  for (const auto& c : a.chips) EXPECT_EQ(c.has_landslide, c.mask_sum() > 0);
}

TEST(Synthetic, ContrastInsideBlobs) {
  auto cfg = testing_util::small_synthetic(40, 64, 3);
  cfg.positive_fraction = 1.0;
  cfg.contrast = 3.0;
  cfg.looks = 8;
  const ChipSet set = generate_synthetic_chipset(cfg);
  double in_ratio = 0, out_ratio = 0;
  std::int64_t n_in = 0, n_out = 0;
  for (const auto& c : set.chips) {
    const int s = c.size();
    for (int ch = 0; ch < 2; ++ch) {
      for (int y = 0; y < s; ++y) {
        for (int x = 0; x < s; ++x) {
          const double r = c.post.at(ch, y, x) / c.pre.at(ch, y, x);
          if (c.mask[static_cast<std::size_t>(y * s + x)]) {
            in_ratio += std::log(r);
            ++n_in;
          } else {
            out_ratio += std::log(r);
            ++n_out;
          }
        }
      }
    }
  }
  // Speckle is symmetric between dates, so the log-ratio mean isolates the contrast.
  EXPECT_NEAR(in_ratio / static_cast<double>(n_in), std::log(3.0), 0.05);
  EXPECT_NEAR(out_ratio / static_cast<double>(n_out), 0.0, 0.02);
}

TEST(Synthetic, SpeckleMoments) {
  std::mt19937_64 rng(4);
  Tensor t({200000}, 1.0f);
  apply_speckle(t, 4, rng);
  double m = 0, v = 0;
  for (float x : t.values()) m += x;
  m /= static_cast<double>(t.size());
  for (float x : t.values()) v += (x - m) * (x - m);
  v /= static_cast<double>(t.size() - 1);
  EXPECT_NEAR(m, 1.0, 0.01);
  EXPECT_NEAR(v, 0.25, 0.01);
}

TEST(Synthetic, ConfigValidation) {
  SyntheticConfig c;
  c.looks = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = SyntheticConfig{};
  c.chip_size = 16;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_THROW(synthetic_config_from_json({{"bogus", 1}}), ConfigError);
  const auto back = synthetic_config_from_json(to_json(testing_util::small_synthetic(5, 32, 2)));
  EXPECT_EQ(back.chip_size, 32);
  EXPECT_EQ(back.seed, 2u);
}

TEST(Normalize, StatsMakeUnitScale) {
  const ChipSet set = generate_synthetic_chipset(testing_util::small_synthetic(10, 32, 5));
  const NormalizedSet ns = normalize_chipset(set);
  for (int ch = 0; ch < 2; ++ch) {
    double s = 0, ss = 0;
    std::int64_t n = 0;
    for (const auto& smp : ns.samples) {
      for (const Tensor* t : {&smp.pre, &smp.post}) {
        for (int y = 0; y < 32; ++y) {
          for (int x = 0; x < 32; ++x) {
            s += t->at(ch, y, x);
            ss += t->at(ch, y, x) * t->at(ch, y, x);
            ++n;
          }
        }
      }
    }
    const double mean = s / static_cast<double>(n);
    EXPECT_NEAR(mean, 0.0, 1e-4);
    EXPECT_NEAR(ss / static_cast<double>(n) - mean * mean, 1.0, 1e-3);
  }
  EXPECT_EQ(ns.samples[0].mask.shape(), (std::vector<int>{1, 32, 32}));
  const auto stats = norm_stats_from_json(to_json(ns.stats));
  EXPECT_EQ(stats.mean_db, ns.stats.mean_db);
}

TEST(Normalize, ConstantChannelRejected) {
  ChipSet set;
  Tensor flat({2, 4, 4}, 1.0f);
  set.chips = {make_chip("c", flat, flat, std::vector<std::uint8_t>(16, 0))};
  EXPECT_THROW(compute_norm_stats(set), DataError);
  EXPECT_THROW(compute_norm_stats(ChipSet{}), DataError);
}

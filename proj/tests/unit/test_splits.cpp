#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sarslide/chipstore/splits.hpp"
#include "sarslide/chipstore/synthetic.hpp"
#include "sarslide/errors.hpp"
#include "sarslide/io_util.hpp"
#include "test_util.hpp"

using namespace sarslide;
using namespace sarslide::chipstore;

namespace {

// Lightweight chip set: ids and flags only matter for splitting.
ChipSet flagged_set(std::size_t n, std::size_t positives) {
  ChipSet set;
  Tensor img({2, 2, 2}, 1.0f);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::uint8_t> mask(4, 0);
    if (i < positives) mask[0] = 1;
    set.chips.push_back(make_chip("c" + std::to_string(i), img, img, mask));
  }
  return set;
}

}  // namespace

TEST(LargestRemainder, DefaultSplitOfFullInventory) {
  const Fractions f = {0.75, 0.0, 0.125, 0.125};
  EXPECT_EQ(largest_remainder(2174, f), (std::vector<std::int64_t>{1630, 0, 272, 272}));
}

TEST(LargestRemainder, ExactQuotas) {
  const Fractions f = {0.5, 0.25, 0.125, 0.125};
  EXPECT_EQ(largest_remainder(552, f), (std::vector<std::int64_t>{276, 138, 69, 69}));
}

TEST(LargestRemainder, TiesGoToLowerIndex) {
  const std::vector<double> w = {0.25, 0.25, 0.25, 0.25};
  EXPECT_EQ(largest_remainder(2, w), (std::vector<std::int64_t>{1, 1, 0, 0}));
  const std::vector<double> thirds = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  EXPECT_EQ(largest_remainder(4, thirds), (std::vector<std::int64_t>{2, 1, 1}));
}

TEST(LargestRemainder, RejectsBadFractions) {
  const std::vector<double> neg = {1.5, -0.5};
  EXPECT_THROW(largest_remainder(10, neg), ConfigError);
  const std::vector<double> short_sum = {0.5, 0.4};
  EXPECT_THROW(largest_remainder(10, short_sum), ConfigError);
  const std::vector<double> ok = {1.0};
  EXPECT_THROW(largest_remainder(-1, ok), ConfigError);
}

TEST(LargestRemainder, PropertyWithinOneOfQuota) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> total_dist(0, 5000);
  std::gamma_distribution<double> g(1.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> w(4);
    double s = 0;
    for (auto& x : w) s += (x = g(rng));
    for (auto& x : w) x /= s;
    const double sum = w[0] + w[1] + w[2] + w[3];
    w[3] += 1.0 - sum;
    const std::int64_t n = total_dist(rng);
    const auto c = largest_remainder(n, w);
    std::int64_t got = 0;
    for (std::size_t i = 0; i < 4; ++i) {
      got += c[i];
      EXPECT_LT(std::abs(static_cast<double>(c[i]) - static_cast<double>(n) * w[i]), 1.0 + 1e-9);
    }
    EXPECT_EQ(got, n);
  }
}

TEST(Split, CountsAndCoverage) {
  const ChipSet set = flagged_set(2174, 1087);
  const SplitManifest m = split_chipset(set, {0.75, 0.0, 0.125, 0.125}, 3);
  EXPECT_EQ(m.counts(), (std::array<std::size_t, 4>{1630, 0, 272, 272}));
  EXPECT_EQ(m.assignments.size(), set.size());
  std::size_t total = 0;
  for (Role r : kRoles) total += select_role(set, m, r).size();
  EXPECT_EQ(total, set.size());
}

TEST(Split, RolesInheritBalance) {
  const ChipSet set = flagged_set(552, 276);
  const SplitManifest m = split_chipset(set, {0.5, 0.25, 0.125, 0.125}, 8);
  for (Role r : kRoles) {
    const ChipSet part = select_role(set, m, r);
    EXPECT_TRUE(is_balanced(part.positives(), part.size(), 0.5)) << role_name(r);
  }
}

TEST(Split, DeterministicInSeed) {
  const ChipSet set = flagged_set(300, 150);
  const Fractions f = {0.4, 0.3, 0.15, 0.15};
  EXPECT_EQ(split_chipset(set, f, 1).assignments, split_chipset(set, f, 1).assignments);
  EXPECT_NE(split_chipset(set, f, 1).assignments, split_chipset(set, f, 2).assignments);
}

TEST(Split, PropertyClassBalanceAcrossRandomInputs) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 20 + rng() % 400;
    const std::size_t pos = n / 2;
    const ChipSet set = flagged_set(n, pos);
    const SplitManifest m = split_chipset(set, {0.75, 0.0, 0.125, 0.125}, rng());
    for (Role r : kRoles) {
      const ChipSet part = select_role(set, m, r);
      const double expected = static_cast<double>(pos) * static_cast<double>(part.size()) / static_cast<double>(n);
      EXPECT_LT(std::abs(static_cast<double>(part.positives()) - expected), 1.0 + 1e-9);
    }
  }
}

TEST(Split, DuplicateIdsRejected) {
  ChipSet set = flagged_set(4, 2);
  set.chips[1].chip_id = set.chips[0].chip_id;
  EXPECT_THROW(split_chipset(set, {1.0, 0.0, 0.0, 0.0}, 0), DataError);
}

TEST(Balance, DropsMajorityToTarget) {
  const ChipSet set = flagged_set(100, 20);
  const ChipSet b = balance_chipset(set, 0.5, 4);
  EXPECT_EQ(b.positives(), 20u);
  EXPECT_EQ(b.size(), 40u);
  EXPECT_TRUE(is_balanced(b.positives(), b.size()));
  const ChipSet again = balance_chipset(set, 0.5, 4);
  for (std::size_t i = 0; i < b.size(); ++i) EXPECT_EQ(b.chips[i].chip_id, again.chips[i].chip_id);
  // survivors keep relative order
  for (std::size_t i = 1; i < b.size(); ++i) {
    EXPECT_LT(std::stoi(b.chips[i - 1].chip_id.substr(1)), std::stoi(b.chips[i].chip_id.substr(1)));
  }
}

TEST(Balance, AlreadyBalancedUnchanged) {
  const ChipSet set = flagged_set(11, 5);
  EXPECT_EQ(balance_chipset(set, 0.5, 0).size(), 11u);
  EXPECT_THROW(balance_chipset(flagged_set(5, 0), 0.5, 0), DataError);
  EXPECT_THROW(balance_chipset(set, 1.5, 0), ConfigError);
}

TEST(Manifest, RoundTrip) {
  testing_util::TempDir dir;
  const ChipSet set = flagged_set(40, 20);
  const SplitManifest m = split_chipset(set, {0.5, 0.25, 0.125, 0.125}, 6);
  std::vector<std::string> order;
  for (const auto& c : set.chips) order.push_back(c.chip_id);
  write_manifest(m, order, dir.path());
  const SplitManifest back = read_manifest(dir.path());
  EXPECT_EQ(back.assignments, m.assignments);
  EXPECT_EQ(back.seed, 6u);
  EXPECT_EQ(back.fractions, m.fractions);
  EXPECT_EQ(back.ids_with_role(Role::test), m.ids_with_role(Role::test));
}

TEST(Manifest, BadRoleRejected) {
  testing_util::TempDir dir;
  const ChipSet set = flagged_set(4, 2);
  const SplitManifest m = split_chipset(set, {0.5, 0.0, 0.25, 0.25}, 0);
  write_manifest(m, {"c0", "c1", "c2", "c3"}, dir.path());
  write_text_file(dir / "split.csv", "chip_id,role\nc0,holdout\n");
  EXPECT_THROW(read_manifest(dir.path()), FormatError);
}

TEST(Roles, NamesRoundTrip) {
  for (Role r : kRoles) EXPECT_EQ(parse_role(role_name(r)), r);
  EXPECT_FALSE(parse_role("train").has_value());
}

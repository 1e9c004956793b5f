#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sarslide/chipstore/chip.hpp"

namespace sarslide::chipstore {

enum class Role { pretrain = 0, seg_train = 1, validation = 2, test = 3 };
inline constexpr std::array<Role, 4> kRoles = {Role::pretrain, Role::seg_train, Role::validation, Role::test};

std::string_view role_name(Role role) noexcept;
std::optional<Role> parse_role(std::string_view name) noexcept;

using Fractions = std::array<double, 4>;

struct SplitManifest {
  std::map<std::string, Role> assignments;
  Fractions fractions{};
  std::uint64_t seed = 0;

  std::array<std::size_t, 4> counts() const;
  std::vector<std::string> ids_with_role(Role role) const;
};

/// Hamilton apportionment of `total` items over `weights` (nonnegative,
/// summing to 1): floor shares, then leftover units to the largest
/// remainders; ties go to the lower index.
std::vector<std::int64_t> largest_remainder(std::int64_t total, std::span<const double> weights);

/// Discards chips of whichever class is over-represented until the positive
/// fraction equals `target_fraction` to within one chip. Survivors keep their
/// relative order; the discarded subset is a function of `seed` only.
ChipSet balance_chipset(const ChipSet& chips, double target_fraction, std::uint64_t seed);

/// True when the positive fraction is within one chip of `target_fraction`.
bool is_balanced(std::size_t positives, std::size_t total, double target_fraction = 0.5);

/// Assigns each chip one role. Role totals follow the largest-remainder
/// allocation of N; positives are apportioned across roles in proportion to
/// those totals, so every role inherits the input's class balance.
SplitManifest split_chipset(const ChipSet& chips, const Fractions& fractions, std::uint64_t seed);

/// Chips holding `role`, in the set's original order.
ChipSet select_role(const ChipSet& chips, const SplitManifest& manifest, Role role);

/// `<dir>/split.csv` (chip_id,role in chip order) and `<dir>/split.json`
/// (fractions, seed, counts).
void write_manifest(const SplitManifest& manifest, const std::vector<std::string>& chip_order,
                    const std::filesystem::path& dir);
SplitManifest read_manifest(const std::filesystem::path& dir);

}  // namespace sarslide::chipstore

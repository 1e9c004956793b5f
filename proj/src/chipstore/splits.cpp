#include "sarslide/chipstore/splits.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "sarslide/errors.hpp"
#include "sarslide/io_util.hpp"

namespace sarslide::chipstore {

namespace fs = std::filesystem;

std::string_view role_name(Role role) noexcept {
  switch (role) {
    case Role::pretrain:
      return "pretrain";
    case Role::seg_train:
      return "seg_train";
    case Role::validation:
      return "validation";
    case Role::test:
      return "test";
  }
  return "unknown";
}

std::optional<Role> parse_role(std::string_view name) noexcept {
  for (Role r : kRoles) {
    if (role_name(r) == name) return r;
  }
  return std::nullopt;
}

std::array<std::size_t, 4> SplitManifest::counts() const {
  std::array<std::size_t, 4> c{};
  for (const auto& [id, role] : assignments) ++c[static_cast<std::size_t>(role)];
  return c;
}

std::vector<std::string> SplitManifest::ids_with_role(Role role) const {
  std::vector<std::string> ids;
  for (const auto& [id, r] : assignments) {
    if (r == role) ids.push_back(id);
  }
  return ids;
}

namespace {

// Shared Hamilton step: floors already assigned, distribute `left` units by
// descending remainder, lower index first on ties.
void distribute_leftover(std::vector<std::int64_t>& counts, const std::vector<double>& remainders,
                         std::int64_t left) {
  std::vector<std::size_t> order(counts.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
  for (std::size_t k = 0; left > 0; k = (k + 1) % order.size(), --left) ++counts[order[k]];
}

// Exact variant for rational weights num[i] / den.
std::vector<std::int64_t> largest_remainder_exact(std::int64_t total, const std::vector<std::int64_t>& num,
                                                  std::int64_t den) {
  std::vector<std::int64_t> counts(num.size());
  std::vector<double> rem(num.size());
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i < num.size(); ++i) {
    counts[i] = (total * num[i]) / den;
    rem[i] = static_cast<double>((total * num[i]) % den);
    assigned += counts[i];
  }
  distribute_leftover(counts, rem, total - assigned);
  return counts;
}

void check_fractions(std::span<const double> fractions) {
  double sum = 0.0;
  for (double f : fractions) {
    if (!std::isfinite(f) || f < 0.0) throw ConfigError("fractions must be finite and nonnegative");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    std::ostringstream msg;
    msg << "fractions must sum to 1 (got " << sum << ")";
    throw ConfigError(msg.str());
  }
}

}  // namespace

std::vector<std::int64_t> largest_remainder(std::int64_t total, std::span<const double> weights) {
  if (total < 0) throw ConfigError("largest_remainder: negative total");
  check_fractions(weights);
  std::vector<std::int64_t> counts(weights.size());
  std::vector<double> rem(weights.size());
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double quota = static_cast<double>(total) * weights[i];
    const double floored = std::floor(quota + 1e-9 * std::max(1.0, quota));
    counts[i] = static_cast<std::int64_t>(floored);
    rem[i] = std::max(0.0, quota - floored);
    assigned += counts[i];
  }
  if (assigned > total) throw ConfigError("largest_remainder: fractions overshoot total");
  distribute_leftover(counts, rem, total - assigned);
  return counts;
}

bool is_balanced(std::size_t positives, std::size_t total, double target_fraction) {
  return std::abs(static_cast<double>(positives) - target_fraction * static_cast<double>(total)) <= 1.0;
}

ChipSet balance_chipset(const ChipSet& chips, double target_fraction, std::uint64_t seed) {
  if (!(target_fraction >= 0.0 && target_fraction <= 1.0)) {
    throw ConfigError("target_fraction must lie in [0,1]");
  }
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < chips.chips.size(); ++i) (chips.chips[i].has_landslide ? pos : neg).push_back(i);
  const std::size_t total = chips.size();
  if (total == 0 || is_balanced(pos.size(), total, target_fraction)) return chips;
  if (target_fraction > 0.0 && pos.empty()) throw DataError("balance: no positive chips to reach target fraction");
  if (target_fraction < 1.0 && neg.empty()) throw DataError("balance: no negative chips to reach target fraction");

  const double current = static_cast<double>(pos.size()) / static_cast<double>(total);
  std::vector<std::size_t>* pool = nullptr;
  std::size_t keep = 0;
  if (current < target_fraction) {
    pool = &neg;
    keep = target_fraction >= 1.0
               ? 0
               : static_cast<std::size_t>(std::llround(pos.size() * (1.0 - target_fraction) / target_fraction));
  } else {
    pool = &pos;
    keep = target_fraction <= 0.0
               ? 0
               : static_cast<std::size_t>(std::llround(neg.size() * target_fraction / (1.0 - target_fraction)));
  }
  keep = std::min(keep, pool->size());

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> shuffled = *pool;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  std::vector<bool> drop(total, false);
  for (std::size_t k = keep; k < shuffled.size(); ++k) drop[shuffled[k]] = true;

  ChipSet out;
  out.provenance = chips.provenance;
  out.pixel_spacing_m = chips.pixel_spacing_m;
  for (std::size_t i = 0; i < total; ++i) {
    if (!drop[i]) out.chips.push_back(chips.chips[i]);
  }
  return out;
}

SplitManifest split_chipset(const ChipSet& chips, const Fractions& fractions, std::uint64_t seed) {
  check_fractions(fractions);
  const auto n = static_cast<std::int64_t>(chips.size());
  const auto totals = largest_remainder(n, fractions);

  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < chips.chips.size(); ++i) (chips.chips[i].has_landslide ? pos : neg).push_back(i);
  std::vector<std::int64_t> pos_counts(4, 0);
  if (n > 0) pos_counts = largest_remainder_exact(static_cast<std::int64_t>(pos.size()), totals, n);

  std::mt19937_64 rng(seed);
  std::shuffle(pos.begin(), pos.end(), rng);
  std::shuffle(neg.begin(), neg.end(), rng);

  SplitManifest manifest;
  manifest.fractions = fractions;
  manifest.seed = seed;
  std::size_t next_pos = 0, next_neg = 0;
  for (std::size_t r = 0; r < 4; ++r) {
    const auto role = kRoles[r];
    for (std::int64_t k = 0; k < pos_counts[r]; ++k) manifest.assignments[chips.chips[pos[next_pos++]].chip_id] = role;
    for (std::int64_t k = 0; k < totals[r] - pos_counts[r]; ++k) {
      manifest.assignments[chips.chips[neg[next_neg++]].chip_id] = role;
    }
  }
  if (manifest.assignments.size() != chips.size()) throw DataError("split: duplicate chip ids in input");
  return manifest;
}

ChipSet select_role(const ChipSet& chips, const SplitManifest& manifest, Role role) {
  ChipSet out;
  out.provenance = chips.provenance;
  out.pixel_spacing_m = chips.pixel_spacing_m;
  for (const auto& chip : chips.chips) {
    const auto it = manifest.assignments.find(chip.chip_id);
    if (it == manifest.assignments.end()) throw DataError("chip " + chip.chip_id + " missing from split manifest");
    if (it->second == role) out.chips.push_back(chip);
  }
  return out;
}

void write_manifest(const SplitManifest& manifest, const std::vector<std::string>& chip_order,
                    const fs::path& dir) {
  fs::create_directories(dir);
  if (chip_order.size() != manifest.assignments.size()) {
    throw DataError("write_manifest: chip order does not cover the manifest");
  }
  std::ostringstream csv;
  csv << "chip_id,role\n";
  for (const auto& id : chip_order) {
    const auto it = manifest.assignments.find(id);
    if (it == manifest.assignments.end()) throw DataError("write_manifest: unknown chip " + id);
    csv << id << ',' << role_name(it->second) << '\n';
  }
  write_text_file(dir / "split.csv", csv.str());

  const auto counts = manifest.counts();
  nlohmann::json footer = {
      {"format_version", 1},
      {"fractions", manifest.fractions},
      {"seed", manifest.seed},
      {"counts",
       {{"pretrain", counts[0]}, {"seg_train", counts[1]}, {"validation", counts[2]}, {"test", counts[3]}}},
  };
  write_text_file(dir / "split.json", footer.dump(2) + "\n");
}

SplitManifest read_manifest(const fs::path& dir) {
  SplitManifest manifest;
  std::istringstream csv(read_text_file(dir / "split.csv"));
  std::string line;
  if (!std::getline(csv, line) || line != "chip_id,role") throw FormatError("split.csv: bad header");
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw FormatError("split.csv: malformed row '" + line + "'");
    const auto role = parse_role(std::string_view(line).substr(comma + 1));
    if (!role) throw FormatError("split.csv: unknown role in row '" + line + "'");
    if (!manifest.assignments.emplace(line.substr(0, comma), *role).second) {
      throw FormatError("split.csv: duplicate chip_id " + line.substr(0, comma));
    }
  }
  nlohmann::json footer;
  try {
    footer = nlohmann::json::parse(read_text_file(dir / "split.json"));
    manifest.fractions = footer.at("fractions").get<Fractions>();
    manifest.seed = footer.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("split.json: ") + e.what());
  }
  return manifest;
}

}  // namespace sarslide::chipstore

#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "sarslide/chipstore/chip.hpp"

namespace sarslide::chipstore {

inline constexpr int kChipFormatVersion = 1;

/// Writes `<dir>/<chip_id>.json` (header) and `<dir>/<chip_id>.bin` (payload:
/// little-endian float32 pre.VV, pre.VH, post.VV, post.VH, mask; row-major).
/// Returns the header path.
std::filesystem::path write_chip(const Chip& chip, const std::filesystem::path& dir,
                                 const nlohmann::json& provenance = nullptr);

/// Accepts the header path, the payload path, or the extensionless stem.
Chip read_chip(const std::filesystem::path& path);

/// Writes every chip plus `chipset.json` listing order, provenance and spacing.
void write_chipset(const ChipSet& set, const std::filesystem::path& dir,
                   const nlohmann::json& generator = nullptr);
ChipSet read_chipset(const std::filesystem::path& dir);

/// The `generator` block stored in `chipset.json`, or null.
nlohmann::json read_chipset_generator(const std::filesystem::path& dir);

}  // namespace sarslide::chipstore

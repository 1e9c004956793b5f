#pragma once

#include <filesystem>
#include <vector>

#include <json.hpp>

#include "sarslide/experiments/results.hpp"

namespace sarslide::experiments {

struct ReportFiles {
  std::filesystem::path csv;
  std::vector<std::filesystem::path> plots;
  std::filesystem::path provenance;
};

/// Config hash, per-cell seeds, code version and the list of incomplete cells.
nlohmann::json provenance_json(const ResultsTable& table, const nlohmann::json& config);

/// Writes `results.csv`, four plots under `report/` (APRC and the three
/// count-error panels versus training-set size, one series per variant) and
/// `provenance.json`. Incomplete cells become gaps and are listed in the
/// provenance.
ReportFiles emit_report(const ResultsTable& table, const std::filesystem::path& outdir, const nlohmann::json& config);

const char* code_version() noexcept;

}  // namespace sarslide::experiments

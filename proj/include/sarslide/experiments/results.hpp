#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sarslide/metrics/aggregate.hpp"

namespace sarslide::experiments {

struct RowMetrics {
  double aprc = 0.0;
  double aprc_error = 0.0;
  double aprc_random_baseline = 0.0;
  std::int64_t median_dl1_all = 0;
  double dl1_all_error = 0.0;
  std::optional<std::int64_t> median_dcount_empty;
  std::optional<double> dcount_empty_error;
  std::optional<std::int64_t> median_dcount_landslide;
  std::optional<double> dcount_landslide_error;

  bool operator==(const RowMetrics&) const = default;
};

RowMetrics row_metrics(const metrics::MetricsReport& report);

/// One (variant, train_size) cell.
struct ResultsRow {
  std::string variant;
  int train_size = 0;
  std::vector<std::uint64_t> seeds;
  /// Checkpoint files on disk across the cell's seeds.
  int checkpoints = 0;
  /// Absent when any seed of the cell failed or is missing.
  std::optional<RowMetrics> metrics;
  std::string note;

  bool complete() const noexcept { return metrics.has_value(); }
  bool operator==(const ResultsRow&) const = default;
};

struct ResultsTable {
  std::vector<ResultsRow> rows;

  bool complete() const;
  bool operator==(const ResultsTable&) const = default;
};

std::string results_csv(const ResultsTable& table);
/// Inverse of results_csv. Throws FormatError.
ResultsTable parse_results_csv(const std::string& text);

}  // namespace sarslide::experiments

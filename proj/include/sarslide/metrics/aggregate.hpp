#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sarslide/metrics/counts.hpp"

namespace sarslide::metrics {

/// Element at index (n-1)/2 of the sorted values. Throws on empty input.
std::int64_t lower_median(std::vector<std::int64_t> values);

struct MeanWithError {
  double mean = 0.0;
  /// Sample standard deviation divided by sqrt(n); zero for a single value.
  double error = 0.0;
};

MeanWithError mean_with_error(std::span<const double> values);

/// Median miscount panels over one table of chips.
struct CountPanels {
  std::int64_t median_dl1_all = 0;
  std::optional<std::int64_t> median_dcount_empty;
  std::optional<std::int64_t> median_dcount_landslide;
};

CountPanels count_panels(std::span<const ChipCountRecord> chips);

/// Metrics of one ensemble member (one seed/checkpoint pair).
struct RunMetrics {
  std::string run_id;
  double aprc = 0.0;
  std::vector<ChipCountRecord> chips;
};

/// Everything the report needs: ensemble-level predictions scored once, plus
/// per-member scores for the error bars.
struct AggregateInputs {
  double ensemble_aprc = 0.0;
  double aprc_random_baseline = 0.0;
  std::vector<ChipCountRecord> ensemble_chips;
  std::vector<RunMetrics> runs;
};

struct MetricsReport {
  double aprc = 0.0;
  double aprc_random_baseline = 0.0;
  std::int64_t median_dl1_all = 0;
  std::optional<std::int64_t> median_dcount_empty;       // absent: no empty chips
  std::optional<std::int64_t> median_dcount_landslide;   // absent: no landslide chips

  // Across-run mean and standard error of each panel.
  MeanWithError run_aprc;
  MeanWithError run_dl1_all;
  std::optional<MeanWithError> run_dcount_empty;
  std::optional<MeanWithError> run_dcount_landslide;
  std::size_t runs = 0;

  std::vector<ChipCountRecord> chips;
};

/// Throws DataError when `runs` is empty.
MetricsReport aggregate(const AggregateInputs& inputs);

nlohmann::json to_json(const MetricsReport& report);
MetricsReport metrics_report_from_json(const nlohmann::json& j);

/// One row per chip: chip_id,delta_l1,delta_count,true_pixels,predicted_pixels.
std::string count_table_csv(std::span<const ChipCountRecord> chips);

}  // namespace sarslide::metrics

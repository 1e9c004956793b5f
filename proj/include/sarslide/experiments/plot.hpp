#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace sarslide::experiments {

struct Series {
  std::string name;
  /// One entry per x category; absent values are gaps.
  std::vector<std::optional<double>> y;
  std::vector<double> error;
};

/// Categorical line chart with error bars.
struct Chart {
  std::string title;
  std::string y_label;
  std::vector<std::string> x_labels;
  std::vector<Series> series;
};

/// Renders `chart` as an RGB PNG. Throws DataError on write failure.
void write_chart_png(const Chart& chart, const std::filesystem::path& path);

}  // namespace sarslide::experiments

#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace sarslide::metrics {

struct PRPoint {
  double recall = 0.0;
  double precision = 1.0;
  /// Scores >= threshold are predicted positive. The anchor uses +inf.
  double threshold = std::numeric_limits<double>::infinity();
};

/// Precision-recall points, one per distinct score, by descending threshold
/// (hence nondecreasing recall). The first point is the (0, 1) anchor.
struct PRCurve {
  std::vector<PRPoint> points;
  std::int64_t positives = 0;
  std::int64_t total = 0;
};

/// Throws DataError when lengths differ, a label is not 0/1, or there are no positives.
PRCurve pr_curve(std::span<const float> scores, std::span<const std::uint8_t> labels);

/// Average-precision step sum: sum_n (R_n - R_{n-1}) * P_n.
double aprc(const PRCurve& curve);

/// aprc(pr_curve(scores, labels)).
double average_precision(std::span<const float> scores, std::span<const std::uint8_t> labels);

/// Expected APRC of uninformative scores: the positive fraction.
double random_baseline_aprc(std::span<const std::uint8_t> labels);

}  // namespace sarslide::metrics

#include "sarslide/metrics/pr_curve.hpp"

#include <algorithm>
#include <numeric>

#include "sarslide/errors.hpp"

namespace sarslide::metrics {

namespace {

std::int64_t count_positives(std::span<const std::uint8_t> labels) {
  std::int64_t p = 0;
  for (auto l : labels) {
    if (l > 1) throw DataError("labels must be 0 or 1");
    p += l;
  }
  return p;
}

}  // namespace

PRCurve pr_curve(std::span<const float> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) throw DataError("pr_curve: scores and labels differ in length");
  PRCurve curve;
  curve.total = static_cast<std::int64_t>(labels.size());
  curve.positives = count_positives(labels);
  if (curve.positives == 0) throw DataError("pr_curve: recall undefined without positive labels");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  curve.points.push_back(PRPoint{});
  const double p = static_cast<double>(curve.positives);
  std::int64_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const float t = scores[order[i]];
    // Ties share one threshold.
    for (; i < order.size() && scores[order[i]] == t; ++i) (labels[order[i]] ? tp : fp) += 1;
    curve.points.push_back({static_cast<double>(tp) / p, static_cast<double>(tp) / static_cast<double>(tp + fp),
                            static_cast<double>(t)});
  }
  return curve;
}

double aprc(const PRCurve& curve) {
  double area = 0.0;
  for (std::size_t n = 1; n < curve.points.size(); ++n) {
    area += (curve.points[n].recall - curve.points[n - 1].recall) * curve.points[n].precision;
  }
  return area;
}

double average_precision(std::span<const float> scores, std::span<const std::uint8_t> labels) {
  return aprc(pr_curve(scores, labels));
}

double random_baseline_aprc(std::span<const std::uint8_t> labels) {
  const auto p = count_positives(labels);
  if (p == 0) throw DataError("random_baseline_aprc: no positive labels");
  return static_cast<double>(p) / static_cast<double>(labels.size());
}

}  // namespace sarslide::metrics

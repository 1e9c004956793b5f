#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "sarslide/errors.hpp"
#include "sarslide/metrics/aggregate.hpp"
#include "sarslide/metrics/counts.hpp"
#include "sarslide/metrics/pr_curve.hpp"

using namespace sarslide;
using namespace sarslide::metrics;

namespace {

// Quadratic reference: precision/recall at every distinct score threshold.
double brute_force_ap(const std::vector<float>& s, const std::vector<std::uint8_t>& y) {
  std::set<float, std::greater<>> thresholds(s.begin(), s.end());
  double positives = 0;
  for (auto v : y) positives += v;
  double prev_recall = 0, ap = 0;
  for (float t : thresholds) {
    double tp = 0, fp = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] >= t) (y[i] ? tp : fp) += 1;
    }
    const double recall = tp / positives;
    ap += (recall - prev_recall) * (tp / (tp + fp));
    prev_recall = recall;
  }
  return ap;
}

ChipCountRecord rec(const std::string& id, std::int64_t truth, std::int64_t pred) {
  return {id, std::abs(pred - truth), pred - truth, truth, pred};
}

}  // namespace

TEST(PrCurve, WorkedExample) {
  const std::vector<float> s = {0.9f, 0.8f, 0.7f, 0.6f};
  const std::vector<std::uint8_t> y = {1, 0, 1, 0};
  const PRCurve c = pr_curve(s, y);
  ASSERT_EQ(c.points.size(), 5u);
  EXPECT_EQ(c.points[0].recall, 0.0);
  EXPECT_EQ(c.points[0].precision, 1.0);
  EXPECT_DOUBLE_EQ(c.points[3].precision, 2.0 / 3.0);
  EXPECT_NEAR(aprc(c), 0.8333333333333333, 1e-12);
  EXPECT_EQ(c.positives, 2);
}

TEST(PrCurve, TiesShareOneThreshold) {
  const std::vector<float> s = {0.5f, 0.5f, 0.5f, 0.1f};
  const std::vector<std::uint8_t> y = {1, 0, 0, 1};
  const PRCurve c = pr_curve(s, y);
  ASSERT_EQ(c.points.size(), 3u);
  EXPECT_NEAR(average_precision(s, y), 0.5 * (1.0 / 3.0) + 0.5 * 0.5, 1e-12);
}

TEST(PrCurve, PerfectAndInvertedRanking) {
  const std::vector<std::uint8_t> y = {1, 1, 0, 0, 0};
  EXPECT_DOUBLE_EQ(average_precision(std::vector<float>{5, 4, 3, 2, 1}, y), 1.0);
  EXPECT_NEAR(average_precision(std::vector<float>{1, 2, 3, 4, 5}, y), 0.5 * 0.25 + 0.5 * 0.4, 1e-12);
}

TEST(PrCurve, Errors) {
  const std::vector<float> s = {0.1f, 0.2f};
  EXPECT_THROW(pr_curve(s, std::vector<std::uint8_t>{0, 0}), DataError);
  EXPECT_THROW(pr_curve(s, std::vector<std::uint8_t>{1}), DataError);
  EXPECT_THROW(pr_curve(s, std::vector<std::uint8_t>{1, 2}), DataError);
}

TEST(PrCurve, MatchesBruteForceOnRandomInputs) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng() % 60;
    std::vector<float> s(n);
    std::vector<std::uint8_t> y(n);
    const int levels = 1 + static_cast<int>(rng() % 10);  // forces ties
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<float>(rng() % static_cast<std::uint64_t>(levels)) / static_cast<float>(levels);
      y[i] = static_cast<std::uint8_t>(rng() % 3 == 0);
    }
    y[rng() % n] = 1;
    EXPECT_EQ(average_precision(s, y), brute_force_ap(s, y));
  }
}

TEST(PrCurve, InvariantUnderMonotoneTransform) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  std::vector<float> s(500), t(500);
  std::vector<std::uint8_t> y(500);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = u(rng);
    t[i] = std::exp(3.0f * s[i]) + 2.0f;
    y[i] = static_cast<std::uint8_t>(u(rng) < s[i]);
  }
  EXPECT_EQ(average_precision(s, y), average_precision(t, y));
  const PRCurve c = pr_curve(s, y);
  for (std::size_t i = 1; i < c.points.size(); ++i) EXPECT_GE(c.points[i].recall, c.points[i - 1].recall);
  EXPECT_DOUBLE_EQ(c.points.back().recall, 1.0);
}

TEST(PrCurve, RandomScoresApproachBaseline) {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  std::vector<float> s(20000);
  std::vector<std::uint8_t> y(20000);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = u(rng);
    y[i] = static_cast<std::uint8_t>(u(rng) < 0.1f);
  }
  const double base = random_baseline_aprc(y);
  EXPECT_NEAR(average_precision(s, y), base, 0.01);
  EXPECT_THROW(random_baseline_aprc(std::vector<std::uint8_t>{0, 0}), DataError);
}

TEST(Counts, Examples) {
  const std::vector<std::uint8_t> t = {1, 1, 0, 0}, p = {1, 0, 1, 1};
  EXPECT_EQ(count_errors(p, t), (CountError{1, 1}));
  EXPECT_EQ(count_errors(t, p), (CountError{1, -1}));
  EXPECT_EQ(count_errors(t, t), (CountError{0, 0}));
  EXPECT_THROW(count_errors(t, std::vector<std::uint8_t>{1}), DataError);
  EXPECT_THROW(count_errors(std::vector<std::uint8_t>{3}, std::vector<std::uint8_t>{1}), DataError);
  const auto r = count_record("c", p, t);
  EXPECT_EQ(r.true_pixels, 2);
  EXPECT_EQ(r.predicted_pixels, 3);
  EXPECT_FALSE(r.empty_chip());
}

TEST(Counts, BinarizeIsStrict) {
  const std::vector<float> probs = {0.2f, 0.5f, 0.5000001f, 0.9f};
  EXPECT_EQ(binarize(probs), (std::vector<std::uint8_t>{0, 0, 1, 1}));
  EXPECT_EQ(binarize(probs, 0.1), (std::vector<std::uint8_t>{1, 1, 1, 1}));
}

TEST(Aggregate, LowerMedianAndErrors) {
  EXPECT_EQ(lower_median({3, 1, 2}), 2);
  EXPECT_EQ(lower_median({4, 1, 3, 2}), 2);
  EXPECT_EQ(lower_median({-5}), -5);
  EXPECT_THROW(lower_median({}), DataError);
  const std::vector<double> v = {1.0, 2.0, 3.0};
  const auto m = mean_with_error(v);
  EXPECT_DOUBLE_EQ(m.mean, 2.0);
  EXPECT_NEAR(m.error, 1.0 / std::sqrt(3.0), 1e-12);
  EXPECT_EQ(mean_with_error(std::vector<double>{4.0}).error, 0.0);
}

TEST(Aggregate, PanelsAndMissingClasses) {
  const std::vector<ChipCountRecord> chips = {rec("a", 0, 4), rec("b", 0, 0), rec("c", 10, 7), rec("d", 5, 9),
                                              rec("e", 0, 2)};
  const CountPanels p = count_panels(chips);
  EXPECT_EQ(p.median_dl1_all, 3);
  EXPECT_EQ(p.median_dcount_empty, 2);
  EXPECT_EQ(p.median_dcount_landslide, -3);
  const std::vector<ChipCountRecord> only_empty = {rec("a", 0, 1)};
  EXPECT_FALSE(count_panels(only_empty).median_dcount_landslide.has_value());
}

TEST(Aggregate, ReportAndPermutationInvariance) {
  AggregateInputs in;
  in.ensemble_aprc = 0.7;
  in.aprc_random_baseline = 0.05;
  in.ensemble_chips = {rec("a", 0, 4), rec("b", 0, 0), rec("c", 10, 7)};
  in.runs = {{"r0", 0.6, {rec("a", 0, 2), rec("c", 10, 10)}}, {"r1", 0.8, {rec("a", 0, 6), rec("c", 10, 4)}}};
  const MetricsReport r = aggregate(in);
  EXPECT_EQ(r.runs, 2u);
  EXPECT_DOUBLE_EQ(r.run_aprc.mean, 0.7);
  EXPECT_NEAR(r.run_aprc.error, 0.1, 1e-12);
  EXPECT_EQ(r.median_dl1_all, 3);
  EXPECT_DOUBLE_EQ(r.run_dcount_empty->mean, 4.0);

  AggregateInputs shuffled = in;
  std::reverse(shuffled.ensemble_chips.begin(), shuffled.ensemble_chips.end());
  std::reverse(shuffled.runs.begin(), shuffled.runs.end());
  const MetricsReport s = aggregate(shuffled);
  EXPECT_EQ(s.median_dl1_all, r.median_dl1_all);
  EXPECT_EQ(s.median_dcount_empty, r.median_dcount_empty);
  EXPECT_DOUBLE_EQ(s.run_aprc.error, r.run_aprc.error);

  in.runs.clear();
  EXPECT_THROW(aggregate(in), DataError);
}

TEST(Aggregate, JsonRoundTrip) {
  AggregateInputs in;
  in.ensemble_aprc = 0.25;
  in.aprc_random_baseline = 0.01;
  in.ensemble_chips = {rec("a", 0, 1)};
  in.runs = {{"r0", 0.25, {rec("a", 0, 1)}}};
  const MetricsReport r = aggregate(in);
  const auto j = to_json(r);
  EXPECT_TRUE(j.at("landslide_panel_missing").get<bool>());
  const MetricsReport back = metrics_report_from_json(j);
  EXPECT_EQ(back.chips, r.chips);
  EXPECT_FALSE(back.median_dcount_landslide.has_value());
  EXPECT_EQ(back.median_dcount_empty, 1);
  EXPECT_THROW(metrics_report_from_json({{"aprc", 1}}), FormatError);
  EXPECT_EQ(count_table_csv(r.chips), "chip_id,delta_l1,delta_count,true_pixels,predicted_pixels\na,1,1,0,1\n");
}

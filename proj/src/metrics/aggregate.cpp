#include "sarslide/metrics/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sarslide/errors.hpp"

namespace sarslide::metrics {

using nlohmann::json;

std::int64_t lower_median(std::vector<std::int64_t> values) {
  if (values.empty()) throw DataError("median of an empty list");
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>((values.size() - 1) / 2);
  std::nth_element(values.begin(), mid, values.end());
  return *mid;
}

MeanWithError mean_with_error(std::span<const double> values) {
  if (values.empty()) throw DataError("mean of an empty list");
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / n;
  if (values.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
}

CountPanels count_panels(std::span<const ChipCountRecord> chips) {
  if (chips.empty()) throw DataError("count panels need at least one chip");
  std::vector<std::int64_t> all, empty, landslide;
  for (const auto& c : chips) {
    all.push_back(c.delta_l1);
    (c.empty_chip() ? empty : landslide).push_back(c.delta_count);
  }
  CountPanels p;
  p.median_dl1_all = lower_median(all);
  if (!empty.empty()) p.median_dcount_empty = lower_median(empty);
  if (!landslide.empty()) p.median_dcount_landslide = lower_median(landslide);
  return p;
}

MetricsReport aggregate(const AggregateInputs& inputs) {
  if (inputs.runs.empty()) throw DataError("aggregate: at least one run required");
  MetricsReport r;
  r.aprc = inputs.ensemble_aprc;
  r.aprc_random_baseline = inputs.aprc_random_baseline;
  const CountPanels headline = count_panels(inputs.ensemble_chips);
  r.median_dl1_all = headline.median_dl1_all;
  r.median_dcount_empty = headline.median_dcount_empty;
  r.median_dcount_landslide = headline.median_dcount_landslide;
  r.chips = inputs.ensemble_chips;
  r.runs = inputs.runs.size();

  std::vector<double> aprcs, dl1, empty, landslide;
  for (const auto& run : inputs.runs) {
    aprcs.push_back(run.aprc);
    const CountPanels p = count_panels(run.chips);
    dl1.push_back(static_cast<double>(p.median_dl1_all));
    if (p.median_dcount_empty) empty.push_back(static_cast<double>(*p.median_dcount_empty));
    if (p.median_dcount_landslide) landslide.push_back(static_cast<double>(*p.median_dcount_landslide));
  }
  r.run_aprc = mean_with_error(aprcs);
  r.run_dl1_all = mean_with_error(dl1);
  if (!empty.empty()) r.run_dcount_empty = mean_with_error(empty);
  if (!landslide.empty()) r.run_dcount_landslide = mean_with_error(landslide);
  return r;
}

namespace {

json mwe_json(const MeanWithError& m) { return {{"mean", m.mean}, {"error", m.error}}; }

template <typename T>
json opt_json(const std::optional<T>& v) {
  if (!v) return nullptr;
  if constexpr (std::is_same_v<T, MeanWithError>) {
    return mwe_json(*v);
  } else {
    return *v;
  }
}

MeanWithError mwe_from(const json& j) { return {j.at("mean").get<double>(), j.at("error").get<double>()}; }

}  // namespace

json to_json(const MetricsReport& r) {
  json chips = json::array();
  for (const auto& c : r.chips) {
    chips.push_back({{"chip_id", c.chip_id},
                     {"delta_l1", c.delta_l1},
                     {"delta_count", c.delta_count},
                     {"true_pixels", c.true_pixels},
                     {"predicted_pixels", c.predicted_pixels}});
  }
  return {
      {"aprc", r.aprc},
      {"aprc_random_baseline", r.aprc_random_baseline},
      {"median_dl1_all", r.median_dl1_all},
      {"median_dcount_empty", opt_json(r.median_dcount_empty)},
      {"median_dcount_landslide", opt_json(r.median_dcount_landslide)},
      {"empty_panel_missing", !r.median_dcount_empty.has_value()},
      {"landslide_panel_missing", !r.median_dcount_landslide.has_value()},
      {"error_bars",
       {{"aprc", mwe_json(r.run_aprc)},
        {"dl1_all", mwe_json(r.run_dl1_all)},
        {"dcount_empty", opt_json(r.run_dcount_empty)},
        {"dcount_landslide", opt_json(r.run_dcount_landslide)}}},
      {"runs", r.runs},
      {"chips", chips},
  };
}

MetricsReport metrics_report_from_json(const json& j) {
  try {
    MetricsReport r;
    r.aprc = j.at("aprc").get<double>();
    r.aprc_random_baseline = j.at("aprc_random_baseline").get<double>();
    r.median_dl1_all = j.at("median_dl1_all").get<std::int64_t>();
    if (!j.at("median_dcount_empty").is_null()) r.median_dcount_empty = j.at("median_dcount_empty").get<std::int64_t>();
    if (!j.at("median_dcount_landslide").is_null()) {
      r.median_dcount_landslide = j.at("median_dcount_landslide").get<std::int64_t>();
    }
    const json& eb = j.at("error_bars");
    r.run_aprc = mwe_from(eb.at("aprc"));
    r.run_dl1_all = mwe_from(eb.at("dl1_all"));
    if (!eb.at("dcount_empty").is_null()) r.run_dcount_empty = mwe_from(eb.at("dcount_empty"));
    if (!eb.at("dcount_landslide").is_null()) r.run_dcount_landslide = mwe_from(eb.at("dcount_landslide"));
    r.runs = j.at("runs").get<std::size_t>();
    for (const auto& c : j.at("chips")) {
      r.chips.push_back({c.at("chip_id").get<std::string>(), c.at("delta_l1").get<std::int64_t>(),
                         c.at("delta_count").get<std::int64_t>(), c.at("true_pixels").get<std::int64_t>(),
                         c.at("predicted_pixels").get<std::int64_t>()});
    }
    return r;
  } catch (const json::exception& e) {
    throw FormatError(std::string("metrics report: ") + e.what());
  }
}

std::string count_table_csv(std::span<const ChipCountRecord> chips) {
  std::ostringstream out;
  out << "chip_id,delta_l1,delta_count,true_pixels,predicted_pixels\n";
  for (const auto& c : chips) {
    out << c.chip_id << ',' << c.delta_l1 << ',' << c.delta_count << ',' << c.true_pixels << ','
        << c.predicted_pixels << '\n';
  }
  return out.str();
}

}  // namespace sarslide::metrics

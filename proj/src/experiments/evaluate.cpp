#include "sarslide/experiments/evaluate.hpp"

#include "sarslide/errors.hpp"
#include "sarslide/experiments/ensemble.hpp"
#include "sarslide/metrics/counts.hpp"
#include "sarslide/metrics/pr_curve.hpp"

namespace sarslide::experiments {

void audit_leakage(std::span<const chipstore::Sample> test, const std::set<std::string>& training_ids) {
  for (const auto& s : test) {
    if (training_ids.count(s.chip_id)) throw DataError("leakage: test chip " + s.chip_id + " appears in training data");
  }
}

namespace {

std::vector<std::uint8_t> truth_mask(const chipstore::Sample& s) {
  std::vector<std::uint8_t> out(s.mask.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = s.mask[i] > 0.5f ? 1 : 0;
  return out;
}

}  // namespace

SuiteOutputs evaluate_suite(std::span<const Member> members, std::span<const chipstore::Sample> test,
                            const std::string& variant, const std::set<std::string>& training_ids,
                            trainer::EmbeddingProvider* frozen) {
  if (test.empty()) throw DataError("test split is empty");
  audit_leakage(test, training_ids);
  std::vector<trainer::Checkpoint> cps;
  for (const auto& m : members) cps.push_back(m.checkpoint);
  check_ensemble(cps, frozen);

  std::vector<std::vector<std::uint8_t>> truths;
  std::vector<std::uint8_t> pooled_labels;
  for (const auto& s : test) {
    truths.push_back(truth_mask(s));
    pooled_labels.insert(pooled_labels.end(), truths.back().begin(), truths.back().end());
  }

  SuiteOutputs out;
  out.variant = variant;
  out.inputs.aprc_random_baseline = metrics::random_baseline_aprc(pooled_labels);

  std::vector<std::vector<double>> sums(test.size());
  for (const auto& m : members) {
    metrics::RunMetrics run;
    run.run_id = m.run_id;
    std::vector<float> pooled;
    pooled.reserve(pooled_labels.size());
    for (std::size_t c = 0; c < test.size(); ++c) {
      const Tensor p = predict_probabilities(m.checkpoint, test[c], frozen);
      if (sums[c].empty()) sums[c].assign(p.size(), 0.0);
      for (std::size_t i = 0; i < p.size(); ++i) sums[c][i] += p[i];
      pooled.insert(pooled.end(), p.values().begin(), p.values().end());
      run.chips.push_back(metrics::count_record(test[c].chip_id, metrics::binarize(p.values()), truths[c]));
    }
    run.aprc = metrics::average_precision(pooled, pooled_labels);
    out.inputs.runs.push_back(std::move(run));
  }

  const double n = static_cast<double>(members.size());
  std::vector<float> pooled;
  pooled.reserve(pooled_labels.size());
  for (std::size_t c = 0; c < test.size(); ++c) {
    Tensor p(test[c].mask.shape());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = static_cast<float>(sums[c][i] / n);
    pooled.insert(pooled.end(), p.values().begin(), p.values().end());
    out.inputs.ensemble_chips.push_back(metrics::count_record(test[c].chip_id, metrics::binarize(p.values()), truths[c]));
    out.probabilities.push_back(std::move(p));
  }
  out.inputs.ensemble_aprc = metrics::average_precision(pooled, pooled_labels);
  return out;
}

}  // namespace sarslide::experiments

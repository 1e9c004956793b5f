#include "sarslide/experiments/ensemble.hpp"

#include <vector>

#include "sarslide/errors.hpp"
#include "sarslide/trainer/losses.hpp"

namespace sarslide::experiments {

void check_ensemble(std::span<const trainer::Checkpoint> checkpoints, const trainer::EmbeddingProvider* frozen) {
  if (checkpoints.empty()) throw DataError("ensemble needs at least one checkpoint");
  const auto& first = checkpoints.front();
  for (const auto& cp : checkpoints) {
    if (cp.stage != 2) throw DataError("ensemble members must be stage-2 checkpoints");
    if (!(cp.arch == first.arch)) throw DataError("ensemble members differ in architecture");
    if (cp.uses_pretrained != first.uses_pretrained) throw DataError("ensemble mixes pretrained and baseline members");
  }
  if (first.uses_pretrained) {
    if (frozen == nullptr) throw DataError("pretrained ensemble needs a frozen embedding provider");
    for (const auto& cp : checkpoints) {
      if (cp.pretrained_sha256 != frozen->params_sha256()) {
        throw DataError("embedding provider does not hold the stage-1 parameters of a member");
      }
    }
  }
}

Tensor predict_probabilities(const trainer::Checkpoint& cp, const chipstore::Sample& sample,
                             trainer::EmbeddingProvider* frozen) {
  check_ensemble(std::span<const trainer::Checkpoint>(&cp, 1), frozen);
  const nets::EmbeddingPair* emb = cp.uses_pretrained ? &frozen->get(sample) : nullptr;
  Tensor out = nets::stage2_forward(sample.pre, sample.post, emb, cp.stage2());
  for (float& v : out.values()) v = static_cast<float>(trainer::sigmoid(v));
  return out;
}

Tensor ensemble_predict(std::span<const trainer::Checkpoint> checkpoints, const chipstore::Sample& sample,
                        trainer::EmbeddingProvider* frozen) {
  check_ensemble(checkpoints, frozen);
  std::vector<double> sum;
  Tensor out;
  for (const auto& cp : checkpoints) {
    const Tensor p = predict_probabilities(cp, sample, frozen);
    if (sum.empty()) {
      sum.assign(p.size(), 0.0);
      out = Tensor(p.shape());
    }
    for (std::size_t i = 0; i < p.size(); ++i) sum[i] += p[i];
  }
  const double n = static_cast<double>(checkpoints.size());
  for (std::size_t i = 0; i < sum.size(); ++i) out[i] = static_cast<float>(sum[i] / n);
  return out;
}

}  // namespace sarslide::experiments

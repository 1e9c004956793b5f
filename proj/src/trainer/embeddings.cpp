#include "sarslide/trainer/embeddings.hpp"

#include <cmath>

#include "sarslide/errors.hpp"

namespace sarslide::trainer {

nets::EmbeddingStats compute_embedding_stats(const nets::Stage1Params& params, std::span<const chipstore::Sample> set) {
  if (set.empty()) throw DataError("embedding statistics need at least one chip");
  const int c = params.arch.embedding_width();
  std::vector<double> sum(static_cast<std::size_t>(c), 0.0), sum_sq(static_cast<std::size_t>(c), 0.0);
  double count = 0.0;
  for (const auto& s : set) {
    for (const Tensor* image : {&s.pre, &s.post}) {
      const Tensor e = nets::stage1_embed(*image, params);
      const std::size_t plane = e.size() / static_cast<std::size_t>(c);
      for (std::size_t k = 0; k < sum.size(); ++k) {
        for (std::size_t i = 0; i < plane; ++i) {
          const double v = e[k * plane + i];
          sum[k] += v;
          sum_sq[k] += v * v;
        }
      }
      count += static_cast<double>(plane);
    }
  }
  nets::EmbeddingStats stats;
  for (std::size_t k = 0; k < sum.size(); ++k) {
    const double mean = sum[k] / count;
    const double var = std::max(0.0, sum_sq[k] / count - mean * mean);
    const double sd = std::sqrt(var);
    stats.mean.push_back(mean);
    stats.std.push_back(sd > 1e-6 ? sd : 1.0);
  }
  return stats;
}

EmbeddingProvider::EmbeddingProvider(nets::Stage1Params stage1, std::optional<nets::EmbeddingStats> stats)
    : stage1_(std::move(stage1)), stats_(std::move(stats)), sha_(stage1_.params.sha256()) {}

EmbeddingProvider::EmbeddingProvider(const Checkpoint& stage1)
    : EmbeddingProvider(stage1.stage1(), stage1.embedding_stats) {}

const nets::EmbeddingPair& EmbeddingProvider::get(const chipstore::Sample& sample) {
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(sample.chip_id); it != cache_.end()) return *it->second;
  }
  auto pair = std::make_unique<nets::EmbeddingPair>(
      nets::EmbeddingPair{nets::stage1_embed(sample.pre, stage1_), nets::stage1_embed(sample.post, stage1_)});
  if (stats_) {
    nets::standardize_embedding(pair->pre, *stats_);
    nets::standardize_embedding(pair->post, *stats_);
  }
  std::lock_guard lock(mutex_);
  auto [it, inserted] = cache_.try_emplace(sample.chip_id, std::move(pair));
  return *it->second;
}

std::size_t EmbeddingProvider::cached() const {
  std::lock_guard lock(mutex_);
  return cache_.size();
}

}  // namespace sarslide::trainer

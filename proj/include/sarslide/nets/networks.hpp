#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "sarslide/nets/arch.hpp"
#include "sarslide/nets/graph.hpp"
#include "sarslide/nets/params.hpp"

namespace sarslide::nets {

/// Siamese chip classifier: one U-Net (residual encoder, skip-connected
/// decoder, 1x1 embedding projection) shared by both acquisitions, and a
/// two-layer fully connected head over the pooled embeddings.
/// Parameter names: `enc.*`, `dec.*` (shared backbone) and `head.*`.
struct Stage1Params {
  ArchConfig arch;
  ParamStore params;
};

/// Per-pixel segmenter: three 3x3 conv layers over the stacked pre/post
/// images, optionally concatenated with frozen stage-1 embeddings of both
/// acquisitions, then a two-layer conv head producing one logit per pixel.
struct Stage2Params {
  ArchConfig arch;
  bool uses_pretrained = false;
  ParamStore params;
};

/// Stage-1 embeddings of the pre- and post-event images.
struct EmbeddingPair {
  Tensor pre;
  Tensor post;
};

/// Per-channel standardization applied to frozen embeddings before fusion.
struct EmbeddingStats {
  std::vector<double> mean;
  std::vector<double> std;

  bool operator==(const EmbeddingStats&) const = default;
};

/// x -> (x - mean[c]) / std[c] on a (C, S, S) embedding.
void standardize_embedding(Tensor& embedding, const EmbeddingStats& stats);

Stage1Params init_stage1(const ArchConfig& arch, std::uint64_t seed);
Stage2Params init_stage2(const ArchConfig& arch, bool uses_pretrained, std::uint64_t seed);

using AnyParams = std::variant<Stage1Params, Stage2Params>;
AnyParams init_params(const ArchConfig& arch, int stage, std::uint64_t seed, bool uses_pretrained = false);

/// (embedding_width, S, S) feature map of one image.
Tensor stage1_embed(const Tensor& image, const Stage1Params& params);
/// Head logit from two embeddings.
float stage1_head(const Tensor& emb_pre, const Tensor& emb_post, const Stage1Params& params);
/// Chip-level landslide logit.
float stage1_forward(const Tensor& pre, const Tensor& post, const Stage1Params& params);
std::vector<float> stage1_forward_batch(std::span<const Tensor> pre, std::span<const Tensor> post,
                                        const Stage1Params& params);

/// (1, S, S) per-pixel logits. `frozen` must be given iff params.uses_pretrained.
Tensor stage2_forward(const Tensor& pre, const Tensor& post, const EmbeddingPair* frozen, const Stage2Params& params);

/// Throws DataError unless `image` is (input_channels, S, S) and finite.
void check_image(const Tensor& image, const ArchConfig& arch);

// Graph builders used by the trainers. `grads` (nullable) receives parameter
// gradients on backward; pass null for frozen or inference-only use.
Graph::Var build_stage1_embedding(Graph& g, Graph::Var image, const Stage1Params& params, ParamStore* grads);
Graph::Var build_stage1_head(Graph& g, Graph::Var emb_pre, Graph::Var emb_post, const Stage1Params& params,
                             ParamStore* grads);
Graph::Var build_stage2(Graph& g, Graph::Var pre, Graph::Var post, std::optional<std::pair<Graph::Var, Graph::Var>> frozen,
                        const Stage2Params& params, ParamStore* grads);

}  // namespace sarslide::nets

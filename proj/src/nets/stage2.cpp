#include <string>

#include "binder.hpp"
#include "sarslide/errors.hpp"
#include "sarslide/nets/networks.hpp"

namespace sarslide::nets {

using detail::add_conv;
using detail::Binder;
using detail::kReluGain;

Stage2Params init_stage2(const ArchConfig& arch, bool uses_pretrained, std::uint64_t seed) {
  arch.validate();
  std::mt19937_64 rng(seed);
  Stage2Params p{arch, uses_pretrained, {}};
  ParamStore& ps = p.params;
  const int c = arch.scaled(kSegEmbedderChannels);
  const int h = arch.scaled(kSegFusionChannels);
  const int fused = c + (uses_pretrained ? 2 * arch.embedding_width() : 0);

  add_conv(ps, "seg.embed1", c, 2 * arch.input_channels, 3, kReluGain, rng);
  add_conv(ps, "seg.embed2", c, c, 3, kReluGain, rng);
  add_conv(ps, "seg.embed3", c, c, 3, kReluGain, rng);
  add_conv(ps, "seg.fuse1", h, fused, 3, kReluGain, rng);
  add_conv(ps, "seg.fuse2", 1, h, 3, 1.0, rng);
  return p;
}

Graph::Var build_stage2(Graph& g, Graph::Var pre, Graph::Var post,
                        std::optional<std::pair<Graph::Var, Graph::Var>> frozen, const Stage2Params& params,
                        ParamStore* grads) {
  if (params.uses_pretrained != frozen.has_value()) {
    throw DataError(params.uses_pretrained ? "stage2: pretrained model requires frozen embeddings"
                                           : "stage2: baseline model received unexpected frozen embeddings");
  }
  const Binder bind{g, params.params, grads};
  const Graph::Var stacked[] = {pre, post};
  Graph::Var x = g.relu(bind.conv(g.concat(stacked), "seg.embed1", 1, 1));
  x = g.relu(bind.conv(x, "seg.embed2", 1, 1));
  x = g.relu(bind.conv(x, "seg.embed3", 1, 1));
  if (frozen) {
    const Graph::Var parts[] = {x, frozen->first, frozen->second};
    x = g.concat(parts);
  }
  x = g.relu(bind.conv(x, "seg.fuse1", 1, 1));
  return bind.conv(x, "seg.fuse2", 1, 1);
}

Tensor stage2_forward(const Tensor& pre, const Tensor& post, const EmbeddingPair* frozen, const Stage2Params& params) {
  check_image(pre, params.arch);
  check_image(post, params.arch);
  if (params.uses_pretrained != (frozen != nullptr)) {
    throw DataError(params.uses_pretrained ? "stage2: pretrained model requires frozen embeddings"
                                           : "stage2: baseline model received unexpected frozen embeddings");
  }
  Graph g;
  std::optional<std::pair<Graph::Var, Graph::Var>> emb;
  if (frozen != nullptr) {
    const std::vector<int> expected{params.arch.embedding_width(), params.arch.chip_size, params.arch.chip_size};
    if (frozen->pre.shape() != expected || frozen->post.shape() != expected) {
      throw DataError("stage2: frozen embedding shape mismatch");
    }
    emb = std::make_pair(g.input_ref(frozen->pre), g.input_ref(frozen->post));
  }
  const auto out = build_stage2(g, g.input_ref(pre), g.input_ref(post), emb, params, nullptr);
  return g.value(out);
}

}  // namespace sarslide::nets

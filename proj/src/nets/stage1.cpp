#include <cmath>
#include <string>

#include "sarslide/errors.hpp"
#include "sarslide/nets/networks.hpp"
#include "binder.hpp"

namespace sarslide::nets {

namespace {

using detail::add_conv;
using detail::Binder;
using detail::kReluGain;

std::string block_prefix(int stage, int block) {
  return "enc.s" + std::to_string(stage) + ".b" + std::to_string(block) + ".";
}

bool block_projects(int stage, int block, int in_ch, int out_ch) {
  return block == 0 && (stage > 0 || in_ch != out_ch);
}

int total_blocks(int depth) {
  int n = 0;
  for (int s = 0; s < depth; ++s) n += kBlocksPerStage[s];
  return n;
}

}  // namespace

void check_image(const Tensor& image, const ArchConfig& arch) {
  const std::vector<int> expected{arch.input_channels, arch.chip_size, arch.chip_size};
  if (image.shape() != expected) {
    throw DataError("image shape " + image.shape_string() + " does not match architecture (" +
                    std::to_string(arch.input_channels) + "," + std::to_string(arch.chip_size) + "," +
                    std::to_string(arch.chip_size) + ")");
  }
  if (!image.all_finite()) throw DataError("image contains non-finite values");
}

Stage1Params init_stage1(const ArchConfig& arch, std::uint64_t seed) {
  arch.validate();
  std::mt19937_64 rng(seed);
  Stage1Params p{arch, {}};
  ParamStore& ps = p.params;
  const auto ch = arch.stage_channels();
  const int emb = arch.embedding_width();
  // Residual branches are damped so the un-normalized stack starts near identity.
  const double residual_gain = kReluGain / std::sqrt(static_cast<double>(total_blocks(arch.encoder_depth)));

  add_conv(ps, "enc.stem", ch[0], arch.input_channels, 3, kReluGain, rng);
  for (int s = 0; s < arch.encoder_depth; ++s) {
    for (int b = 0; b < kBlocksPerStage[s]; ++b) {
      const int in = b == 0 ? (s == 0 ? ch[0] : ch[s - 1]) : ch[s];
      const std::string pre = block_prefix(s, b);
      add_conv(ps, pre + "conv1", ch[s], in, 3, kReluGain, rng);
      add_conv(ps, pre + "conv2", ch[s], ch[s], 3, residual_gain, rng);
      if (block_projects(s, b, in, ch[s])) add_conv(ps, pre + "proj", ch[s], in, 1, 1.0, rng);
    }
  }
  for (int l = arch.encoder_depth - 2; l >= 0; --l) {
    const std::string pre = "dec.l" + std::to_string(l) + ".";
    add_conv(ps, pre + "conv1", ch[l], ch[l + 1] + ch[l], 3, kReluGain, rng);
    add_conv(ps, pre + "conv2", ch[l], ch[l], 3, kReluGain, rng);
  }
  add_conv(ps, "dec.emb", emb, ch[0], 1, 1.0, rng);

  init_fan_in_uniform(ps.add("head.fc1.w", {emb, 2 * emb}), 2 * emb, kReluGain, rng);
  ps.add("head.fc1.b", {emb});
  init_fan_in_uniform(ps.add("head.fc2.w", {1, emb}), emb, 1.0, rng);
  ps.add("head.fc2.b", {1});
  return p;
}

Graph::Var build_stage1_embedding(Graph& g, Graph::Var image, const Stage1Params& params, ParamStore* grads) {
  const ArchConfig& arch = params.arch;
  const Binder bind{g, params.params, grads};
  const auto ch = arch.stage_channels();

  Graph::Var x = g.relu(bind.conv(image, "enc.stem", 1, 1));
  std::vector<Graph::Var> skips;
  for (int s = 0; s < arch.encoder_depth; ++s) {
    for (int b = 0; b < kBlocksPerStage[s]; ++b) {
      const int in = b == 0 ? (s == 0 ? ch[0] : ch[s - 1]) : ch[s];
      const int stride = (b == 0 && s > 0) ? 2 : 1;
      const std::string pre = block_prefix(s, b);
      Graph::Var h = g.relu(bind.conv(x, pre + "conv1", stride, 1));
      h = bind.conv(h, pre + "conv2", 1, 1);
      const Graph::Var shortcut = block_projects(s, b, in, ch[s]) ? bind.conv(x, pre + "proj", stride, 0) : x;
      x = g.relu(g.add(h, shortcut));
    }
    skips.push_back(x);
  }
  for (int l = arch.encoder_depth - 2; l >= 0; --l) {
    const std::string pre = "dec.l" + std::to_string(l) + ".";
    const Graph::Var parts[] = {g.upsample2x(x), skips[static_cast<std::size_t>(l)]};
    x = g.relu(bind.conv(g.concat(parts), pre + "conv1", 1, 1));
    x = g.relu(bind.conv(x, pre + "conv2", 1, 1));
  }
  return bind.conv(x, "dec.emb", 1, 0);
}

Graph::Var build_stage1_head(Graph& g, Graph::Var emb_pre, Graph::Var emb_post, const Stage1Params& params,
                             ParamStore* grads) {
  const Binder bind{g, params.params, grads};
  const Graph::Var pooled[] = {g.mean_pool(emb_pre), g.mean_pool(emb_post)};
  Graph::Var h = g.linear(g.concat(pooled), bind("head.fc1.w"), bind("head.fc1.b"));
  h = g.relu(h);
  return g.linear(h, bind("head.fc2.w"), bind("head.fc2.b"));
}

Tensor stage1_embed(const Tensor& image, const Stage1Params& params) {
  check_image(image, params.arch);
  Graph g;
  const auto out = build_stage1_embedding(g, g.input_ref(image), params, nullptr);
  return g.value(out);
}

float stage1_head(const Tensor& emb_pre, const Tensor& emb_post, const Stage1Params& params) {
  const int e = params.arch.embedding_width();
  const std::vector<int> expected{e, params.arch.chip_size, params.arch.chip_size};
  if (emb_pre.shape() != expected || emb_post.shape() != expected) {
    throw DataError("stage1_head: embedding shape mismatch");
  }
  Graph g;
  const auto out = build_stage1_head(g, g.input_ref(emb_pre), g.input_ref(emb_post), params, nullptr);
  return g.value(out)[0];
}

float stage1_forward(const Tensor& pre, const Tensor& post, const Stage1Params& params) {
  check_image(pre, params.arch);
  check_image(post, params.arch);
  Graph g;
  const auto e_pre = build_stage1_embedding(g, g.input_ref(pre), params, nullptr);
  const auto e_post = build_stage1_embedding(g, g.input_ref(post), params, nullptr);
  return g.value(build_stage1_head(g, e_pre, e_post, params, nullptr))[0];
}

std::vector<float> stage1_forward_batch(std::span<const Tensor> pre, std::span<const Tensor> post,
                                        const Stage1Params& params) {
  if (pre.size() != post.size()) throw DataError("stage1_forward_batch: pre/post batch sizes differ");
  std::vector<float> logits;
  logits.reserve(pre.size());
  for (std::size_t i = 0; i < pre.size(); ++i) logits.push_back(stage1_forward(pre[i], post[i], params));
  return logits;
}

AnyParams init_params(const ArchConfig& arch, int stage, std::uint64_t seed, bool uses_pretrained) {
  if (stage == 1) return init_stage1(arch, seed);
  if (stage == 2) return init_stage2(arch, uses_pretrained, seed);
  throw ConfigError("stage must be 1 or 2");
}

void standardize_embedding(Tensor& embedding, const EmbeddingStats& stats) {
  const int c = embedding.dim(0);
  if (embedding.rank() != 3 || stats.mean.size() != static_cast<std::size_t>(c) || stats.std.size() != stats.mean.size()) {
    throw DataError("embedding statistics do not match the embedding channels");
  }
  const std::size_t plane = embedding.size() / static_cast<std::size_t>(c);
  for (int k = 0; k < c; ++k) {
    const double inv = 1.0 / stats.std[static_cast<std::size_t>(k)];
    float* p = embedding.data() + static_cast<std::size_t>(k) * plane;
    for (std::size_t i = 0; i < plane; ++i) p[i] = static_cast<float>((p[i] - stats.mean[static_cast<std::size_t>(k)]) * inv);
  }
}

}  // namespace sarslide::nets

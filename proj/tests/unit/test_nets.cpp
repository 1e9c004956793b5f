#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include "sarslide/errors.hpp"
#include "sarslide/nets/graph.hpp"
#include "sarslide/nets/networks.hpp"
#include "sarslide/nets/ops.hpp"

using namespace sarslide;
using namespace sarslide::nets;

namespace {

Tensor random_tensor(std::vector<int> shape, std::mt19937_64& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  std::normal_distribution<double> n(0.0, scale);
  for (float& v : t.values()) v = static_cast<float>(n(rng));
  return t;
}

Tensor naive_conv(const Tensor& x, const Tensor& w, const Tensor& b, int stride, int pad) {
  const int C = x.dim(0), H = x.dim(1), W = x.dim(2), O = w.dim(0), k = w.dim(2);
  const int Ho = (H + 2 * pad - k) / stride + 1, Wo = (W + 2 * pad - k) / stride + 1;
  Tensor out({O, Ho, Wo});
  for (int o = 0; o < O; ++o) {
    for (int i = 0; i < Ho; ++i) {
      for (int j = 0; j < Wo; ++j) {
        double acc = b.empty() ? 0.0 : b[static_cast<std::size_t>(o)];
        for (int c = 0; c < C; ++c) {
          for (int di = 0; di < k; ++di) {
            for (int dj = 0; dj < k; ++dj) {
              const int y = i * stride + di - pad, xx = j * stride + dj - pad;
              if (y < 0 || y >= H || xx < 0 || xx >= W) continue;
              acc += static_cast<double>(x.at(c, y, xx)) *
                     w[((static_cast<std::size_t>(o) * C + c) * k + di) * k + dj];
            }
          }
        }
        out.at(o, i, j) = static_cast<float>(acc);
      }
    }
  }
  return out;
}

double weighted_sum(const Tensor& out, const Tensor& r) {
  double s = 0;
  for (std::size_t i = 0; i < out.size(); ++i) s += static_cast<double>(out[i]) * r[i];
  return s;
}

// Relative error ||analytic - numeric|| / max(||analytic||, ||numeric||) over
// the probed coordinates of `target`.
double fd_relative_error(Tensor& target, const Tensor& analytic, const std::function<double()>& loss,
                         std::mt19937_64& rng, int probes, double h) {
  std::uniform_int_distribution<std::size_t> pick(0, target.size() - 1);
  double diff = 0, na = 0, nn = 0;
  for (int p = 0; p < probes; ++p) {
    const std::size_t i = pick(rng);
    const float orig = target[i];
    target[i] = static_cast<float>(orig + h);
    const double up = loss();
    const float hi = target[i];
    target[i] = static_cast<float>(orig - h);
    const double down = loss();
    const float lo = target[i];
    target[i] = orig;
    const double numeric = (up - down) / (static_cast<double>(hi) - lo);
    diff += (numeric - analytic[i]) * (numeric - analytic[i]);
    na += static_cast<double>(analytic[i]) * analytic[i];
    nn += numeric * numeric;
  }
  return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nn), 1e-12});
}

}  // namespace

TEST(Conv2d, MatchesNaiveLoop) {
  std::mt19937_64 rng(1);
  for (auto [stride, pad, k] : std::vector<std::array<int, 3>>{{1, 1, 3}, {2, 1, 3}, {1, 0, 1}, {2, 3, 7}}) {
    const Tensor x = random_tensor({3, 11, 9}, rng);
    const Tensor w = random_tensor({4, 3, k, k}, rng);
    const Tensor b = random_tensor({4}, rng);
    const Tensor got = conv2d(x, w, b, stride, pad);
    const Tensor want = naive_conv(x, w, b, stride, pad);
    ASSERT_EQ(got.shape(), want.shape());
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-4) << i;
  }
  const Tensor x = random_tensor({2, 5, 5}, rng);
  EXPECT_THROW(conv2d(x, random_tensor({1, 3, 3, 3}, rng), Tensor(), 1, 1), std::invalid_argument);
}

TEST(Conv2d, BackwardMatchesFiniteDifferences) {
  std::mt19937_64 rng(2);
  Tensor x = random_tensor({2, 7, 6}, rng);
  Tensor w = random_tensor({3, 2, 3, 3}, rng);
  Tensor b = random_tensor({3}, rng);
  const Tensor r = random_tensor(conv2d(x, w, b, 2, 1).shape(), rng);
  Tensor dx(x.shape()), dw(w.shape()), db(b.shape());
  conv2d_backward(x, w, r, 2, 1, &dx, &dw, &db);
  auto loss = [&] { return weighted_sum(naive_conv(x, w, b, 2, 1), r); };
  EXPECT_LT(fd_relative_error(x, dx, loss, rng, 30, 1e-2), 1e-3);
  EXPECT_LT(fd_relative_error(w, dw, loss, rng, 30, 1e-2), 1e-3);
  EXPECT_LT(fd_relative_error(b, db, loss, rng, 3, 1e-2), 1e-3);
}

TEST(Graph, OpsGradients) {
  std::mt19937_64 rng(3);
  Tensor x = random_tensor({3, 4, 4}, rng);
  Tensor w = random_tensor({2, 3, 3, 3}, rng, 0.5);
  Tensor b = random_tensor({2}, rng);
  Tensor lw = random_tensor({5, 6}, rng, 0.5);
  Tensor lb = random_tensor({5}, rng);
  Tensor gw(w.shape()), gb(b.shape()), glw(lw.shape()), glb(lb.shape());
  const Tensor r = random_tensor({5}, rng);

  // conv(stride 2) -> relu -> upsample -> add -> concat -> pool -> linear
  auto build = [&](Graph& g, bool grads) {
    const auto xv = g.input_ref(x, grads);
    const auto wv = g.param(w, grads ? &gw : nullptr);
    const auto bv = g.param(b, grads ? &gb : nullptr);
    const auto up = g.upsample2x(g.relu(g.conv2d(xv, wv, bv, 2, 1)));
    const auto same = g.conv2d(xv, wv, bv, 1, 1);
    const auto parts = std::array<Graph::Var, 3>{up, g.add(up, same), g.relu(same)};
    const auto feat = g.mean_pool(g.concat(std::span<const Graph::Var>(parts)));
    const auto y = g.linear(feat, g.param(lw, grads ? &glw : nullptr), g.param(lb, grads ? &glb : nullptr));
    return std::make_pair(xv, y);
  };
  auto loss = [&]() {
    Graph g;
    return weighted_sum(g.value(build(g, false).second), r);
  };

  Graph g;
  auto [xv, y] = build(g, true);
  ASSERT_EQ(g.value(y).size(), 5u);
  g.backward(y, r);
  const Tensor dx = g.grad(xv);

  EXPECT_LT(fd_relative_error(x, dx, loss, rng, 20, 1e-2), 2e-3);
  EXPECT_LT(fd_relative_error(w, gw, loss, rng, 20, 1e-2), 2e-3);
  EXPECT_LT(fd_relative_error(b, gb, loss, rng, 2, 1e-2), 2e-3);
  EXPECT_LT(fd_relative_error(lw, glw, loss, rng, 20, 1e-2), 2e-3);
  EXPECT_LT(fd_relative_error(lb, glb, loss, rng, 5, 1e-2), 2e-3);
}

TEST(Graph, FrozenLeafReceivesNoGradient) {
  Tensor x({1, 2, 2}, 1.0f), w({1, 1, 1, 1}, 2.0f), b({1}, 0.0f);
  Graph g;
  const auto xv = g.input_ref(x);
  const auto out = g.conv2d(xv, g.param(w, nullptr), g.param(b, nullptr), 1, 0);
  EXPECT_FALSE(g.requires_grad(out));
  EXPECT_THROW(g.grad(xv), std::logic_error);
}

TEST(Arch, ScalingAndValidation) {
  ArchConfig a;
  EXPECT_EQ(a.stage_channels(), (std::vector<int>{64, 128, 256, 512}));
  a.width_scale = 0.1;
  EXPECT_EQ(a.scaled(64), 6);
  EXPECT_EQ(a.scaled(3), 1);
  a.chip_size = 12;
  EXPECT_THROW(a.validate(), ConfigError);
  a = ArchConfig{};
  a.width_scale = 0.0;
  EXPECT_THROW(a.validate(), ConfigError);
  a = ArchConfig{};
  a.encoder_depth = 2;
  EXPECT_EQ(arch_from_json(to_json(a)), a);
  EXPECT_THROW(arch_from_json({{"depth", 3}}), ConfigError);
}

TEST(Params, FullScaleCounts) {
  const ArchConfig full;
  EXPECT_EQ(count_params(init_stage1(full, 0).params), 24377857u);
  EXPECT_EQ(count_params(init_stage2(full, true, 0).params), 1133153u);
  EXPECT_EQ(count_params(init_stage2(full, false, 0).params), 838241u);
}

TEST(Params, InitDeterministicAndNamed) {
  ArchConfig a;
  a.width_scale = 0.1;
  a.chip_size = 16;
  const auto p1 = init_stage1(a, 5), p2 = init_stage1(a, 5), p3 = init_stage1(a, 6);
  EXPECT_TRUE(p1.params.bitwise_equal(p2.params));
  EXPECT_FALSE(p1.params.bitwise_equal(p3.params));
  EXPECT_EQ(p1.params.sha256(), p2.params.sha256());
  bool enc = false, dec = false, head = false;
  for (std::size_t i = 0; i < p1.params.entries(); ++i) {
    const auto& n = p1.params.name(i);
    enc |= n.rfind("enc.", 0) == 0;
    dec |= n.rfind("dec.", 0) == 0;
    head |= n.rfind("head.", 0) == 0;
  }
  EXPECT_TRUE(enc && dec && head);
  EXPECT_THROW(init_params(a, 3, 0), ConfigError);
}

TEST(Stage1, ShapesAndBatchAgreement) {
  ArchConfig a;
  a.width_scale = 0.1;
  a.chip_size = 16;
  const auto p = init_stage1(a, 1);
  std::mt19937_64 rng(7);
  const Tensor pre = random_tensor({2, 16, 16}, rng), post = random_tensor({2, 16, 16}, rng);
  const Tensor e = stage1_embed(pre, p);
  EXPECT_EQ(e.shape(), (std::vector<int>{a.embedding_width(), 16, 16}));
  const float logit = stage1_forward(pre, post, p);
  EXPECT_EQ(logit, stage1_head(e, stage1_embed(post, p), p));
  const std::vector<Tensor> pres = {pre, post}, posts = {post, pre};
  const auto batch = stage1_forward_batch(pres, posts, p);
  EXPECT_EQ(batch[0], logit);
  EXPECT_THROW(stage1_forward(Tensor({2, 8, 8}), post, p), DataError);
  Tensor bad = pre;
  bad[0] = std::nanf("");
  EXPECT_THROW(check_image(bad, a), DataError);
}

TEST(Stage1, FullGradientMatchesFiniteDifferences) {
  ArchConfig a;
  a.width_scale = 0.1;
  a.chip_size = 8;
  a.encoder_depth = 2;
  auto p = init_stage1(a, 2);
  std::mt19937_64 rng(8);
  const Tensor pre = random_tensor({2, 8, 8}, rng), post = random_tensor({2, 8, 8}, rng);
  ParamStore grads = p.params.zeros_like();
  Graph g;
  const auto e0 = build_stage1_embedding(g, g.input_ref(pre), p, &grads);
  const auto e1 = build_stage1_embedding(g, g.input_ref(post), p, &grads);
  const auto out = build_stage1_head(g, e0, e1, p, &grads);
  g.backward(out, Tensor({1}, 1.0f));
  auto loss = [&] { return static_cast<double>(stage1_forward(pre, post, p)); };
  for (const char* name : {"head.fc2.w", "head.fc1.w"}) {
    if (!p.params.contains(name)) continue;
    EXPECT_LT(fd_relative_error(p.params.at(name), grads.at(name), loss, rng, 10, 1e-2), 1e-2) << name;
  }
  // first and last trainable tensors of the backbone
  for (std::size_t idx : {std::size_t{0}, p.params.entries() - 5}) {
    EXPECT_LT(fd_relative_error(p.params.tensor(idx), grads.tensor(idx), loss, rng, 20, 1e-3), 2e-2)
        << p.params.name(idx);
  }
}

TEST(Stage2, FrozenEmbeddingContract) {
  ArchConfig a;
  a.width_scale = 0.1;
  a.chip_size = 16;
  const auto s1 = init_stage1(a, 1);
  const auto pre_trained = init_stage2(a, true, 2);
  const auto baseline = init_stage2(a, false, 2);
  std::mt19937_64 rng(9);
  const Tensor pre = random_tensor({2, 16, 16}, rng), post = random_tensor({2, 16, 16}, rng);
  const EmbeddingPair emb{stage1_embed(pre, s1), stage1_embed(post, s1)};
  EXPECT_EQ(stage2_forward(pre, post, &emb, pre_trained).shape(), (std::vector<int>{1, 16, 16}));
  EXPECT_EQ(stage2_forward(pre, post, nullptr, baseline).shape(), (std::vector<int>{1, 16, 16}));
  EXPECT_THROW(stage2_forward(pre, post, nullptr, pre_trained), DataError);
  EXPECT_THROW(stage2_forward(pre, post, &emb, baseline), DataError);
  const EmbeddingPair wrong{Tensor({3, 16, 16}), Tensor({3, 16, 16})};
  EXPECT_THROW(stage2_forward(pre, post, &wrong, pre_trained), DataError);
}

TEST(Stage2, StandardizeEmbedding) {
  Tensor e({2, 1, 2}, std::vector<float>{1, 3, 10, 20});
  standardize_embedding(e, {{2.0, 10.0}, {1.0, 5.0}});
  EXPECT_FLOAT_EQ(e[0], -1.0f);
  EXPECT_FLOAT_EQ(e[1], 1.0f);
  EXPECT_FLOAT_EQ(e[3], 2.0f);
  EXPECT_THROW(standardize_embedding(e, {{0.0}, {1.0}}), DataError);
}

#include "sarslide/trainer/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "sarslide/errors.hpp"
#include "sarslide/io_util.hpp"
#include "sarslide/metrics/pr_curve.hpp"
#include "sarslide/trainer/adam.hpp"
#include "sarslide/trainer/early_stop.hpp"
#include "sarslide/trainer/losses.hpp"

namespace sarslide::trainer {

using chipstore::Sample;
using nets::Graph;
using nets::ParamStore;

namespace {

constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kShuffleStream = 2;

void check_sets(std::span<const Sample> train, std::span<const Sample> val) {
  if (train.empty()) throw DataError("training set is empty");
  if (val.empty()) throw DataError("validation set is empty");
  std::set<std::string_view> ids;
  for (const auto& s : train) ids.insert(s.chip_id);
  for (const auto& s : val) {
    if (ids.count(s.chip_id)) throw DataError("chip " + s.chip_id + " is in both the training and validation sets");
  }
}

class TopK {
 public:
  explicit TopK(std::size_t k) : k_(k) {}

  bool qualifies(double metric) const { return kept_.size() < k_ || metric > kept_.back().val_metric; }

  void offer(Checkpoint cp) {
    auto pos = std::find_if(kept_.begin(), kept_.end(),
                            [&](const Checkpoint& c) { return c.val_metric < cp.val_metric; });
    kept_.insert(pos, std::move(cp));
    if (kept_.size() > k_) kept_.pop_back();
  }

  std::vector<Checkpoint> release() { return std::move(kept_); }

 private:
  std::size_t k_;
  std::vector<Checkpoint> kept_;
};

template <typename GradFn, typename EvalFn>
TrainResult run_loop(ParamStore& params, std::span<const Sample> train, const Hyperparams& hyper,
                     const Checkpoint& templ, GradFn&& batch_gradients, EvalFn&& evaluate) {
  std::mt19937_64 rng(derive_seed(hyper.seed, kShuffleStream));
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  AdamState adam = make_adam_state(params);
  ParamStore grads = params.zeros_like();
  TopK top(static_cast<std::size_t>(hyper.top_k_checkpoints));
  TrainResult result;
  std::vector<double> history;
  std::vector<const Sample*> batch;

  for (int epoch = 0; epoch < hyper.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(hyper.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(hyper.batch_size));
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(&train[order[i]]);
      grads.zero();
      const double loss = batch_gradients(SampleBatch(batch), grads);
      if (!std::isfinite(loss)) throw TrainingError("training loss diverged at epoch " + std::to_string(epoch));
      loss_sum += loss * static_cast<double>(batch.size());
      adam_step(params, grads, adam, hyper);
    }
    const ValidationScore score = evaluate();
    if (!std::isfinite(score.loss)) throw TrainingError("validation loss diverged at epoch " + std::to_string(epoch));
    result.log.push_back({epoch, loss_sum / static_cast<double>(train.size()), score.loss, score.metric});
    history.push_back(score.loss);

    if (top.qualifies(score.metric)) {
      Checkpoint cp = templ;
      cp.params = params;
      cp.epoch = epoch;
      cp.val_metric = score.metric;
      cp.val_loss = score.loss;
      top.offer(std::move(cp));
    }
    if (early_stop_check(history, hyper.patience_epochs)) {
      result.early_stopped = true;
      break;
    }
  }
  result.checkpoints = top.release();
  return result;
}

}  // namespace

double stage1_batch_gradients(const nets::Stage1Params& params, SampleBatch batch, ParamStore& grads) {
  if (batch.empty()) throw DataError("empty batch");
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  for (const Sample* s : batch) {
    Graph g;
    const auto e_pre = nets::build_stage1_embedding(g, g.input_ref(s->pre), params, &grads);
    const auto e_post = nets::build_stage1_embedding(g, g.input_ref(s->post), params, &grads);
    const auto logit = nets::build_stage1_head(g, e_pre, e_post, params, &grads);
    const float label = s->has_landslide ? 1.0f : 0.0f;
    float dlogit = 0.0f;
    total += bce_with_logits(g.value(logit).values(), std::span<const float>(&label, 1), std::span<float>(&dlogit, 1));
    Tensor seed({1});
    seed[0] = static_cast<float>(dlogit * inv_b);
    g.backward(logit, seed);
  }
  return total * inv_b;
}

double stage2_batch_gradients(const nets::Stage2Params& params, SampleBatch batch, EmbeddingProvider* frozen,
                              double dice_smoothing, ParamStore& grads) {
  if (batch.empty()) throw DataError("empty batch");
  if (params.uses_pretrained != (frozen != nullptr)) throw DataError("stage2: frozen embedding provider mismatch");
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  for (const Sample* s : batch) {
    Graph g;
    std::optional<std::pair<Graph::Var, Graph::Var>> emb;
    if (frozen != nullptr) {
      const auto& pair = frozen->get(*s);
      emb = std::make_pair(g.input_ref(pair.pre), g.input_ref(pair.post));
    }
    const auto logits = nets::build_stage2(g, g.input_ref(s->pre), g.input_ref(s->post), emb, params, &grads);
    Tensor seed(g.value(logits).shape());
    total += dice_loss_with_logits(g.value(logits).values(), s->mask.values(), dice_smoothing, seed.values());
    for (float& v : seed.values()) v = static_cast<float>(v * inv_b);
    g.backward(logits, seed);
  }
  return total * inv_b;
}

ValidationScore evaluate_stage1(const nets::Stage1Params& params, std::span<const Sample> set) {
  if (set.empty()) throw DataError("evaluation set is empty");
  std::size_t correct = 0;
  double loss = 0.0;
  for (const auto& s : set) {
    const float logit = nets::stage1_forward(s.pre, s.post, params);
    const float label = s.has_landslide ? 1.0f : 0.0f;
    loss += bce_with_logits(std::span<const float>(&logit, 1), std::span<const float>(&label, 1));
    if ((logit > 0.0f) == s.has_landslide) ++correct;
  }
  const double n = static_cast<double>(set.size());
  return {static_cast<double>(correct) / n, loss / n};
}

ValidationScore evaluate_stage2(const nets::Stage2Params& params, std::span<const Sample> set,
                                EmbeddingProvider* frozen, double dice_smoothing) {
  if (set.empty()) throw DataError("evaluation set is empty");
  std::vector<float> scores;
  std::vector<std::uint8_t> labels;
  double loss = 0.0;
  for (const auto& s : set) {
    const nets::EmbeddingPair* emb = frozen != nullptr ? &frozen->get(s) : nullptr;
    const Tensor logits = nets::stage2_forward(s.pre, s.post, emb, params);
    loss += dice_loss_with_logits(logits.values(), s.mask.values(), dice_smoothing);
    for (float x : logits.values()) scores.push_back(static_cast<float>(sigmoid(x)));
    for (float y : s.mask.values()) labels.push_back(y > 0.5f ? 1 : 0);
  }
  if (std::find(labels.begin(), labels.end(), 1) == labels.end()) {
    throw DataError("validation set has no positive pixels; APRC is undefined");
  }
  return {metrics::average_precision(scores, labels), loss / static_cast<double>(set.size())};
}

TrainResult train_stage1(std::span<const Sample> train, std::span<const Sample> val, const nets::ArchConfig& arch,
                         const Hyperparams& hyper) {
  hyper.validate();
  check_sets(train, val);
  for (const auto& s : train) nets::check_image(s.pre, arch), nets::check_image(s.post, arch);
  nets::Stage1Params net = nets::init_stage1(arch, derive_seed(hyper.seed, kInitStream));
  Checkpoint templ;
  templ.stage = 1;
  templ.arch = arch;
  templ.seed = hyper.seed;
  TrainResult result = run_loop(
      net.params, train, hyper, templ,
      [&](SampleBatch batch, ParamStore& grads) { return stage1_batch_gradients(net, batch, grads); },
      [&] { return evaluate_stage1(net, val); });
  for (auto& cp : result.checkpoints) cp.embedding_stats = compute_embedding_stats(cp.stage1(), train);
  return result;
}

TrainResult train_stage2(std::span<const Sample> train, std::span<const Sample> val, const Checkpoint* pretrained,
                         const nets::ArchConfig& arch, const Hyperparams& hyper, EmbeddingProvider* provider) {
  hyper.validate();
  check_sets(train, val);
  for (const auto& s : train) {
    nets::check_image(s.pre, arch);
    nets::check_image(s.post, arch);
    if (s.mask.shape() != std::vector<int>{1, arch.chip_size, arch.chip_size}) {
      throw DataError("chip " + s.chip_id + " has no per-pixel mask of the expected shape");
    }
  }

  std::unique_ptr<EmbeddingProvider> own;
  std::string pretrained_sha;
  if (pretrained != nullptr) {
    if (pretrained->stage != 1) throw DataError("stage-2 training needs a stage-1 checkpoint for pretraining");
    if (pretrained->arch.embedding_width() != arch.embedding_width() ||
        pretrained->arch.chip_size != arch.chip_size) {
      throw DataError("pretrained checkpoint embedding shape does not match the stage-2 architecture");
    }
    pretrained_sha = pretrained->params.sha256();
    if (provider == nullptr) {
      own = std::make_unique<EmbeddingProvider>(*pretrained);
      provider = own.get();
    } else if (provider->params_sha256() != pretrained_sha) {
      throw DataError("embedding provider was built from different stage-1 parameters");
    }
  } else {
    provider = nullptr;
  }

  nets::Stage2Params net = nets::init_stage2(arch, pretrained != nullptr, derive_seed(hyper.seed, kInitStream));
  Checkpoint templ;
  templ.stage = 2;
  templ.arch = arch;
  templ.uses_pretrained = pretrained != nullptr;
  templ.seed = hyper.seed;
  templ.pretrained_sha256 = pretrained_sha;
  return run_loop(
      net.params, train, hyper, templ,
      [&](SampleBatch batch, ParamStore& grads) {
        return stage2_batch_gradients(net, batch, provider, hyper.dice_smoothing, grads);
      },
      [&] { return evaluate_stage2(net, val, provider, hyper.dice_smoothing); });
}

nlohmann::json train_log_json(const TrainResult& result) {
  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& e : result.log) {
    epochs.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"val_loss", e.val_loss},
                      {"val_metric", e.val_metric}});
  }
  nlohmann::json kept = nlohmann::json::array();
  for (const auto& cp : result.checkpoints) kept.push_back({{"epoch", cp.epoch}, {"val_metric", cp.val_metric}});
  return {{"epochs", epochs}, {"early_stopped", result.early_stopped}, {"checkpoints", kept}};
}

}  // namespace sarslide::trainer

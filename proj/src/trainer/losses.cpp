#include "sarslide/trainer/losses.hpp"

#include <cmath>
#include <vector>

#include "sarslide/errors.hpp"

namespace sarslide::trainer {

namespace {

void check_sizes(std::size_t a, std::size_t b, std::span<float> grad, const char* what) {
  if (a != b) throw DataError(std::string(what) + ": shape mismatch");
  if (!grad.empty() && grad.size() != a) throw DataError(std::string(what) + ": gradient buffer size mismatch");
  if (a == 0) throw DataError(std::string(what) + ": empty input");
}

}  // namespace

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double bce_with_logits(std::span<const float> logits, std::span<const float> labels, std::span<float> grad) {
  check_sizes(logits.size(), labels.size(), grad, "bce_with_logits");
  const double n = static_cast<double>(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double x = logits[i];
    const double y = labels[i];
    if (!std::isfinite(x)) throw TrainingError("bce_with_logits: non-finite logit");
    total += std::max(x, 0.0) - x * y + std::log1p(std::exp(-std::abs(x)));
    if (!grad.empty()) grad[i] = static_cast<float>((sigmoid(x) - y) / n);
  }
  return total / n;
}

namespace {

template <typename P>
double dice_core(const P& probs, std::span<const float> target, double smoothing, std::span<float> grad,
                 bool through_sigmoid) {
  double inter = 0.0, sp = 0.0, st = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    inter += static_cast<double>(probs[i]) * target[i];
    sp += probs[i];
    st += target[i];
  }
  const double num = 2.0 * inter + smoothing;
  const double den = sp + st + smoothing;
  if (!grad.empty()) {
    const double den2 = den * den;
    for (std::size_t i = 0; i < target.size(); ++i) {
      double g = -(2.0 * target[i] * den - num) / den2;
      if (through_sigmoid) g *= probs[i] * (1.0 - probs[i]);
      grad[i] = static_cast<float>(g);
    }
  }
  return 1.0 - num / den;
}

}  // namespace

double dice_loss(std::span<const float> probs, std::span<const float> target, double smoothing,
                 std::span<float> grad) {
  check_sizes(probs.size(), target.size(), grad, "dice_loss");
  return dice_core(probs, target, smoothing, grad, false);
}

double dice_loss_with_logits(std::span<const float> logits, std::span<const float> target, double smoothing,
                             std::span<float> grad) {
  check_sizes(logits.size(), target.size(), grad, "dice_loss");
  std::vector<double> probs(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (!std::isfinite(logits[i])) throw TrainingError("dice_loss: non-finite logit");
    probs[i] = sigmoid(logits[i]);
  }
  return dice_core(probs, target, smoothing, grad, true);
}

}  // namespace sarslide::trainer

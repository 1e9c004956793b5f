#pragma once

#include <cstdint>
#include <span>

namespace sarslide::trainer {

/// Mean binary cross-entropy over elements, evaluated as
/// max(x,0) - x*y + log1p(exp(-|x|)). When `grad` is non-empty it receives
/// d(loss)/d(logit) = (sigmoid(x) - y) / n.
double bce_with_logits(std::span<const float> logits, std::span<const float> labels, std::span<float> grad = {});

/// 1 - (2*sum(p*t) + s) / (sum(p) + sum(t) + s). `grad` (optional) receives
/// d(loss)/d(p).
double dice_loss(std::span<const float> probs, std::span<const float> target, double smoothing,
                 std::span<float> grad = {});

/// Dice loss of sigmoid(logits); `grad` receives d(loss)/d(logit).
double dice_loss_with_logits(std::span<const float> logits, std::span<const float> target, double smoothing,
                             std::span<float> grad = {});

double sigmoid(double x);

}  // namespace sarslide::trainer

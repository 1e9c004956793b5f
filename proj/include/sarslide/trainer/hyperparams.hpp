#pragma once

#include <cstdint>

#include <json.hpp>

namespace sarslide::trainer {

struct Hyperparams {
  double learning_rate = 0.001;
  int batch_size = 32;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int patience_epochs = 50;
  int max_epochs = 1000;
  int top_k_checkpoints = 5;
  double dice_smoothing = 1.0;
  std::uint64_t seed = 0;

  /// Throws ConfigError.
  void validate() const;
};

nlohmann::json to_json(const Hyperparams& h);
/// Missing keys keep their defaults; unknown keys are a ConfigError.
Hyperparams hyperparams_from_json(const nlohmann::json& j);

}  // namespace sarslide::trainer

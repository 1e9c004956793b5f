#include "sarslide/trainer/hyperparams.hpp"

#include "sarslide/errors.hpp"
#include "sarslide/json_util.hpp"

namespace sarslide::trainer {

void Hyperparams::validate() const {
  if (!(learning_rate > 0)) throw ConfigError("learning_rate must be positive");
  if (batch_size <= 0) throw ConfigError("batch_size must be positive");
  if (!(adam_beta1 > 0 && adam_beta1 < 1) || !(adam_beta2 > 0 && adam_beta2 < 1)) {
    throw ConfigError("adam betas must lie in (0, 1)");
  }
  if (!(adam_eps > 0)) throw ConfigError("adam_eps must be positive");
  if (patience_epochs <= 0 || max_epochs <= 0) throw ConfigError("patience_epochs and max_epochs must be positive");
  if (patience_epochs > max_epochs) throw ConfigError("patience_epochs exceeds max_epochs");
  if (top_k_checkpoints <= 0) throw ConfigError("top_k_checkpoints must be positive");
  if (!(dice_smoothing > 0)) throw ConfigError("dice_smoothing must be positive");
}

nlohmann::json to_json(const Hyperparams& h) {
  return {
      {"learning_rate", h.learning_rate},   {"batch_size", h.batch_size},
      {"adam_beta1", h.adam_beta1},         {"adam_beta2", h.adam_beta2},
      {"adam_eps", h.adam_eps},             {"patience_epochs", h.patience_epochs},
      {"max_epochs", h.max_epochs},         {"top_k_checkpoints", h.top_k_checkpoints},
      {"dice_smoothing", h.dice_smoothing}, {"seed", h.seed},
  };
}

Hyperparams hyperparams_from_json(const nlohmann::json& j) {
  const std::string ctx = "hyper";
  require_known_keys(j,
                     {"learning_rate", "batch_size", "adam_beta1", "adam_beta2", "adam_eps", "patience_epochs",
                      "max_epochs", "top_k_checkpoints", "dice_smoothing", "seed"},
                     ctx);
  Hyperparams h;
  read_optional(j, "learning_rate", h.learning_rate, ctx);
  read_optional(j, "batch_size", h.batch_size, ctx);
  read_optional(j, "adam_beta1", h.adam_beta1, ctx);
  read_optional(j, "adam_beta2", h.adam_beta2, ctx);
  read_optional(j, "adam_eps", h.adam_eps, ctx);
  read_optional(j, "patience_epochs", h.patience_epochs, ctx);
  read_optional(j, "max_epochs", h.max_epochs, ctx);
  read_optional(j, "top_k_checkpoints", h.top_k_checkpoints, ctx);
  read_optional(j, "dice_smoothing", h.dice_smoothing, ctx);
  read_optional(j, "seed", h.seed, ctx);
  h.validate();
  return h;
}

}  // namespace sarslide::trainer

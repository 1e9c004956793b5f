#pragma once

#include <cstdint>

#include "sarslide/nets/params.hpp"
#include "sarslide/trainer/hyperparams.hpp"

namespace sarslide::trainer {

struct AdamState {
  nets::ParamStore m;
  nets::ParamStore v;
  std::int64_t step = 0;
};

AdamState make_adam_state(const nets::ParamStore& params);

/// One bias-corrected Adam update, no weight decay. A non-finite gradient
/// raises TrainingError naming the tensor and leaves params untouched.
void adam_step(nets::ParamStore& params, const nets::ParamStore& grads, AdamState& state, const Hyperparams& hyper);

}  // namespace sarslide::trainer

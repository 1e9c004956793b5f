#include "sarslide/trainer/adam.hpp"

#include <cmath>

#include "sarslide/errors.hpp"

namespace sarslide::trainer {

AdamState make_adam_state(const nets::ParamStore& params) {
  return {params.zeros_like(), params.zeros_like(), 0};
}

void adam_step(nets::ParamStore& params, const nets::ParamStore& grads, AdamState& state, const Hyperparams& hyper) {
  if (grads.entries() != params.entries() || state.m.entries() != params.entries()) {
    throw DataError("adam_step: parameter and gradient stores differ");
  }
  for (std::size_t i = 0; i < grads.entries(); ++i) {
    if (!grads.tensor(i).same_shape(params.tensor(i))) {
      throw DataError("adam_step: shape mismatch for " + params.name(i));
    }
    if (!grads.tensor(i).all_finite()) {
      throw TrainingError("non-finite gradient in " + params.name(i) + " at step " + std::to_string(state.step + 1));
    }
  }

  state.step += 1;
  const double b1 = hyper.adam_beta1, b2 = hyper.adam_beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.entries(); ++i) {
    float* w = params.tensor(i).data();
    const float* g = grads.tensor(i).data();
    float* m = state.m.tensor(i).data();
    float* v = state.v.tensor(i).data();
    const std::size_t n = params.tensor(i).size();
    for (std::size_t k = 0; k < n; ++k) {
      const double gk = g[k];
      const double mk = b1 * m[k] + (1.0 - b1) * gk;
      const double vk = b2 * v[k] + (1.0 - b2) * gk * gk;
      m[k] = static_cast<float>(mk);
      v[k] = static_cast<float>(vk);
      w[k] = static_cast<float>(w[k] - hyper.learning_rate * (mk / c1) / (std::sqrt(vk / c2) + hyper.adam_eps));
    }
  }
}

}  // namespace sarslide::trainer

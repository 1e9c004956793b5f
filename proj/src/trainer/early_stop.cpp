#include "sarslide/trainer/early_stop.hpp"

#include "sarslide/errors.hpp"

namespace sarslide::trainer {

std::size_t best_epoch(std::span<const double> history) {
  if (history.empty()) throw DataError("early stopping needs a nonempty history");
  std::size_t best = 0;
  for (std::size_t i = 1; i < history.size(); ++i) {
    if (history[i] < history[best]) best = i;
  }
  return best;
}

bool early_stop_check(std::span<const double> history, int patience) {
  const std::size_t best = best_epoch(history);
  return history.size() - 1 - best >= static_cast<std::size_t>(patience);
}

}  // namespace sarslide::trainer

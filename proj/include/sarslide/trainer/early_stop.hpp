#pragma once

#include <cstddef>
#include <span>

namespace sarslide::trainer {

/// Epoch index of the first minimum.
std::size_t best_epoch(std::span<const double> history);

/// True once `patience` epochs have passed without beating the best value,
/// i.e. when len - 1 - best_epoch >= patience.
bool early_stop_check(std::span<const double> history, int patience);

}  // namespace sarslide::trainer

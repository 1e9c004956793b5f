#include "sarslide/metrics/counts.hpp"

#include "sarslide/errors.hpp"

namespace sarslide::metrics {

namespace {

std::int64_t binary_sum(std::span<const std::uint8_t> mask, const char* what) {
  std::int64_t s = 0;
  for (auto v : mask) {
    if (v > 1) throw DataError(std::string(what) + " mask not binary");
    s += v;
  }
  return s;
}

}  // namespace

CountError count_errors(std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> truth) {
  if (predicted.size() != truth.size()) throw DataError("count_errors: mask sizes differ");
  const std::int64_t diff = binary_sum(predicted, "predicted") - binary_sum(truth, "true");
  return {diff < 0 ? -diff : diff, diff};
}

std::vector<std::uint8_t> binarize(std::span<const float> probs, double threshold) {
  std::vector<std::uint8_t> out(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) out[i] = static_cast<double>(probs[i]) > threshold ? 1 : 0;
  return out;
}

ChipCountRecord count_record(const std::string& chip_id, std::span<const std::uint8_t> predicted,
                             std::span<const std::uint8_t> truth) {
  const CountError e = count_errors(predicted, truth);
  ChipCountRecord r;
  r.chip_id = chip_id;
  r.delta_l1 = e.delta_l1;
  r.delta_count = e.delta_count;
  r.true_pixels = binary_sum(truth, "true");
  r.predicted_pixels = binary_sum(predicted, "predicted");
  return r;
}

}  // namespace sarslide::metrics

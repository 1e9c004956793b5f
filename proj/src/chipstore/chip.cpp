#include "sarslide/chipstore/chip.hpp"

#include <cmath>
#include <numeric>
#include <unordered_set>

#include "sarslide/errors.hpp"

namespace sarslide::chipstore {

std::int64_t Chip::mask_sum() const {
  return std::accumulate(mask.begin(), mask.end(), std::int64_t{0});
}

void Chip::validate() const {
  if (chip_id.empty()) throw FormatError("chip_id: empty");
  const int n = size();
  const std::vector<int> expected{kChannels, n, n};
  if (n <= 0 || pre.shape() != expected) {
    throw FormatError("pre: shape " + pre.shape_string() + " is not (2,S,S)");
  }
  if (post.shape() != expected) {
    throw FormatError("post: shape " + post.shape_string() + " does not match pre " + pre.shape_string());
  }
  if (mask.size() != static_cast<std::size_t>(n) * n) {
    throw FormatError("mask: size " + std::to_string(mask.size()) + " does not match chip size");
  }
  for (const Tensor* t : {&pre, &post}) {
    for (float v : t->values()) {
      if (!std::isfinite(v) || v < 0.0f) {
        throw FormatError(std::string(t == &pre ? "pre" : "post") + ": amplitude not finite and nonnegative");
      }
    }
  }
  for (std::uint8_t m : mask) {
    if (m > 1) throw FormatError("mask not binary");
  }
  if (has_landslide != (mask_sum() > 0)) {
    throw FormatError("has_landslide inconsistent with mask");
  }
}

Chip make_chip(std::string chip_id, Tensor pre, Tensor post, std::vector<std::uint8_t> mask) {
  Chip chip{std::move(chip_id), std::move(pre), std::move(post), std::move(mask), false};
  chip.has_landslide = chip.mask_sum() > 0;
  return chip;
}

std::size_t ChipSet::positives() const noexcept {
  std::size_t n = 0;
  for (const auto& c : chips) n += c.has_landslide ? 1 : 0;
  return n;
}

void ChipSet::validate() const {
  std::unordered_set<std::string> ids;
  for (const auto& c : chips) {
    c.validate();
    if (!ids.insert(c.chip_id).second) throw FormatError("chip_id: duplicate '" + c.chip_id + "'");
  }
}

bool chips_bitwise_equal(const Chip& a, const Chip& b) {
  return a.chip_id == b.chip_id && a.has_landslide == b.has_landslide && a.mask == b.mask &&
         bitwise_equal(a.pre, b.pre) && bitwise_equal(a.post, b.post);
}

}  // namespace sarslide::chipstore

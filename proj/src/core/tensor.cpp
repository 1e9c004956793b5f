#include "sarslide/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>
#include <stdexcept>

#include "sarslide/errors.hpp"

namespace sarslide {

const char* error_code_name(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::config:
      return "CONFIG";
    case ErrorKind::data:
      return "DATA";
    case ErrorKind::training:
      return "TRAINING";
  }
  return "UNKNOWN";
}

std::size_t shape_volume(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d < 0) throw std::invalid_argument("negative tensor dimension");
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

Tensor::Tensor(std::vector<int> shape, float fill)
    : shape_(std::move(shape)), data_(shape_volume(shape_), fill) {}

Tensor::Tensor(std::vector<int> shape, std::vector<float> data)
    : shape_(std::move(shape)), data_(data.begin(), data.end()) {
  if (data_.size() != shape_volume(shape_)) {
    throw std::invalid_argument("tensor data size " + std::to_string(data_.size()) +
                                " does not match shape " + shape_string());
  }
}

void Tensor::fill(float value) noexcept { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

std::string Tensor::shape_string() const {
  std::ostringstream out;
  out << '(';
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) out << ',';
    out << shape_[i];
  }
  out << ')';
  return out.str();
}

bool bitwise_equal(const Tensor& a, const Tensor& b) noexcept {
  if (a.shape() != b.shape()) return false;
  if (a.size() == 0) return true;
  return std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
}

}  // namespace sarslide

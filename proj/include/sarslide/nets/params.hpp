#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "sarslide/tensor.hpp"

namespace sarslide::nets {

/// Ordered, named collection of parameter tensors. Insertion order is the
/// serialization and optimizer order.
class ParamStore {
 public:
  Tensor& add(const std::string& name, std::vector<int> shape);

  bool contains(std::string_view name) const;
  const Tensor& at(std::string_view name) const;
  Tensor& at(std::string_view name);

  std::size_t entries() const noexcept { return tensors_.size(); }
  const std::string& name(std::size_t i) const { return names_.at(i); }
  const Tensor& tensor(std::size_t i) const { return tensors_.at(i); }
  Tensor& tensor(std::size_t i) { return tensors_.at(i); }

  /// Total number of scalar parameters.
  std::size_t scalar_count() const noexcept;

  ParamStore zeros_like() const;
  void zero();

  bool bitwise_equal(const ParamStore& other) const;
  std::string sha256() const;

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> tensors_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

std::size_t count_params(const ParamStore& params);

/// Uniform(-bound, bound) with bound = gain * sqrt(3 / fan_in); gain sqrt(2)
/// gives the He-uniform range for ReLU layers.
void init_fan_in_uniform(Tensor& weights, int fan_in, double gain, std::mt19937_64& rng);

}  // namespace sarslide::nets

#include "sarslide/nets/params.hpp"

#include <cmath>
#include <stdexcept>

#include "sarslide/io_util.hpp"

namespace sarslide::nets {

Tensor& ParamStore::add(const std::string& name, std::vector<int> shape) {
  if (index_.contains(name)) throw std::invalid_argument("duplicate parameter " + name);
  index_.emplace(name, tensors_.size());
  names_.push_back(name);
  tensors_.emplace_back(std::move(shape));
  return tensors_.back();
}

bool ParamStore::contains(std::string_view name) const { return index_.find(name) != index_.end(); }

const Tensor& ParamStore::at(std::string_view name) const {
  const auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("no parameter named " + std::string(name));
  return tensors_[it->second];
}

Tensor& ParamStore::at(std::string_view name) {
  return const_cast<Tensor&>(static_cast<const ParamStore&>(*this).at(name));
}

std::size_t ParamStore::scalar_count() const noexcept {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += t.size();
  return n;
}

ParamStore ParamStore::zeros_like() const {
  ParamStore out;
  for (std::size_t i = 0; i < tensors_.size(); ++i) out.add(names_[i], tensors_[i].shape());
  return out;
}

void ParamStore::zero() {
  for (auto& t : tensors_) t.fill(0.0f);
}

bool ParamStore::bitwise_equal(const ParamStore& other) const {
  if (names_ != other.names_) return false;
  for (std::size_t i = 0; i < tensors_.size(); ++i) {
    if (!sarslide::bitwise_equal(tensors_[i], other.tensors_[i])) return false;
  }
  return true;
}

std::string ParamStore::sha256() const {
  Sha256 h;
  for (std::size_t i = 0; i < tensors_.size(); ++i) {
    h.update(names_[i]);
    h.update(tensors_[i].values());
  }
  return h.hex_digest();
}

std::size_t count_params(const ParamStore& params) { return params.scalar_count(); }

void init_fan_in_uniform(Tensor& weights, int fan_in, double gain, std::mt19937_64& rng) {
  const double bound = gain * std::sqrt(3.0 / static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (float& w : weights.values()) w = static_cast<float>(dist(rng));
}

}  // namespace sarslide::nets

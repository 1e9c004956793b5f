#pragma once

#include <random>
#include <string>

#include "sarslide/nets/graph.hpp"
#include "sarslide/nets/params.hpp"

namespace sarslide::nets::detail {

inline constexpr double kReluGain = 1.4142135623730951;

inline void add_conv(ParamStore& ps, const std::string& name, int out, int in, int k, double gain,
                     std::mt19937_64& rng) {
  init_fan_in_uniform(ps.add(name + ".w", {out, in, k, k}), in * k * k, gain, rng);
  ps.add(name + ".b", {out});
}

/// Binds named parameters into a graph, wiring gradient buffers when given.
struct Binder {
  Graph& g;
  const ParamStore& ps;
  ParamStore* grads;

  Graph::Var operator()(const std::string& name) const {
    return g.param(ps.at(name), grads != nullptr ? &grads->at(name) : nullptr);
  }

  Graph::Var conv(Graph::Var x, const std::string& name, int stride, int pad) const {
    return g.conv2d(x, (*this)(name + ".w"), (*this)(name + ".b"), stride, pad);
  }
};

}  // namespace sarslide::nets::detail

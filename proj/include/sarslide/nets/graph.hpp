#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sarslide/tensor.hpp"

namespace sarslide::nets {

/// Define-by-run tape for the handful of ops the two networks use.
///
/// Values are computed eagerly when a node is added. `backward` walks the
/// tape in reverse and accumulates gradients into the buffers bound to
/// parameter leaves. Leaves bound with a null gradient buffer are frozen:
/// no gradient flows into them and, if nothing upstream needs it, no
/// gradient is computed for their consumers' inputs either.
class Graph {
 public:
  using Var = std::size_t;

  /// Leaf holding a copy of `value`.
  Var input(Tensor value, bool requires_grad = false);
  /// Leaf referencing `value`, which must outlive the graph.
  Var input_ref(const Tensor& value, bool requires_grad = false);
  /// Parameter leaf; gradients accumulate into `*grad` (null = frozen).
  Var param(const Tensor& value, Tensor* grad);

  Var conv2d(Var x, Var w, Var b, int stride, int pad);
  Var relu(Var x);
  Var add(Var a, Var b);
  /// Concatenation along the leading axis.
  Var concat(std::span<const Var> parts);
  /// Nearest-neighbour 2x upsampling of (C, H, W).
  Var upsample2x(Var x);
  /// Spatial mean of (C, H, W) -> (C).
  Var mean_pool(Var x);
  /// y = W x + b with x: (n), W: (o, n), b: (o).
  Var linear(Var x, Var w, Var b);

  const Tensor& value(Var v) const;
  bool requires_grad(Var v) const { return nodes_.at(v).requires_grad; }

  /// Seeds d(loss)/d(value(root)) and propagates.
  void backward(Var root, const Tensor& seed);

  /// Gradient reaching a leaf created with requires_grad (after backward).
  const Tensor& grad(Var v) const;

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  enum class Op { leaf, conv2d, relu, add, concat, upsample2x, mean_pool, linear };

  struct Node {
    Op op = Op::leaf;
    std::vector<Var> inputs;
    int stride = 1;
    int pad = 0;
    Tensor owned;
    const Tensor* ref = nullptr;
    Tensor* param_grad = nullptr;
    bool requires_grad = false;
    Tensor grad;
  };

  Var push(Node node);
  Tensor& grad_buffer(Var v);
  void backprop_node(Var v);

  std::vector<Node> nodes_;
};

}  // namespace sarslide::nets

#include "sarslide/nets/graph.hpp"

#include <algorithm>
#include <stdexcept>

#include "sarslide/nets/ops.hpp"

namespace sarslide::nets {

Graph::Var Graph::push(Node node) {
  nodes_.push_back(std::move(node));
  return nodes_.size() - 1;
}

const Tensor& Graph::value(Var v) const {
  const Node& n = nodes_.at(v);
  return n.ref != nullptr ? *n.ref : n.owned;
}

Graph::Var Graph::input(Tensor value, bool requires_grad) {
  Node n;
  n.owned = std::move(value);
  n.requires_grad = requires_grad;
  return push(std::move(n));
}

Graph::Var Graph::input_ref(const Tensor& value, bool requires_grad) {
  Node n;
  n.ref = &value;
  n.requires_grad = requires_grad;
  return push(std::move(n));
}

Graph::Var Graph::param(const Tensor& value, Tensor* grad) {
  if (grad != nullptr && !grad->same_shape(value)) throw std::invalid_argument("param: gradient shape mismatch");
  Node n;
  n.ref = &value;
  n.param_grad = grad;
  n.requires_grad = grad != nullptr;
  return push(std::move(n));
}

Graph::Var Graph::conv2d(Var x, Var w, Var b, int stride, int pad) {
  Node n;
  n.op = Op::conv2d;
  n.inputs = {x, w, b};
  n.stride = stride;
  n.pad = pad;
  n.owned = nets::conv2d(value(x), value(w), value(b), stride, pad);
  n.requires_grad = requires_grad(x) || requires_grad(w) || requires_grad(b);
  return push(std::move(n));
}

Graph::Var Graph::relu(Var x) {
  Node n;
  n.op = Op::relu;
  n.inputs = {x};
  n.owned = value(x);
  for (float& v : n.owned.values()) v = v > 0.0f ? v : 0.0f;
  n.requires_grad = requires_grad(x);
  return push(std::move(n));
}

Graph::Var Graph::add(Var a, Var b) {
  const Tensor& va = value(a);
  const Tensor& vb = value(b);
  if (!va.same_shape(vb)) throw std::invalid_argument("add: shape mismatch " + va.shape_string() + vb.shape_string());
  Node n;
  n.op = Op::add;
  n.inputs = {a, b};
  n.owned = va;
  for (std::size_t i = 0; i < vb.size(); ++i) n.owned[i] += vb[i];
  n.requires_grad = requires_grad(a) || requires_grad(b);
  return push(std::move(n));
}

Graph::Var Graph::concat(std::span<const Var> parts) {
  if (parts.empty()) throw std::invalid_argument("concat: no inputs");
  std::vector<int> shape = value(parts[0]).shape();
  int lead = 0;
  for (Var p : parts) {
    const auto& s = value(p).shape();
    if (s.size() != shape.size() || !std::equal(s.begin() + 1, s.end(), shape.begin() + 1)) {
      throw std::invalid_argument("concat: trailing shapes differ");
    }
    lead += s[0];
  }
  shape[0] = lead;
  Node n;
  n.op = Op::concat;
  n.inputs.assign(parts.begin(), parts.end());
  n.owned = Tensor(shape);
  std::size_t offset = 0;
  for (Var p : parts) {
    const Tensor& v = value(p);
    std::copy(v.values().begin(), v.values().end(), n.owned.values().begin() + static_cast<std::ptrdiff_t>(offset));
    offset += v.size();
    n.requires_grad = n.requires_grad || requires_grad(p);
  }
  return push(std::move(n));
}

Graph::Var Graph::upsample2x(Var x) {
  const Tensor& v = value(x);
  if (v.rank() != 3) throw std::invalid_argument("upsample2x: expected (C,H,W)");
  const int c = v.dim(0), h = v.dim(1), w = v.dim(2);
  Node n;
  n.op = Op::upsample2x;
  n.inputs = {x};
  n.owned = Tensor({c, 2 * h, 2 * w});
  for (int ch = 0; ch < c; ++ch) {
    for (int y = 0; y < 2 * h; ++y) {
      for (int xx = 0; xx < 2 * w; ++xx) n.owned.at(ch, y, xx) = v.at(ch, y / 2, xx / 2);
    }
  }
  n.requires_grad = requires_grad(x);
  return push(std::move(n));
}

Graph::Var Graph::mean_pool(Var x) {
  const Tensor& v = value(x);
  if (v.rank() != 3) throw std::invalid_argument("mean_pool: expected (C,H,W)");
  const int c = v.dim(0);
  const std::size_t plane = static_cast<std::size_t>(v.dim(1)) * v.dim(2);
  Node n;
  n.op = Op::mean_pool;
  n.inputs = {x};
  n.owned = Tensor({c});
  for (int ch = 0; ch < c; ++ch) {
    double acc = 0.0;
    for (std::size_t i = 0; i < plane; ++i) acc += v[ch * plane + i];
    n.owned[static_cast<std::size_t>(ch)] = static_cast<float>(acc / static_cast<double>(plane));
  }
  n.requires_grad = requires_grad(x);
  return push(std::move(n));
}

Graph::Var Graph::linear(Var x, Var w, Var b) {
  const Tensor& vx = value(x);
  const Tensor& vw = value(w);
  const Tensor& vb = value(b);
  if (vx.rank() != 1 || vw.rank() != 2 || vw.dim(1) != vx.dim(0) || vb.rank() != 1 || vb.dim(0) != vw.dim(0)) {
    throw std::invalid_argument("linear: incompatible shapes");
  }
  const int o = vw.dim(0), in = vw.dim(1);
  Node n;
  n.op = Op::linear;
  n.inputs = {x, w, b};
  n.owned = Tensor({o});
  for (int r = 0; r < o; ++r) {
    double acc = vb[static_cast<std::size_t>(r)];
    for (int k = 0; k < in; ++k) acc += static_cast<double>(vw[static_cast<std::size_t>(r) * in + k]) * vx[static_cast<std::size_t>(k)];
    n.owned[static_cast<std::size_t>(r)] = static_cast<float>(acc);
  }
  n.requires_grad = requires_grad(x) || requires_grad(w) || requires_grad(b);
  return push(std::move(n));
}

Tensor& Graph::grad_buffer(Var v) {
  Node& n = nodes_[v];
  if (n.param_grad != nullptr) return *n.param_grad;
  if (n.grad.empty() && !value(v).empty()) n.grad = Tensor(value(v).shape());
  return n.grad;
}

const Tensor& Graph::grad(Var v) const {
  const Node& n = nodes_.at(v);
  if (!n.requires_grad) throw std::logic_error("grad: node does not require grad");
  return n.param_grad != nullptr ? *n.param_grad : n.grad;
}

void Graph::backward(Var root, const Tensor& seed) {
  if (!value(root).same_shape(seed)) throw std::invalid_argument("backward: seed shape mismatch");
  if (!requires_grad(root)) return;
  for (auto& n : nodes_) n.grad = Tensor();
  Tensor& root_grad = grad_buffer(root);
  for (std::size_t i = 0; i < seed.size(); ++i) root_grad[i] += seed[i];
  for (Var v = root + 1; v-- > 0;) {
    Node& n = nodes_[v];
    if (!n.requires_grad || n.grad.empty()) continue;
    backprop_node(v);
  }
}

void Graph::backprop_node(Var v) {
  Node& n = nodes_[v];
  const Tensor& g = n.grad;
  auto wants = [&](Var in) { return nodes_[in].requires_grad; };
  switch (n.op) {
    case Op::leaf:
      break;
    case Op::conv2d: {
      const Var x = n.inputs[0], w = n.inputs[1], b = n.inputs[2];
      conv2d_backward(value(x), value(w), g, n.stride, n.pad, wants(x) ? &grad_buffer(x) : nullptr,
                      wants(w) ? &grad_buffer(w) : nullptr, wants(b) ? &grad_buffer(b) : nullptr);
      break;
    }
    case Op::relu: {
      const Var x = n.inputs[0];
      if (!wants(x)) break;
      Tensor& gx = grad_buffer(x);
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (n.owned[i] > 0.0f) gx[i] += g[i];
      }
      break;
    }
    case Op::add:
      for (Var in : n.inputs) {
        if (!wants(in)) continue;
        Tensor& gi = grad_buffer(in);
        for (std::size_t i = 0; i < g.size(); ++i) gi[i] += g[i];
      }
      break;
    case Op::concat: {
      std::size_t offset = 0;
      for (Var in : n.inputs) {
        const std::size_t len = value(in).size();
        if (wants(in)) {
          Tensor& gi = grad_buffer(in);
          for (std::size_t i = 0; i < len; ++i) gi[i] += g[offset + i];
        }
        offset += len;
      }
      break;
    }
    case Op::upsample2x: {
      const Var x = n.inputs[0];
      if (!wants(x)) break;
      Tensor& gx = grad_buffer(x);
      const int c = gx.dim(0), h = gx.dim(1), w = gx.dim(2);
      for (int ch = 0; ch < c; ++ch) {
        for (int y = 0; y < 2 * h; ++y) {
          for (int xx = 0; xx < 2 * w; ++xx) gx.at(ch, y / 2, xx / 2) += g.at(ch, y, xx);
        }
      }
      break;
    }
    case Op::mean_pool: {
      const Var x = n.inputs[0];
      if (!wants(x)) break;
      Tensor& gx = grad_buffer(x);
      const std::size_t plane = static_cast<std::size_t>(gx.dim(1)) * gx.dim(2);
      for (int ch = 0; ch < gx.dim(0); ++ch) {
        const float share = g[static_cast<std::size_t>(ch)] / static_cast<float>(plane);
        for (std::size_t i = 0; i < plane; ++i) gx[ch * plane + i] += share;
      }
      break;
    }
    case Op::linear: {
      const Var x = n.inputs[0], w = n.inputs[1], b = n.inputs[2];
      const Tensor& vx = value(x);
      const Tensor& vw = value(w);
      const int o = vw.dim(0), in = vw.dim(1);
      if (wants(b)) {
        Tensor& gb = grad_buffer(b);
        for (int r = 0; r < o; ++r) gb[static_cast<std::size_t>(r)] += g[static_cast<std::size_t>(r)];
      }
      if (wants(w)) {
        Tensor& gw = grad_buffer(w);
        for (int r = 0; r < o; ++r) {
          for (int k = 0; k < in; ++k) gw[static_cast<std::size_t>(r) * in + k] += g[static_cast<std::size_t>(r)] * vx[static_cast<std::size_t>(k)];
        }
      }
      if (wants(x)) {
        Tensor& gx = grad_buffer(x);
        for (int r = 0; r < o; ++r) {
          for (int k = 0; k < in; ++k) gx[static_cast<std::size_t>(k)] += vw[static_cast<std::size_t>(r) * in + k] * g[static_cast<std::size_t>(r)];
        }
      }
      break;
    }
  }
  // Intermediate gradients are dead once propagated; leaves keep theirs for grad().
  if (n.op != Op::leaf) n.grad = Tensor();
}

}  // namespace sarslide::nets

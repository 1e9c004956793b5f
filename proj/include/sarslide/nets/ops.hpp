#pragma once

#include "sarslide/tensor.hpp"

namespace sarslide::nets {

/// 2-D cross-correlation. x: (C, H, W), w: (O, C, k, k), b: (O) or empty.
/// Output (O, Ho, Wo) with Ho = (H + 2*pad - k) / stride + 1.
Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, int stride, int pad);

/// Accumulates (+=) gradients of conv2d. Any of dx, dw, db may be null.
void conv2d_backward(const Tensor& x, const Tensor& w, const Tensor& dout, int stride, int pad, Tensor* dx,
                     Tensor* dw, Tensor* db);

}  // namespace sarslide::nets

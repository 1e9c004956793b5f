#include <Eigen/Core>

#include <cstring>
#include <stdexcept>
#include <vector>

#include "sarslide/nets/ops.hpp"

namespace sarslide::nets {

namespace {

using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

struct Geometry {
  int c, h, w, o, k, stride, pad, ho, wo;

  std::size_t col_rows() const { return static_cast<std::size_t>(c) * k * k; }
  std::size_t col_cols() const { return static_cast<std::size_t>(ho) * wo; }
  bool is_pointwise() const { return k == 1 && stride == 1 && pad == 0; }
};

Geometry geometry(const Tensor& x, const Tensor& w, int stride, int pad) {
  if (x.rank() != 3 || w.rank() != 4 || w.dim(1) != x.dim(0) || w.dim(2) != w.dim(3)) {
    throw std::invalid_argument("conv2d: incompatible shapes x" + x.shape_string() + " w" + w.shape_string());
  }
  Geometry g{x.dim(0), x.dim(1), x.dim(2), w.dim(0), w.dim(2), stride, pad, 0, 0};
  g.ho = (g.h + 2 * pad - g.k) / stride + 1;
  g.wo = (g.w + 2 * pad - g.k) / stride + 1;
  if (g.ho <= 0 || g.wo <= 0) throw std::invalid_argument("conv2d: empty output");
  return g;
}

// Scratch reused across calls on the same thread.
FloatBuffer& scratch(int slot, std::size_t n) {
  thread_local FloatBuffer buffers[2];
  auto& b = buffers[slot];
  if (b.size() < n) b.resize(n);
  return b;
}

void im2col(const float* x, const Geometry& g, float* col) {
  const std::size_t cols = g.col_cols();
  for (int c = 0; c < g.c; ++c) {
    const float* plane = x + static_cast<std::size_t>(c) * g.h * g.w;
    for (int ky = 0; ky < g.k; ++ky) {
      for (int kx = 0; kx < g.k; ++kx) {
        float* row = col + ((static_cast<std::size_t>(c) * g.k + ky) * g.k + kx) * cols;
        for (int oy = 0; oy < g.ho; ++oy) {
          const int iy = oy * g.stride - g.pad + ky;
          float* dst = row + static_cast<std::size_t>(oy) * g.wo;
          if (iy < 0 || iy >= g.h) {
            std::memset(dst, 0, sizeof(float) * g.wo);
            continue;
          }
          const float* src = plane + static_cast<std::size_t>(iy) * g.w;
          if (g.stride == 1) {
            const int shift = kx - g.pad;
            for (int ox = 0; ox < g.wo; ++ox) {
              const int ix = ox + shift;
              dst[ox] = (ix >= 0 && ix < g.w) ? src[ix] : 0.0f;
            }
          } else {
            for (int ox = 0; ox < g.wo; ++ox) {
              const int ix = ox * g.stride - g.pad + kx;
              dst[ox] = (ix >= 0 && ix < g.w) ? src[ix] : 0.0f;
            }
          }
        }
      }
    }
  }
}

void col2im_add(const float* col, const Geometry& g, float* dx) {
  const std::size_t cols = g.col_cols();
  for (int c = 0; c < g.c; ++c) {
    float* plane = dx + static_cast<std::size_t>(c) * g.h * g.w;
    for (int ky = 0; ky < g.k; ++ky) {
      for (int kx = 0; kx < g.k; ++kx) {
        const float* row = col + ((static_cast<std::size_t>(c) * g.k + ky) * g.k + kx) * cols;
        for (int oy = 0; oy < g.ho; ++oy) {
          const int iy = oy * g.stride - g.pad + ky;
          if (iy < 0 || iy >= g.h) continue;
          const float* src = row + static_cast<std::size_t>(oy) * g.wo;
          float* dst = plane + static_cast<std::size_t>(iy) * g.w;
          for (int ox = 0; ox < g.wo; ++ox) {
            const int ix = ox * g.stride - g.pad + kx;
            if (ix >= 0 && ix < g.w) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, int stride, int pad) {
  const Geometry g = geometry(x, w, stride, pad);
  if (!b.empty() && (b.rank() != 1 || b.dim(0) != g.o)) throw std::invalid_argument("conv2d: bad bias shape");
  Tensor out({g.o, g.ho, g.wo});
  const float* col_ptr = x.data();
  if (!g.is_pointwise()) {
    auto& col = scratch(0, g.col_rows() * g.col_cols());
    im2col(x.data(), g, col.data());
    col_ptr = col.data();
  }
  ConstMapMat wm(w.data(), g.o, static_cast<Eigen::Index>(g.col_rows()));
  ConstMapMat cm(col_ptr, static_cast<Eigen::Index>(g.col_rows()), static_cast<Eigen::Index>(g.col_cols()));
  MapMat om(out.data(), g.o, static_cast<Eigen::Index>(g.col_cols()));
  om.noalias() = wm * cm;
  if (!b.empty()) {
    Eigen::Map<const Eigen::VectorXf> bv(b.data(), g.o);
    om.colwise() += bv;
  }
  return out;
}

void conv2d_backward(const Tensor& x, const Tensor& w, const Tensor& dout, int stride, int pad, Tensor* dx,
                     Tensor* dw, Tensor* db) {
  const Geometry g = geometry(x, w, stride, pad);
  if (dout.shape() != std::vector<int>{g.o, g.ho, g.wo}) throw std::invalid_argument("conv2d_backward: bad dout");
  ConstMapMat dm(dout.data(), g.o, static_cast<Eigen::Index>(g.col_cols()));
  if (db != nullptr) {
    Eigen::Map<Eigen::VectorXf> dbv(db->data(), g.o);
    dbv += dm.rowwise().sum();
  }
  const Eigen::Index rows = static_cast<Eigen::Index>(g.col_rows());
  const Eigen::Index cols = static_cast<Eigen::Index>(g.col_cols());
  if (dw != nullptr) {
    const float* col_ptr = x.data();
    if (!g.is_pointwise()) {
      auto& col = scratch(0, g.col_rows() * g.col_cols());
      im2col(x.data(), g, col.data());
      col_ptr = col.data();
    }
    ConstMapMat cm(col_ptr, rows, cols);
    MapMat dwm(dw->data(), g.o, rows);
    dwm.noalias() += dm * cm.transpose();
  }
  if (dx != nullptr) {
    ConstMapMat wm(w.data(), g.o, rows);
    if (g.is_pointwise()) {
      MapMat dxm(dx->data(), rows, cols);
      dxm.noalias() += wm.transpose() * dm;
    } else {
      auto& dcol = scratch(1, g.col_rows() * g.col_cols());
      MapMat dcm(dcol.data(), rows, cols);
      dcm.noalias() = wm.transpose() * dm;
      col2im_add(dcol.data(), g, dx->data());
    }
  }
}

}  // namespace sarslide::nets

#pragma once

#include <string>
#include <vector>

#include "sarslide/chipstore/chip.hpp"

namespace sarslide::chipstore {

/// Half-open pixel window [row0, row0 + size) x [col0, col0 + size).
struct Window {
  int row0 = 0;
  int col0 = 0;
  int size = 0;

  bool contains(int row, int col) const noexcept {
    return row >= row0 && row < row0 + size && col >= col0 && col < col0 + size;
  }
};

struct PixelPoint {
  int row = 0;
  int col = 0;
};

/// Windows of `chip_size` on a `stride` grid; windows crossing the raster edge
/// are dropped.
std::vector<Window> chip_windows(int height, int width, int chip_size, int stride);

/// Cuts co-registered pre/post rasters (2, H, W) and a binary label raster
/// ((H, W) or (1, H, W)) into chips. Ids are `<prefix>_r<row0>_c<col0>`.
ChipSet extract_chips_from_raster(const Tensor& pre_raster, const Tensor& post_raster,
                                  const Tensor& label_raster, int chip_size = kDefaultChipSize,
                                  int stride = kDefaultChipSize, const std::string& id_prefix = "chip");

/// Chip-level flags from centroid point labels: true iff a point falls inside
/// the window. Points outside the raster are rejected with DataError.
std::vector<bool> flags_from_point_labels(const std::vector<PixelPoint>& points,
                                          const std::vector<Window>& windows, int raster_height,
                                          int raster_width);

/// Single-pixel label raster (1, H, W) marking each point.
Tensor rasterize_points(const std::vector<PixelPoint>& points, int height, int width);

/// Elementwise mean of co-registered acquisitions.
Tensor average_revisits(const std::vector<Tensor>& images);

}  // namespace sarslide::chipstore

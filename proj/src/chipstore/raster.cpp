#include "sarslide/chipstore/raster.hpp"

#include "sarslide/errors.hpp"

namespace sarslide::chipstore {

std::vector<Window> chip_windows(int height, int width, int chip_size, int stride) {
  if (chip_size < 1) throw ConfigError("chip_size must be >= 1");
  if (stride < 1) throw ConfigError("stride must be >= 1");
  std::vector<Window> windows;
  for (int r = 0; r + chip_size <= height; r += stride) {
    for (int c = 0; c + chip_size <= width; c += stride) windows.push_back({r, c, chip_size});
  }
  return windows;
}

ChipSet extract_chips_from_raster(const Tensor& pre_raster, const Tensor& post_raster,
                                  const Tensor& label_raster, int chip_size, int stride,
                                  const std::string& id_prefix) {
  if (pre_raster.rank() != 3 || pre_raster.dim(0) != kChannels) {
    throw DataError("pre raster must have shape (2,H,W), got " + pre_raster.shape_string());
  }
  if (!pre_raster.same_shape(post_raster)) {
    throw DataError("shape mismatch: pre " + pre_raster.shape_string() + " vs post " + post_raster.shape_string());
  }
  const int height = pre_raster.dim(1);
  const int width = pre_raster.dim(2);
  const bool label_ok = (label_raster.rank() == 2 && label_raster.dim(0) == height && label_raster.dim(1) == width) ||
                        (label_raster.rank() == 3 && label_raster.dim(0) == 1 && label_raster.dim(1) == height &&
                         label_raster.dim(2) == width);
  if (!label_ok) {
    throw DataError("shape mismatch: labels " + label_raster.shape_string() + " vs rasters " + pre_raster.shape_string());
  }
  for (float v : label_raster.values()) {
    if (v != 0.0f && v != 1.0f) throw DataError("label raster not binary");
  }

  ChipSet set;
  set.provenance = "raster:" + id_prefix;
  for (const Window& w : chip_windows(height, width, chip_size, stride)) {
    Tensor pre({kChannels, chip_size, chip_size});
    Tensor post({kChannels, chip_size, chip_size});
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(chip_size) * chip_size);
    for (int ch = 0; ch < kChannels; ++ch) {
      for (int y = 0; y < chip_size; ++y) {
        for (int x = 0; x < chip_size; ++x) {
          pre.at(ch, y, x) = pre_raster.at(ch, w.row0 + y, w.col0 + x);
          post.at(ch, y, x) = post_raster.at(ch, w.row0 + y, w.col0 + x);
        }
      }
    }
    for (int y = 0; y < chip_size; ++y) {
      for (int x = 0; x < chip_size; ++x) {
        const std::size_t src = static_cast<std::size_t>(w.row0 + y) * width + (w.col0 + x);
        mask[static_cast<std::size_t>(y) * chip_size + x] = label_raster[src] != 0.0f ? 1 : 0;
      }
    }
    set.chips.push_back(make_chip(id_prefix + "_r" + std::to_string(w.row0) + "_c" + std::to_string(w.col0),
                                  std::move(pre), std::move(post), std::move(mask)));
  }
  return set;
}

std::vector<bool> flags_from_point_labels(const std::vector<PixelPoint>& points, const std::vector<Window>& windows,
                                          int raster_height, int raster_width) {
  for (const auto& p : points) {
    if (p.row < 0 || p.row >= raster_height || p.col < 0 || p.col >= raster_width) {
      throw DataError("point (" + std::to_string(p.row) + "," + std::to_string(p.col) + ") outside raster");
    }
  }
  std::vector<bool> flags(windows.size(), false);
  for (std::size_t i = 0; i < windows.size(); ++i) {
    for (const auto& p : points) {
      if (windows[i].contains(p.row, p.col)) {
        flags[i] = true;
        break;
      }
    }
  }
  return flags;
}

Tensor rasterize_points(const std::vector<PixelPoint>& points, int height, int width) {
  Tensor labels({1, height, width});
  for (const auto& p : points) {
    if (p.row < 0 || p.row >= height || p.col < 0 || p.col >= width) {
      throw DataError("point (" + std::to_string(p.row) + "," + std::to_string(p.col) + ") outside raster");
    }
    labels.at(0, p.row, p.col) = 1.0f;
  }
  return labels;
}

Tensor average_revisits(const std::vector<Tensor>& images) {
  if (images.empty()) throw DataError("average_revisits: empty image list");
  for (const auto& img : images) {
    if (!img.same_shape(images.front())) {
      throw DataError("average_revisits: shape mismatch " + img.shape_string() + " vs " +
                      images.front().shape_string());
    }
  }
  if (images.size() == 1) return images.front();
  std::vector<double> acc(images.front().size(), 0.0);
  for (const auto& img : images) {
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += img[i];
  }
  Tensor out(images.front().shape());
  const double n = static_cast<double>(images.size());
  for (std::size_t i = 0; i < acc.size(); ++i) out[i] = static_cast<float>(acc[i] / n);
  return out;
}

}  // namespace sarslide::chipstore

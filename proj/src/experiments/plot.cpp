#include "sarslide/experiments/plot.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>

#include "sarslide/errors.hpp"

namespace sarslide::experiments {

namespace {

struct Rgb {
  std::uint8_t r, g, b;
};

constexpr Rgb kWhite{255, 255, 255};
constexpr Rgb kBlack{0, 0, 0};
constexpr Rgb kGrid{225, 225, 225};
constexpr std::array<Rgb, 3> kPalette = {Rgb{31, 119, 180}, Rgb{214, 39, 40}, Rgb{44, 160, 44}};

using Glyph = std::array<std::uint8_t, 7>;

const std::map<char, Glyph>& font() {
  static const std::map<char, Glyph> f = {
      {' ', {0, 0, 0, 0, 0, 0, 0}},
      {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}},
      {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
      {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}},
      {'3', {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}},
      {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}},
      {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
      {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}},
      {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
      {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}},
      {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
      {'A', {0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
      {'B', {0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E}},
      {'C', {0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E}},
      {'D', {0x1C, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1C}},
      {'E', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F}},
      {'F', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10}},
      {'G', {0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F}},
      {'H', {0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
      {'I', {0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E}},
      {'J', {0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C}},
      {'K', {0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11}},
      {'L', {0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F}},
      {'M', {0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11}},
      {'N', {0x11, 0x11, 0x19, 0x15, 0x13, 0x11, 0x11}},
      {'O', {0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
      {'P', {0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10}},
      {'Q', {0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D}},
      {'R', {0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11}},
      {'S', {0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E}},
      {'T', {0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04}},
      {'U', {0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
      {'V', {0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04}},
      {'W', {0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A}},
      {'X', {0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11}},
      {'Y', {0x11, 0x11, 0x11, 0x0A, 0x04, 0x04, 0x04}},
      {'Z', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F}},
      {'.', {0, 0, 0, 0, 0, 0x0C, 0x0C}},
      {',', {0, 0, 0, 0, 0x0C, 0x04, 0x08}},
      {'-', {0, 0, 0, 0x1F, 0, 0, 0}},
      {'+', {0, 0x04, 0x04, 0x1F, 0x04, 0x04, 0}},
      {'(', {0x02, 0x04, 0x08, 0x08, 0x08, 0x04, 0x02}},
      {')', {0x08, 0x04, 0x02, 0x02, 0x02, 0x04, 0x08}},
      {'[', {0x0E, 0x08, 0x08, 0x08, 0x08, 0x08, 0x0E}},
      {']', {0x0E, 0x02, 0x02, 0x02, 0x02, 0x02, 0x0E}},
      {'_', {0, 0, 0, 0, 0, 0, 0x1F}},
      {':', {0, 0x0C, 0x0C, 0, 0x0C, 0x0C, 0}},
      {'/', {0, 0x01, 0x02, 0x04, 0x08, 0x10, 0}},
      {'%', {0x18, 0x19, 0x02, 0x04, 0x08, 0x13, 0x03}},
      {'=', {0, 0, 0x1F, 0, 0x1F, 0, 0}},
      {'?', {0x0E, 0x11, 0x01, 0x02, 0x04, 0, 0x04}},
  };
  return f;
}

class Canvas {
 public:
  Canvas(int w, int h) : w_(w), h_(h), px_(static_cast<std::size_t>(w) * h * 3, 255) {}

  void set(int x, int y, Rgb c) {
    if (x < 0 || y < 0 || x >= w_ || y >= h_) return;
    auto* p = &px_[(static_cast<std::size_t>(y) * w_ + x) * 3];
    p[0] = c.r, p[1] = c.g, p[2] = c.b;
  }

  void rect(int x0, int y0, int x1, int y1, Rgb c) {
    for (int y = std::min(y0, y1); y <= std::max(y0, y1); ++y) {
      for (int x = std::min(x0, x1); x <= std::max(x0, x1); ++x) set(x, y, c);
    }
  }

  void line(int x0, int y0, int x1, int y1, Rgb c, int thickness = 1) {
    const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
    const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    const int r = thickness / 2;
    for (;;) {
      rect(x0 - r, y0 - r, x0 + r, y0 + r, c);
      if (x0 == x1 && y0 == y1) break;
      const int e2 = 2 * err;
      if (e2 >= dy) err += dy, x0 += sx;
      if (e2 <= dx) err += dx, y0 += sy;
    }
  }

  static int text_width(const std::string& s, int scale) { return static_cast<int>(s.size()) * 6 * scale; }

  void text(int x, int y, const std::string& s, Rgb c, int scale = 1) {
    for (char ch : s) {
      const char up = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
      auto it = font().find(up);
      const Glyph& g = it != font().end() ? it->second : font().at('?');
      for (int row = 0; row < 7; ++row) {
        for (int col = 0; col < 5; ++col) {
          if (g[row] & (0x10 >> col)) rect(x + col * scale, y + row * scale, x + col * scale + scale - 1,
                                           y + row * scale + scale - 1, c);
        }
      }
      x += 6 * scale;
    }
  }

  void write_png(const std::filesystem::path& path) const {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(w_);
    image.height = static_cast<png_uint_32>(h_);
    image.format = PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&image, path.c_str(), 0, px_.data(), w_ * 3, nullptr)) {
      throw DataError("cannot write " + path.string() + ": " + image.message);
    }
  }

 private:
  int w_, h_;
  std::vector<std::uint8_t> px_;
};

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, std::abs(v) >= 1000.0 ? "%.0f" : "%.3g", v);
  return buf;
}

}  // namespace

void write_chart_png(const Chart& chart, const std::filesystem::path& path) {
  constexpr int W = 720, H = 440, left = 80, right = 170, top = 50, bottom = 60;
  Canvas cv(W, H);
  const int x0 = left, x1 = W - right, y0 = H - bottom, y1 = top;

  double lo = INFINITY, hi = -INFINITY;
  bool gaps = false;
  for (const auto& s : chart.series) {
    for (std::size_t i = 0; i < s.y.size(); ++i) {
      if (!s.y[i]) {
        gaps = true;
        continue;
      }
      const double e = i < s.error.size() ? s.error[i] : 0.0;
      lo = std::min(lo, *s.y[i] - e);
      hi = std::max(hi, *s.y[i] + e);
    }
  }
  if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
  if (hi - lo < 1e-12) lo -= 1.0, hi += 1.0;
  const double pad = 0.08 * (hi - lo);
  lo -= pad, hi += pad;
  auto ypix = [&](double v) { return static_cast<int>(std::lround(y0 - (v - lo) / (hi - lo) * (y0 - y1))); };
  const std::size_t nx = std::max<std::size_t>(chart.x_labels.size(), 1);
  auto xpix = [&](std::size_t i) {
    return static_cast<int>(std::lround(x0 + (i + 0.5) * static_cast<double>(x1 - x0) / static_cast<double>(nx)));
  };

  for (int t = 0; t <= 5; ++t) {
    const double v = lo + (hi - lo) * t / 5.0;
    const int y = ypix(v);
    cv.line(x0, y, x1, y, kGrid);
    const std::string label = tick_label(v);
    cv.text(x0 - 8 - Canvas::text_width(label, 1), y - 3, label, kBlack);
  }
  cv.line(x0, y0, x1, y0, kBlack);
  cv.line(x0, y0, x0, y1, kBlack);
  for (std::size_t i = 0; i < chart.x_labels.size(); ++i) {
    const int x = xpix(i);
    cv.line(x, y0, x, y0 + 4, kBlack);
    cv.text(x - Canvas::text_width(chart.x_labels[i], 2) / 2, y0 + 10, chart.x_labels[i], kBlack, 2);
  }
  cv.text((x0 + x1 - Canvas::text_width("TRAINING CHIPS", 1)) / 2, H - 18, "TRAINING CHIPS", kBlack);
  cv.text(8, top - 20, chart.y_label, kBlack);
  const std::string title = gaps ? chart.title + " [GAPS]" : chart.title;
  cv.text((W - Canvas::text_width(title, 2)) / 2, 12, title, kBlack, 2);

  for (std::size_t s = 0; s < chart.series.size(); ++s) {
    const Series& series = chart.series[s];
    const Rgb c = kPalette[s % kPalette.size()];
    const int shift = (static_cast<int>(s) - static_cast<int>(chart.series.size() - 1) / 2) * 6;
    std::optional<std::pair<int, int>> prev;
    for (std::size_t i = 0; i < series.y.size() && i < nx; ++i) {
      if (!series.y[i]) {
        prev.reset();
        continue;
      }
      const int x = xpix(i) + shift;
      const int y = ypix(*series.y[i]);
      if (prev) cv.line(prev->first, prev->second, x, y, c, 2);
      const double e = i < series.error.size() ? series.error[i] : 0.0;
      if (e > 0) {
        const int ya = ypix(*series.y[i] - e), yb = ypix(*series.y[i] + e);
        cv.line(x, ya, x, yb, c);
        cv.line(x - 4, ya, x + 4, ya, c);
        cv.line(x - 4, yb, x + 4, yb, c);
      }
      cv.rect(x - 3, y - 3, x + 3, y + 3, c);
      prev = std::make_pair(x, y);
    }
    const int ly = top + 10 + static_cast<int>(s) * 22;
    cv.rect(x1 + 16, ly, x1 + 30, ly + 10, c);
    cv.text(x1 + 38, ly + 2, series.name, kBlack);
  }
  cv.write_png(path);
}

}  // namespace sarslide::experiments

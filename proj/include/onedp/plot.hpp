// Copyright 2026 The onedp Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Small raster helpers for diagnostic PNGs: line charts, heatmap grids and
// contact sheets. No text rendering; axes carry tick marks only.

#ifndef ONEDP_PLOT_HPP_
#define ONEDP_PLOT_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "onedp/error.hpp"
#include "onedp/image.hpp"
#include "onedp/tensor.hpp"

namespace onedp {

using Rgb = std::array<float, 3>;

// Piecewise-linear approximation of the viridis colormap, t in [0, 1].
inline Rgb colormap(double t) {
  static constexpr std::array<Rgb, 5> kStops = {{{0.267f, 0.005f, 0.329f},
                                                 {0.229f, 0.322f, 0.546f},
                                                 {0.128f, 0.567f, 0.551f},
                                                 {0.369f, 0.789f, 0.383f},
                                                 {0.993f, 0.906f, 0.144f}}};
  t = std::clamp(std::isfinite(t) ? t : 0.0, 0.0, 1.0) * (kStops.size() - 1);
  const size_t i = std::min(static_cast<size_t>(t), kStops.size() - 2);
  const float f = static_cast<float>(t - static_cast<double>(i));
  Rgb out;
  for (int c = 0; c < 3; ++c) out[c] = kStops[i][c] * (1 - f) + kStops[i + 1][c] * f;
  return out;
}

class Canvas {
 public:
  Canvas(int height, int width, Rgb background = {1, 1, 1})
      : image_(height, width, 3) {
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) set(x, y, background);
  }

  void set(int x, int y, Rgb c) {
    if (x < 0 || y < 0 || x >= image_.width || y >= image_.height) return;
    for (int k = 0; k < 3; ++k) image_.at(y, x, k) = c[k];
  }

  void fill_rect(int x0, int y0, int w, int h, Rgb c) {
    for (int y = y0; y < y0 + h; ++y)
      for (int x = x0; x < x0 + w; ++x) set(x, y, c);
  }

  void line(double x0, double y0, double x1, double y1, Rgb c) {
    const int steps = static_cast<int>(std::ceil(std::max(std::abs(x1 - x0), std::abs(y1 - y0)))) + 1;
    for (int i = 0; i <= steps; ++i) {
      const double t = static_cast<double>(i) / steps;
      set(static_cast<int>(std::lround(x0 + t * (x1 - x0))),
          static_cast<int>(std::lround(y0 + t * (y1 - y0))), c);
    }
  }

  // Copies `img` with its top-left corner at (x0, y0), each pixel scaled to
  // a scale x scale block. Grayscale sources are replicated to RGB.
  void blit(const ImageTensor& img, int x0, int y0, int scale = 1) {
    for (int y = 0; y < img.height * scale; ++y)
      for (int x = 0; x < img.width * scale; ++x) {
        Rgb c;
        for (int k = 0; k < 3; ++k) c[k] = img.at(y / scale, x / scale, img.channels == 1 ? 0 : k);
        set(x0 + x, y0 + y, c);
      }
  }

  const ImageTensor& image() const { return image_; }

 private:
  ImageTensor image_;
};

struct Series {
  std::vector<double> x;
  std::vector<double> y;
  Rgb color = {0.1f, 0.3f, 0.8f};
};

// Line chart of one or more series on shared axes. With log2_x the x values
// are placed on a log2 scale.
inline ImageTensor line_chart(std::span<const Series> series, bool log2_x = false,
                              int width = 480, int height = 320) {
  require(!series.empty(), ErrorKind::kInvalidInput, "line_chart needs at least one series");
  auto tx = [&](double v) { return log2_x ? std::log2(std::max(v, 1e-12)) : v; };
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const Series& s : series) {
    require(s.x.size() == s.y.size(), ErrorKind::kInvalidInput, "series x/y lengths differ");
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      xmin = std::min(xmin, tx(s.x[i]));
      xmax = std::max(xmax, tx(s.x[i]));
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  }
  if (!(xmax > xmin)) xmax = xmin + 1;
  if (!(ymax > ymin)) ymax = ymin + 1;
  const int left = 40, right = 16, top = 16, bottom = 32;
  const double pw = width - left - right, ph = height - top - bottom;
  auto px = [&](double v) { return left + (tx(v) - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double v) { return top + (1 - (v - ymin) / (ymax - ymin)) * ph; };

  Canvas canvas(height, width);
  const Rgb axis = {0.2f, 0.2f, 0.2f}, grid = {0.88f, 0.88f, 0.88f};
  for (int i = 0; i <= 4; ++i) {
    const double gy = top + ph * i / 4.0;
    canvas.line(left, gy, left + pw, gy, grid);
    canvas.line(left - 4, gy, left, gy, axis);
  }
  canvas.line(left, top, left, top + ph, axis);
  canvas.line(left, top + ph, left + pw, top + ph, axis);
  for (const Series& s : series) {
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      const double x = px(s.x[i]), y = py(s.y[i]);
      canvas.line(x, top + ph, x, top + ph + 4, axis);
      canvas.fill_rect(static_cast<int>(x) - 2, static_cast<int>(y) - 2, 5, 5, s.color);
      if (i > 0 && std::isfinite(s.y[i - 1])) canvas.line(px(s.x[i - 1]), py(s.y[i - 1]), x, y, s.color);
    }
  }
  return canvas.image();
}

// Maps laid out on a grid with `cols` columns, colored by log(v + floor)
// normalized to the min and max over the whole grid.
inline ImageTensor heatmap_grid(std::span<const Mat<double>> maps, int cols, int scale = 4,
                                int gap = 2) {
  require(!maps.empty() && cols > 0, ErrorKind::kInvalidInput, "heatmap_grid needs maps");
  const int h = static_cast<int>(maps.front().rows()), w = static_cast<int>(maps.front().cols());
  double vmax = 0;
  for (const auto& m : maps) {
    require(m.rows() == h && m.cols() == w, ErrorKind::kInvalidInput, "heatmap shapes differ");
    vmax = std::max(vmax, m.maxCoeff());
  }
  const double floor = std::max(vmax * 1e-4, 1e-12);
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& m : maps) {
    lo = std::min(lo, std::log(m.minCoeff() + floor));
    hi = std::max(hi, std::log(m.maxCoeff() + floor));
  }
  const double span = hi > lo ? hi - lo : 1.0;
  const int n = static_cast<int>(maps.size());
  const int rows = (n + cols - 1) / cols;
  Canvas canvas(rows * (h * scale + gap) + gap, cols * (w * scale + gap) + gap);
  for (int i = 0; i < n; ++i) {
    const int ox = gap + (i % cols) * (w * scale + gap);
    const int oy = gap + (i / cols) * (h * scale + gap);
    for (int y = 0; y < h * scale; ++y)
      for (int x = 0; x < w * scale; ++x) {
        const double v = maps[static_cast<size_t>(i)](y / scale, x / scale);
        canvas.set(ox + x, oy + y, colormap((std::log(std::max(v, 0.0) + floor) - lo) / span));
      }
  }
  return canvas.image();
}

// Tiles images row-major with `cols` columns at 1:1 scale.
inline ImageTensor contact_sheet(std::span<const ImageTensor> images, int cols, int gap = 2) {
  require(!images.empty() && cols > 0, ErrorKind::kInvalidInput, "contact_sheet needs images");
  int th = 0, tw = 0;
  for (const auto& img : images) {
    th = std::max(th, img.height);
    tw = std::max(tw, img.width);
  }
  const int n = static_cast<int>(images.size());
  cols = std::min(cols, n);
  const int rows = (n + cols - 1) / cols;
  Canvas canvas(rows * (th + gap) + gap, cols * (tw + gap) + gap);
  for (int i = 0; i < n; ++i) {
    canvas.blit(images[static_cast<size_t>(i)], gap + (i % cols) * (tw + gap),
                gap + (i / cols) * (th + gap));
  }
  return canvas.image();
}

}  // namespace onedp

#endif  // ONEDP_PLOT_HPP_

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

// Procedural 10-class image corpus: a class-defining shape or pattern in
// front of a two-color gradient, plus a few small colored specks. Image i
// of a corpus depends only on (seed, i).

#ifndef ONEDP_SYNTH_HPP_
#define ONEDP_SYNTH_HPP_

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>

#include "onedp/error.hpp"
#include "onedp/image.hpp"
#include "onedp/tensor.hpp"

namespace onedp {

inline constexpr std::array<const char*, 10> kSynthClasses = {
    "disk", "square", "triangle", "ring", "cross",
    "hstripes", "vstripes", "checker", "diagonal", "pair"};

namespace detail {

using Color = std::array<float, 3>;

inline Color random_color(Rng& rng) {
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  return {u(rng), u(rng), u(rng)};
}

inline float color_distance(const Color& a, const Color& b) {
  float s = 0.0f;
  for (int c = 0; c < 3; ++c) s += (a[c] - b[c]) * (a[c] - b[c]);
  return std::sqrt(s);
}

// Shape membership in units where the shape is centered at the origin with
// radius 1; `period` is the stripe period in the same units.
inline bool inside(int cls, double x, double y, double period) {
  const double r2 = x * x + y * y;
  const bool in_box = std::abs(x) < 1.0 && std::abs(y) < 1.0;
  auto band = [period](double v) { return static_cast<long>(std::floor(v / period)) % 2 == 0; };
  switch (cls) {
    case 0: return r2 < 1.0;
    case 1: return std::abs(x) < 0.8 && std::abs(y) < 0.8;
    case 2: return y < 0.8 && std::abs(x) < (y + 1.0) * 0.55;
    case 3: return r2 < 1.0 && r2 > 0.36;
    case 4: return (std::abs(x) < 0.3 && std::abs(y) < 1.0) || (std::abs(y) < 0.3 && std::abs(x) < 1.0);
    case 5: return in_box && band(y + 4.0);
    case 6: return in_box && band(x + 4.0);
    case 7: return in_box && (band(x + 4.0) != band(y + 4.0));
    case 8: return in_box && band(x + y + 8.0);
    case 9: {
      const double a = (x - 0.55) * (x - 0.55) + y * y;
      const double b = (x + 0.55) * (x + 0.55) + y * y;
      return a < 0.2 || b < 0.2;
    }
    default: return false;
  }
}

}  // namespace detail

inline ImageTensor synth_image(int cls, int size, Rng& rng) {
  using detail::Color;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Color bg0 = detail::random_color(rng);
  const Color bg1 = detail::random_color(rng);
  const double angle = u(rng) * 2.0 * 3.141592653589793;
  const Color bg_mid = {(bg0[0] + bg1[0]) / 2, (bg0[1] + bg1[1]) / 2, (bg0[2] + bg1[2]) / 2};
  Color fg = detail::random_color(rng);
  for (int tries = 0; tries < 32 && detail::color_distance(fg, bg_mid) < 0.4f; ++tries) {
    fg = detail::random_color(rng);
  }
  const double cx = size * (0.3 + 0.4 * u(rng));
  const double cy = size * (0.3 + 0.4 * u(rng));
  const double radius = size * (0.2 + 0.12 * u(rng));
  const double period = 0.25 + 0.2 * u(rng);

  ImageTensor img(size, size, 3);
  constexpr int kSub = 4;
  const double dir_x = std::cos(angle), dir_y = std::sin(angle);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double nx = (x + 0.5) / size - 0.5, ny = (y + 0.5) / size - 0.5;
      const double t = std::clamp(0.5 + (nx * dir_x + ny * dir_y), 0.0, 1.0);
      int hits = 0;
      for (int sy = 0; sy < kSub; ++sy)
        for (int sx = 0; sx < kSub; ++sx) {
          const double px = x + (sx + 0.5) / kSub, py = y + (sy + 0.5) / kSub;
          hits += detail::inside(cls, (px - cx) / radius, (py - cy) / radius, period);
        }
      const float cover = static_cast<float>(hits) / (kSub * kSub);
      for (int c = 0; c < 3; ++c) {
        const float bg = static_cast<float>(bg0[c] * (1 - t) + bg1[c] * t);
        img.at(y, x, c) = bg * (1 - cover) + fg[c] * cover;
      }
    }
  }
  std::uniform_int_distribution<int> n_specks(2, 4), side(2, 4), pos(0, size - 1);
  const int specks = n_specks(rng);
  for (int s = 0; s < specks; ++s) {
    const Color col = detail::random_color(rng);
    const int w = side(rng), h = side(rng);
    const int x0 = pos(rng), y0 = pos(rng);
    for (int y = y0; y < std::min(size, y0 + h); ++y)
      for (int x = x0; x < std::min(size, x0 + w); ++x)
        for (int c = 0; c < 3; ++c) img.at(y, x, c) = col[c];
  }
  return img;
}

// Writes `count` images to out/<class>/img_<i>.png, classes assigned
// round-robin over the first `classes` entries of kSynthClasses.
inline void write_synth_corpus(const std::filesystem::path& out, int count, int size,
                               std::uint64_t seed, int classes = 10) {
  require(count > 0 && size > 0, ErrorKind::kInvalidInput, "count and size must be positive");
  require(classes >= 1 && classes <= static_cast<int>(kSynthClasses.size()),
          ErrorKind::kInvalidInput, "classes must be in [1, 10]");
  for (int i = 0; i < count; ++i) {
    const int cls = i % classes;
    Rng rng = make_stream(seed, StreamTag::kSynth, static_cast<std::uint64_t>(i));
    char dir[32], name[32];
    std::snprintf(dir, sizeof(dir), "%d_%s", cls, kSynthClasses[static_cast<size_t>(cls)]);
    std::snprintf(name, sizeof(name), "img_%05d.png", i);
    std::filesystem::create_directories(out / dir);
    write_png(out / dir / name, synth_image(cls, size, rng));
  }
}

}  // namespace onedp

#endif  // ONEDP_SYNTH_HPP_

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

#ifndef ONEDP_IMAGE_HPP_
#define ONEDP_IMAGE_HPP_

#include <png.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "onedp/error.hpp"
#include "onedp/tensor.hpp"

namespace onedp {

// H x W x C image, interleaved (HWC) float samples in [0, 1].
struct ImageTensor {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<float> data;

  ImageTensor() = default;
  ImageTensor(int h, int w, int c, float fill = 0.0f)
      : height(h), width(w), channels(c), data(static_cast<size_t>(h) * w * c, fill) {}

  float& at(int y, int x, int c) { return data[(static_cast<size_t>(y) * width + x) * channels + c]; }
  float at(int y, int x, int c) const {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  size_t size() const { return data.size(); }
  bool same_shape(const ImageTensor& o) const {
    return height == o.height && width == o.width && channels == o.channels;
  }
  bool operator==(const ImageTensor&) const = default;
};

inline bool all_finite(const ImageTensor& img) {
  return std::all_of(img.data.begin(), img.data.end(), [](float v) { return std::isfinite(v); });
}

inline void clamp_unit(ImageTensor& img) {
  for (float& v : img.data) v = std::clamp(v, 0.0f, 1.0f);
}

inline ImageTensor read_png(const std::filesystem::path& path, int channels = 3) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
    fail(ErrorKind::kIngestion, "cannot read PNG '" + path.string() + "': " + image.message);
  }
  image.format = channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    png_image_free(&image);
    fail(ErrorKind::kIngestion, "cannot decode PNG '" + path.string() + "': " + image.message);
  }
  ImageTensor out(static_cast<int>(image.height), static_cast<int>(image.width), channels);
  for (size_t i = 0; i < out.data.size(); ++i) out.data[i] = buffer[i] / 255.0f;
  return out;
}

inline std::vector<png_byte> to_bytes(const ImageTensor& img) {
  std::vector<png_byte> bytes(img.data.size());
  for (size_t i = 0; i < bytes.size(); ++i) {
    const float v = std::clamp(img.data[i], 0.0f, 1.0f);
    bytes[i] = static_cast<png_byte>(std::lround(v * 255.0f));
  }
  return bytes;
}

inline void write_png(const std::filesystem::path& path, const ImageTensor& img) {
  require(img.channels == 1 || img.channels == 3, ErrorKind::kInvalidInput,
          "PNG output needs 1 or 3 channels");
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = img.channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  const auto bytes = to_bytes(img);
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, bytes.data(), 0, nullptr)) {
    fail(ErrorKind::kIo, "cannot write PNG '" + path.string() + "': " + image.message);
  }
}

inline ImageTensor crop(const ImageTensor& img, int top, int left, int h, int w) {
  require(top >= 0 && left >= 0 && top + h <= img.height && left + w <= img.width,
          ErrorKind::kInvalidInput, "crop window outside image");
  ImageTensor out(h, w, img.channels);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < img.channels; ++c) out.at(y, x, c) = img.at(top + y, left + x, c);
  return out;
}

inline ImageTensor center_square(const ImageTensor& img) {
  const int side = std::min(img.height, img.width);
  return crop(img, (img.height - side) / 2, (img.width - side) / 2, side, side);
}

inline ImageTensor flip_horizontal(const ImageTensor& img) {
  ImageTensor out(img.height, img.width, img.channels);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < img.channels; ++c) out.at(y, x, c) = img.at(y, img.width - 1 - x, c);
  return out;
}

// Area averaging when shrinking, bilinear when enlarging.
inline ImageTensor resize(const ImageTensor& img, int h, int w) {
  if (img.height == h && img.width == w) return img;
  ImageTensor out(h, w, img.channels);
  const double sy = static_cast<double>(img.height) / h;
  const double sx = static_cast<double>(img.width) / w;
  if (sy >= 1.0 && sx >= 1.0) {
    for (int y = 0; y < h; ++y) {
      const double y0 = y * sy, y1 = (y + 1) * sy;
      for (int x = 0; x < w; ++x) {
        const double x0 = x * sx, x1 = (x + 1) * sx;
        for (int c = 0; c < img.channels; ++c) {
          double acc = 0.0;
          for (int iy = static_cast<int>(y0); iy < std::min<double>(y1, img.height); ++iy) {
            const double wy = std::min<double>(iy + 1, y1) - std::max<double>(iy, y0);
            for (int ix = static_cast<int>(x0); ix < std::min<double>(x1, img.width); ++ix) {
              const double wx = std::min<double>(ix + 1, x1) - std::max<double>(ix, x0);
              acc += wy * wx * img.at(iy, ix, c);
            }
          }
          out.at(y, x, c) = static_cast<float>(acc / (sy * sx));
        }
      }
    }
    return out;
  }
  for (int y = 0; y < h; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, img.height - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double ty = fy - y0;
    for (int x = 0; x < w; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, img.width - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, img.width - 1);
      const double tx = fx - x0;
      for (int c = 0; c < img.channels; ++c) {
        const double top = img.at(y0, x0, c) * (1 - tx) + img.at(y0, x1, c) * tx;
        const double bot = img.at(y1, x0, c) * (1 - tx) + img.at(y1, x1, c) * tx;
        out.at(y, x, c) = static_cast<float>(top * (1 - ty) + bot * ty);
      }
    }
  }
  return out;
}

// Center-crop to square, then resample to size x size.
inline ImageTensor fit_square(const ImageTensor& img, int size) {
  return resize(center_square(img), size, size);
}

// Channel-mean grayscale, used by SSIM and the L1 contribution maps.
inline ImageTensor to_gray(const ImageTensor& img) {
  ImageTensor out(img.height, img.width, 1);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      double acc = 0.0;
      for (int c = 0; c < img.channels; ++c) acc += img.at(y, x, c);
      out.at(y, x, 0) = static_cast<float>(acc / img.channels);
    }
  return out;
}

}  // namespace onedp

#endif  // ONEDP_IMAGE_HPP_

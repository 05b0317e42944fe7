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

// Transformer and convolution layers with hand-written backward passes.
//
// Every layer is a plain aggregate of parameter matrices plus a static
// visit() that walks the parameters of several same-shaped instances in
// lockstep. Model, gradient accumulator and optimizer moments are all
// instances of the same type, so one visitor drives zeroing, AdamW,
// clipping, checkpointing and fingerprinting.
//
// Forward passes are const and take an optional cache; inference passes
// nullptr and is safe for concurrent readers.

#ifndef ONEDP_LAYERS_HPP_
#define ONEDP_LAYERS_HPP_

#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "onedp/tensor.hpp"

namespace onedp {

// Wraps a parameter visitor so nested names become "outer.inner".
template <class F>
auto prefixed(const std::string& prefix, F& f) {
  return [prefix, &f](const std::string& name, bool decay, auto&... params) {
    f(prefix + "." + name, decay, params...);
  };
}

// Contiguous row range [offset, offset + length) belonging to one sequence.
struct Segment {
  Eigen::Index offset = 0;
  Eigen::Index length = 0;
};

template <typename T>
struct Linear {
  Mat<T> weight;  // in x out
  Mat<T> bias;    // 1 x out

  Linear() = default;
  Linear(int in, int out) : weight(Mat<T>::Zero(in, out)), bias(Mat<T>::Zero(1, out)) {}

  template <class F, class... S>
  static void visit(F&& f, S&... s) {
    f("weight", true, s.weight...);
    f("bias", false, s.bias...);
  }

  Mat<T> forward(const Mat<T>& x) const {
    Mat<T> y(x.rows(), weight.cols());
    y.noalias() = x * weight;
    y.rowwise() += bias.row(0);
    return y;
  }

  void backward_params(const Mat<T>& x, const Mat<T>& dy, Linear& grad) const {
    grad.weight.noalias() += x.transpose() * dy;
    grad.bias += dy.colwise().sum();
  }

  Mat<T> backward(const Mat<T>& x, const Mat<T>& dy, Linear& grad) const {
    backward_params(x, dy, grad);
    Mat<T> dx(dy.rows(), weight.rows());
    dx.noalias() = dy * weight.transpose();
    return dx;
  }
};

template <typename T>
struct LayerNorm {
  static constexpr double kEps = 1e-6;
  Mat<T> gamma;  // 1 x d
  Mat<T> beta;   // 1 x d

  struct Cache {
    Mat<T> xhat;
    Eigen::Matrix<T, Eigen::Dynamic, 1> rstd;
  };

  LayerNorm() = default;
  explicit LayerNorm(int d) : gamma(Mat<T>::Ones(1, d)), beta(Mat<T>::Zero(1, d)) {}

  template <class F, class... S>
  static void visit(F&& f, S&... s) {
    f("gamma", false, s.gamma...);
    f("beta", false, s.beta...);
  }

  Mat<T> forward(const Mat<T>& x, Cache* cache) const {
    const Eigen::Index n = x.rows(), d = x.cols();
    Mat<T> xhat(n, d);
    Eigen::Matrix<T, Eigen::Dynamic, 1> rstd(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const T mean = x.row(i).mean();
      const T var = (x.row(i).array() - mean).square().mean();
      rstd(i) = T(1) / std::sqrt(var + T(kEps));
      xhat.row(i) = (x.row(i).array() - mean) * rstd(i);
    }
    Mat<T> y = (xhat.array().rowwise() * gamma.row(0).array()).matrix();
    y.rowwise() += beta.row(0);
    if (cache) {
      cache->xhat = std::move(xhat);
      cache->rstd = std::move(rstd);
    }
    return y;
  }

  Mat<T> backward(const Mat<T>& dy, const Cache& cache, LayerNorm& grad) const {
    const Eigen::Index n = dy.rows(), d = dy.cols();
    grad.gamma += (dy.array() * cache.xhat.array()).matrix().colwise().sum();
    grad.beta += dy.colwise().sum();
    Mat<T> dxhat = (dy.array().rowwise() * gamma.row(0).array()).matrix();
    Mat<T> dx(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
      const T s1 = dxhat.row(i).sum();
      const T s2 = (dxhat.row(i).array() * cache.xhat.row(i).array()).sum();
      dx.row(i) = (cache.rstd(i) / T(d)) *
                  (T(d) * dxhat.row(i).array() - s1 - cache.xhat.row(i).array() * s2).matrix();
    }
    return dx;
  }
};

// tanh-approximated GELU.
template <typename T>
Mat<T> gelu(const Mat<T>& x) {
  constexpr T k = T(0.7978845608028654);  // sqrt(2/pi)
  const auto v = x.array();
  const auto t = (k * (v + T(0.044715) * v.cube())).tanh().eval();
  return (T(0.5) * v * (T(1) + t)).matrix();
}

template <typename T>
Mat<T> gelu_backward(const Mat<T>& x, const Mat<T>& dy) {
  constexpr T k = T(0.7978845608028654);
  const auto v = x.array();
  const auto t = (k * (v + T(0.044715) * v.cube())).tanh().eval();
  return ((T(0.5) * (T(1) + t) + T(0.5) * v * (T(1) - t.square()) * k *
                                     (T(1) + T(3 * 0.044715) * v.square())) *
          dy.array())
      .matrix();
}

// Multi-head self-attention restricted to each segment; rows of different
// segments never attend to each other.
template <typename T>
struct Attention {
  Linear<T> qkv;
  Linear<T> proj;
  int heads = 1;

  struct Cache {
    Mat<T> qkv;
    Mat<T> ctx;
    std::vector<Mat<T>> probs;  // segment-major, then head
  };

  Attention() = default;
  Attention(int d, int h) : qkv(d, 3 * d), proj(d, d), heads(h) {}

  template <class F, class... S>
  static void visit(F&& f, S&... s) {
    Linear<T>::visit(prefixed("qkv", f), s.qkv...);
    Linear<T>::visit(prefixed("proj", f), s.proj...);
  }

  Mat<T> forward(const Mat<T>& x, std::span<const Segment> segs, Cache* cache) const {
    const Eigen::Index d = x.cols();
    const Eigen::Index dh = d / heads;
    const T scale = T(1) / std::sqrt(T(dh));
    Mat<T> qkv_out = qkv.forward(x);
    Mat<T> ctx(x.rows(), d);
    if (cache) cache->probs.clear();
    for (const Segment& s : segs) {
      for (int h = 0; h < heads; ++h) {
        const auto q = qkv_out.block(s.offset, h * dh, s.length, dh);
        const auto k = qkv_out.block(s.offset, d + h * dh, s.length, dh);
        const auto v = qkv_out.block(s.offset, 2 * d + h * dh, s.length, dh);
        Mat<T> p(s.length, s.length);
        p.noalias() = q * k.transpose();
        p *= scale;
        for (Eigen::Index i = 0; i < p.rows(); ++i) {
          const T m = p.row(i).maxCoeff();
          p.row(i) = (p.row(i).array() - m).exp();
          p.row(i) /= p.row(i).sum();
        }
        ctx.block(s.offset, h * dh, s.length, dh).noalias() = p * v;
        if (cache) cache->probs.push_back(std::move(p));
      }
    }
    Mat<T> out = proj.forward(ctx);
    if (cache) {
      cache->qkv = std::move(qkv_out);
      cache->ctx = std::move(ctx);
    }
    return out;
  }

  Mat<T> backward(const Mat<T>& x, const Mat<T>& dout, std::span<const Segment> segs,
                  const Cache& cache, Attention& grad) const {
    const Eigen::Index d = x.cols();
    const Eigen::Index dh = d / heads;
    const T scale = T(1) / std::sqrt(T(dh));
    const Mat<T> dctx = proj.backward(cache.ctx, dout, grad.proj);
    Mat<T> dqkv = Mat<T>::Zero(x.rows(), 3 * d);
    size_t idx = 0;
    for (const Segment& s : segs) {
      for (int h = 0; h < heads; ++h, ++idx) {
        const Mat<T>& p = cache.probs[idx];
        const auto q = cache.qkv.block(s.offset, h * dh, s.length, dh);
        const auto k = cache.qkv.block(s.offset, d + h * dh, s.length, dh);
        const auto v = cache.qkv.block(s.offset, 2 * d + h * dh, s.length, dh);
        const auto d_o = dctx.block(s.offset, h * dh, s.length, dh);
        dqkv.block(s.offset, 2 * d + h * dh, s.length, dh).noalias() = p.transpose() * d_o;
        Mat<T> dp(s.length, s.length);
        dp.noalias() = d_o * v.transpose();
        const auto row_dot = (dp.array() * p.array()).rowwise().sum().eval();
        Mat<T> ds = (p.array() * (dp.array().colwise() - row_dot)).matrix() * scale;
        dqkv.block(s.offset, h * dh, s.length, dh).noalias() = ds * k;
        dqkv.block(s.offset, d + h * dh, s.length, dh).noalias() = ds.transpose() * q;
      }
    }
    return qkv.backward(x, dqkv, grad.qkv);
  }
};

// Pre-norm transformer block: x + attn(ln(x)), then x + mlp(ln(x)).
template <typename T>
struct Block {
  LayerNorm<T> ln1;
  Attention<T> attn;
  LayerNorm<T> ln2;
  Linear<T> fc1;
  Linear<T> fc2;

  struct Cache {
    typename LayerNorm<T>::Cache ln1;
    typename Attention<T>::Cache attn;
    typename LayerNorm<T>::Cache ln2;
    Mat<T> h1, h2, a, g;
  };

  Block() = default;
  Block(int d, int heads, int mlp_ratio)
      : ln1(d), attn(d, heads), ln2(d), fc1(d, d * mlp_ratio), fc2(d * mlp_ratio, d) {}

  template <class F, class... S>
  static void visit(F&& f, S&... s) {
    LayerNorm<T>::visit(prefixed("ln1", f), s.ln1...);
    Attention<T>::visit(prefixed("attn", f), s.attn...);
    LayerNorm<T>::visit(prefixed("ln2", f), s.ln2...);
    Linear<T>::visit(prefixed("fc1", f), s.fc1...);
    Linear<T>::visit(prefixed("fc2", f), s.fc2...);
  }

  Mat<T> forward(const Mat<T>& x, std::span<const Segment> segs, Cache* cache) const {
    Mat<T> h1 = ln1.forward(x, cache ? &cache->ln1 : nullptr);
    Mat<T> mid = x + attn.forward(h1, segs, cache ? &cache->attn : nullptr);
    Mat<T> h2 = ln2.forward(mid, cache ? &cache->ln2 : nullptr);
    Mat<T> a = fc1.forward(h2);
    Mat<T> g = gelu(a);
    Mat<T> y = mid + fc2.forward(g);
    if (cache) {
      cache->h1 = std::move(h1);
      cache->h2 = std::move(h2);
      cache->a = std::move(a);
      cache->g = std::move(g);
    }
    return y;
  }

  Mat<T> backward(const Mat<T>& dy, std::span<const Segment> segs, const Cache& c,
                  Block& grad) const {
    Mat<T> dg = fc2.backward(c.g, dy, grad.fc2);
    Mat<T> dh2 = fc1.backward(c.h2, gelu_backward(c.a, dg), grad.fc1);
    Mat<T> dmid = dy + ln2.backward(dh2, c.ln2, grad.ln2);
    Mat<T> dh1 = attn.backward(c.h1, dmid, segs, c.attn, grad.attn);
    return dmid + ln1.backward(dh1, c.ln1, grad.ln1);
  }
};

// Rearranges between patch rows and pixel rows for a batch of images.
// Patch row (b, py, px) holds feature (dy * p + dx) * C + c, which is pixel
// row (b, py * p + dy, px * p + dx), channel c. Patchify and the upscaler's
// depth-to-space step are the two directions of this permutation.
struct PatchLayout {
  int grid = 0;   // patches per side
  int patch = 0;  // pixels per patch side
  int channels = 0;

  int side() const { return grid * patch; }
  Eigen::Index patches_per_image() const { return Eigen::Index{grid} * grid; }
  Eigen::Index pixels_per_image() const { return Eigen::Index{side()} * side(); }

  template <typename T>
  Mat<T> to_pixels(const Mat<T>& patches) const {
    const Eigen::Index batch = patches.rows() / patches_per_image();
    Mat<T> pixels(batch * pixels_per_image(), channels);
    for (Eigen::Index b = 0; b < batch; ++b)
      for (int py = 0; py < grid; ++py)
        for (int px = 0; px < grid; ++px) {
          const Eigen::Index row = b * patches_per_image() + py * grid + px;
          for (int dy = 0; dy < patch; ++dy)
            for (int dx = 0; dx < patch; ++dx) {
              const Eigen::Index prow =
                  b * pixels_per_image() + Eigen::Index{py * patch + dy} * side() + px * patch + dx;
              pixels.row(prow) = patches.block(row, (dy * patch + dx) * channels, 1, channels);
            }
        }
    return pixels;
  }

  template <typename T>
  Mat<T> to_patches(const Mat<T>& pixels) const {
    const Eigen::Index batch = pixels.rows() / pixels_per_image();
    Mat<T> patches(batch * patches_per_image(), Eigen::Index{patch} * patch * channels);
    for (Eigen::Index b = 0; b < batch; ++b)
      for (int py = 0; py < grid; ++py)
        for (int px = 0; px < grid; ++px) {
          const Eigen::Index row = b * patches_per_image() + py * grid + px;
          for (int dy = 0; dy < patch; ++dy)
            for (int dx = 0; dx < patch; ++dx) {
              const Eigen::Index prow =
                  b * pixels_per_image() + Eigen::Index{py * patch + dy} * side() + px * patch + dx;
              patches.block(row, (dy * patch + dx) * channels, 1, channels) = pixels.row(prow);
            }
        }
    return patches;
  }
};

// 3x3 convolution, stride 1, zero padding 1, on a batch of square images
// stored as pixel rows (batch * side * side) x channels.
template <typename T>
struct Conv3x3 {
  Mat<T> weight;  // (9 * in) x out, tap-major
  Mat<T> bias;    // 1 x out

  struct Cache {
    Mat<T> cols;
  };

  Conv3x3() = default;
  Conv3x3(int in, int out) : weight(Mat<T>::Zero(9 * in, out)), bias(Mat<T>::Zero(1, out)) {}

  template <class F, class... S>
  static void visit(F&& f, S&... s) {
    f("weight", true, s.weight...);
    f("bias", false, s.bias...);
  }

  static Mat<T> im2col(const Mat<T>& x, int side) {
    const Eigen::Index cin = x.cols();
    const Eigen::Index per = Eigen::Index{side} * side;
    const Eigen::Index batch = x.rows() / per;
    Mat<T> cols = Mat<T>::Zero(x.rows(), 9 * cin);
    for (Eigen::Index b = 0; b < batch; ++b)
      for (int y = 0; y < side; ++y)
        for (int xx = 0; xx < side; ++xx) {
          const Eigen::Index row = b * per + Eigen::Index{y} * side + xx;
          for (int ky = 0; ky < 3; ++ky) {
            const int sy = y + ky - 1;
            if (sy < 0 || sy >= side) continue;
            for (int kx = 0; kx < 3; ++kx) {
              const int sx = xx + kx - 1;
              if (sx < 0 || sx >= side) continue;
              cols.block(row, (ky * 3 + kx) * cin, 1, cin) =
                  x.row(b * per + Eigen::Index{sy} * side + sx);
            }
          }
        }
    return cols;
  }

  static Mat<T> col2im(const Mat<T>& dcols, int side, Eigen::Index cin) {
    const Eigen::Index per = Eigen::Index{side} * side;
    const Eigen::Index batch = dcols.rows() / per;
    Mat<T> dx = Mat<T>::Zero(dcols.rows(), cin);
    for (Eigen::Index b = 0; b < batch; ++b)
      for (int y = 0; y < side; ++y)
        for (int xx = 0; xx < side; ++xx) {
          const Eigen::Index row = b * per + Eigen::Index{y} * side + xx;
          for (int ky = 0; ky < 3; ++ky) {
            const int sy = y + ky - 1;
            if (sy < 0 || sy >= side) continue;
            for (int kx = 0; kx < 3; ++kx) {
              const int sx = xx + kx - 1;
              if (sx < 0 || sx >= side) continue;
              dx.row(b * per + Eigen::Index{sy} * side + sx) +=
                  dcols.block(row, (ky * 3 + kx) * cin, 1, cin);
            }
          }
        }
    return dx;
  }

  Mat<T> forward(const Mat<T>& x, int side, Cache* cache) const {
    Mat<T> cols = im2col(x, side);
    Mat<T> y(x.rows(), weight.cols());
    y.noalias() = cols * weight;
    y.rowwise() += bias.row(0);
    if (cache) cache->cols = std::move(cols);
    return y;
  }

  Mat<T> backward(const Mat<T>& dy, int side, const Cache& cache, Conv3x3& grad) const {
    grad.weight.noalias() += cache.cols.transpose() * dy;
    grad.bias += dy.colwise().sum();
    Mat<T> dcols(dy.rows(), weight.rows());
    dcols.noalias() = dy * weight.transpose();
    return col2im(dcols, side, weight.rows() / 9);
  }
};

}  // namespace onedp

#endif  // ONEDP_LAYERS_HPP_

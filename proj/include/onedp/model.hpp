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

// Encoder -> quantizer -> decoder pipeline of the 1D tokenizer.
//
// Encoder input per image: P patch embeddings followed by N learned latent
// tokens. The encoder outputs at the latent positions, projected to
// token_dim, are the continuous latents z.
//
// Decoder input per image: P copies of the mask token (each with its own
// positional embedding) followed by the L <= N quantized tokens, which carry
// positional embeddings 1..L. Positions beyond L are absent, not masked.
// The decoder outputs at the mask positions go through a linear projection,
// depth-to-space and a 3x3 convolution to produce pixels.

#ifndef ONEDP_MODEL_HPP_
#define ONEDP_MODEL_HPP_

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "onedp/config.hpp"
#include "onedp/error.hpp"
#include "onedp/image.hpp"
#include "onedp/layers.hpp"
#include "onedp/quantizer.hpp"
#include "onedp/tensor.hpp"

namespace onedp {

namespace detail {

template <class First, class... Rest>
First& first(First& f, Rest&...) {
  return f;
}

template <typename T, class F, class... S>
void visit_blocks(F& f, std::vector<Block<T>>& first_blocks, S&... rest) {
  for (size_t i = 0; i < first_blocks.size(); ++i) {
    Block<T>::visit(prefixed("blocks." + std::to_string(i), f), first_blocks[i], rest[i]...);
  }
}

}  // namespace detail

template <typename T>
struct Encoder {
  Linear<T> patch_embed;
  Mat<T> patch_pos;      // P x width
  Mat<T> latent_tokens;  // N x width
  std::vector<Block<T>> blocks;
  LayerNorm<T> ln_post;
  Linear<T> to_token;

  template <class F, class... S>
  static void visit(F&& f, S&... s) {
    Linear<T>::visit(prefixed("patch_embed", f), s.patch_embed...);
    f("patch_pos", false, s.patch_pos...);
    f("latent_tokens", false, s.latent_tokens...);
    detail::visit_blocks<T>(f, s.blocks...);
    LayerNorm<T>::visit(prefixed("ln_post", f), s.ln_post...);
    Linear<T>::visit(prefixed("to_token", f), s.to_token...);
  }
};

template <typename T>
struct Decoder {
  Linear<T> token_embed;
  Mat<T> token_pos;   // N x width
  Mat<T> mask_token;  // 1 x width
  Mat<T> mask_pos;    // P x width
  std::vector<Block<T>> blocks;
  LayerNorm<T> ln_post;
  Linear<T> to_pixels;  // width -> patch^2 * upscaler_channels
  Conv3x3<T> conv;      // upscaler_channels -> channels

  template <class F, class... S>
  static void visit(F&& f, S&... s) {
    Linear<T>::visit(prefixed("token_embed", f), s.token_embed...);
    f("token_pos", false, s.token_pos...);
    f("mask_token", false, s.mask_token...);
    f("mask_pos", false, s.mask_pos...);
    detail::visit_blocks<T>(f, s.blocks...);
    LayerNorm<T>::visit(prefixed("ln_post", f), s.ln_post...);
    Linear<T>::visit(prefixed("to_pixels", f), s.to_pixels...);
    Conv3x3<T>::visit(prefixed("conv", f), s.conv...);
  }
};

template <typename T>
struct TokenizerModel {
  ModelConfig config;
  Encoder<T> encoder;
  Codebook<T> codebook;
  Decoder<T> decoder;

  template <class F, class... S>
  static void visit(F&& f, S&... s) {
    Encoder<T>::visit(prefixed("encoder", f), s.encoder...);
    Codebook<T>::visit(prefixed("codebook", f), s.codebook...);
    Decoder<T>::visit(prefixed("decoder", f), s.decoder...);
  }

  PatchLayout input_layout() const {
    return {config.grid(), config.patch_size, config.channels};
  }
  PatchLayout upscale_layout() const {
    return {config.grid(), config.patch_size, config.upscaler_channels};
  }
};

using Model = TokenizerModel<float>;

// All-zero parameters with the configured shapes.
template <typename T>
TokenizerModel<T> make_model(const ModelConfig& config) {
  config.validate();
  TokenizerModel<T> m;
  m.config = config;
  const int p = config.n_patches();
  const int n = config.n_latent_tokens;
  const int de = config.encoder_width, dd = config.decoder_width;
  m.encoder.patch_embed = Linear<T>(config.patch_dim(), de);
  m.encoder.patch_pos = Mat<T>::Zero(p, de);
  m.encoder.latent_tokens = Mat<T>::Zero(n, de);
  for (int i = 0; i < config.encoder_depth; ++i)
    m.encoder.blocks.emplace_back(de, config.encoder_heads, config.mlp_ratio);
  m.encoder.ln_post = LayerNorm<T>(de);
  m.encoder.to_token = Linear<T>(de, config.token_dim);
  m.codebook = Codebook<T>(config.codebook_size, config.token_dim);
  m.decoder.token_embed = Linear<T>(config.token_dim, dd);
  m.decoder.token_pos = Mat<T>::Zero(n, dd);
  m.decoder.mask_token = Mat<T>::Zero(1, dd);
  m.decoder.mask_pos = Mat<T>::Zero(p, dd);
  for (int i = 0; i < config.decoder_depth; ++i)
    m.decoder.blocks.emplace_back(dd, config.decoder_heads, config.mlp_ratio);
  m.decoder.ln_post = LayerNorm<T>(dd);
  m.decoder.to_pixels =
      Linear<T>(dd, config.patch_size * config.patch_size * config.upscaler_channels);
  m.decoder.conv = Conv3x3<T>(config.upscaler_channels, config.channels);
  return m;
}

// Truncated normal (sigma 0.02) for weights and embeddings, unit LayerNorm
// gains, zero biases, codebook uniform on [0, 1)^d scaled by 1/sqrt(d).
// The output convolution starts at mid-gray.
template <typename T>
TokenizerModel<T> init_model(const ModelConfig& config, std::uint64_t seed) {
  TokenizerModel<T> m = make_model<T>(config);
  Rng rng = make_stream(seed, StreamTag::kInit);
  TokenizerModel<T>::visit(
      [&](const std::string& name, bool decay, Mat<T>& w) {
        const bool is_norm = name.find(".ln") != std::string::npos;
        if (name.starts_with("codebook.")) {
          fill_uniform(w, 0.0, 1.0 / std::sqrt(static_cast<double>(config.token_dim)), rng);
        } else if (is_norm) {
          // keep LayerNorm defaults
        } else if (decay || name.ends_with("_pos") || name.ends_with("_token") ||
                   name.ends_with("latent_tokens")) {
          fill_trunc_normal(w, 0.02, rng);
        }
      },
      m);
  m.decoder.conv.bias.setConstant(T(0.5));
  return m;
}

template <typename T>
TokenizerModel<T> zeros_like(const TokenizerModel<T>& model) {
  TokenizerModel<T> z = model;
  TokenizerModel<T>::visit([](const std::string&, bool, Mat<T>& w) { w.setZero(); }, z);
  std::fill(z.codebook.usage_counts.begin(), z.codebook.usage_counts.end(), 0);
  return z;
}

template <typename U, typename T>
TokenizerModel<U> cast_model(const TokenizerModel<T>& model) {
  TokenizerModel<U> out = make_model<U>(model.config);
  TokenizerModel<T> src = model;
  std::vector<const Mat<T>*> params;
  TokenizerModel<T>::visit([&](const std::string&, bool, Mat<T>& w) { params.push_back(&w); },
                           src);
  size_t i = 0;
  TokenizerModel<U>::visit(
      [&](const std::string&, bool, Mat<U>& w) { w = params[i++]->template cast<U>(); }, out);
  out.codebook.usage_counts = model.codebook.usage_counts;
  return out;
}

template <typename T>
size_t parameter_count(const TokenizerModel<T>& model) {
  size_t n = 0;
  TokenizerModel<T> copy = model;
  TokenizerModel<T>::visit([&](const std::string&, bool, Mat<T>& w) { n += w.size(); }, copy);
  return n;
}

// ---------------------------------------------------------------------------
// Image <-> matrix helpers

inline void check_image(const ImageTensor& image, const ModelConfig& config) {
  require(image.height == config.image_size && image.width == config.image_size &&
              image.channels == config.channels,
          ErrorKind::kInvalidInput,
          "image is " + std::to_string(image.height) + "x" + std::to_string(image.width) + "x" +
              std::to_string(image.channels) + ", model expects " +
              std::to_string(config.image_size) + "x" + std::to_string(config.image_size) + "x" +
              std::to_string(config.channels));
}

template <typename T>
Mat<T> images_to_pixels(std::span<const ImageTensor> images, const ModelConfig& config) {
  const Eigen::Index per = Eigen::Index{config.image_size} * config.image_size;
  Mat<T> pixels(static_cast<Eigen::Index>(images.size()) * per, config.channels);
  for (size_t b = 0; b < images.size(); ++b) {
    check_image(images[b], config);
    for (Eigen::Index i = 0; i < per * config.channels; ++i) {
      pixels.data()[static_cast<Eigen::Index>(b) * per * config.channels + i] =
          static_cast<T>(images[b].data[static_cast<size_t>(i)]);
    }
  }
  return pixels;
}

template <typename T>
std::vector<ImageTensor> pixels_to_images(const Mat<T>& pixels, const ModelConfig& config,
                                          bool clamp) {
  const Eigen::Index per = Eigen::Index{config.image_size} * config.image_size;
  const Eigen::Index batch = pixels.rows() / per;
  std::vector<ImageTensor> out;
  out.reserve(static_cast<size_t>(batch));
  for (Eigen::Index b = 0; b < batch; ++b) {
    ImageTensor img(config.image_size, config.image_size, config.channels);
    for (size_t i = 0; i < img.data.size(); ++i) {
      img.data[i] = static_cast<float>(pixels.data()[b * per * config.channels + static_cast<Eigen::Index>(i)]);
    }
    if (clamp) clamp_unit(img);
    out.push_back(std::move(img));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Encoder

template <typename T>
struct EncoderCache {
  Mat<T> patches;
  std::vector<Segment> segments;
  std::vector<Mat<T>> block_inputs;
  std::vector<typename Block<T>::Cache> blocks;
  Mat<T> final_input;
  typename LayerNorm<T>::Cache ln_post;
  Mat<T> latent_hidden;
};

// Returns z, (batch * N) x token_dim. When `hidden` is given it receives the
// post-norm encoder outputs at the latent positions, (batch * N) x width.
template <typename T>
Mat<T> encoder_forward(const TokenizerModel<T>& m, const Mat<T>& patches,
                       EncoderCache<T>* cache, Mat<T>* hidden = nullptr) {
  const auto& enc = m.encoder;
  const Eigen::Index p = m.config.n_patches();
  const Eigen::Index n = m.config.n_latent_tokens;
  const Eigen::Index stride = p + n;
  const Eigen::Index batch = patches.rows() / p;
  const Eigen::Index width = m.config.encoder_width;

  const Mat<T> embedded = enc.patch_embed.forward(patches);
  Mat<T> x(batch * stride, width);
  std::vector<Segment> segs;
  segs.reserve(static_cast<size_t>(batch));
  for (Eigen::Index b = 0; b < batch; ++b) {
    x.middleRows(b * stride, p) = embedded.middleRows(b * p, p) + enc.patch_pos;
    x.middleRows(b * stride + p, n) = enc.latent_tokens;
    segs.push_back({b * stride, stride});
  }
  if (cache) {
    cache->patches = patches;
    cache->blocks.resize(enc.blocks.size());
    cache->block_inputs.clear();
  }
  for (size_t i = 0; i < enc.blocks.size(); ++i) {
    if (cache) cache->block_inputs.push_back(x);
    x = enc.blocks[i].forward(x, segs, cache ? &cache->blocks[i] : nullptr);
  }
  const Mat<T> normed = enc.ln_post.forward(x, cache ? &cache->ln_post : nullptr);
  Mat<T> latent_hidden(batch * n, width);
  for (Eigen::Index b = 0; b < batch; ++b) {
    latent_hidden.middleRows(b * n, n) = normed.middleRows(b * stride + p, n);
  }
  Mat<T> z = enc.to_token.forward(latent_hidden);
  if (hidden) *hidden = latent_hidden;
  if (cache) {
    cache->segments = std::move(segs);
    cache->latent_hidden = std::move(latent_hidden);
  }
  return z;
}

template <typename T>
void encoder_backward(const TokenizerModel<T>& m, const EncoderCache<T>& cache,
                      const Mat<T>& d_z, TokenizerModel<T>& grad) {
  const auto& enc = m.encoder;
  auto& g = grad.encoder;
  const Eigen::Index p = m.config.n_patches();
  const Eigen::Index n = m.config.n_latent_tokens;
  const Eigen::Index stride = p + n;
  const Eigen::Index batch = cache.patches.rows() / p;

  const Mat<T> d_hidden = enc.to_token.backward(cache.latent_hidden, d_z, g.to_token);
  Mat<T> d_normed = Mat<T>::Zero(batch * stride, m.config.encoder_width);
  for (Eigen::Index b = 0; b < batch; ++b) {
    d_normed.middleRows(b * stride + p, n) = d_hidden.middleRows(b * n, n);
  }
  Mat<T> dx = enc.ln_post.backward(d_normed, cache.ln_post, g.ln_post);
  for (size_t i = enc.blocks.size(); i-- > 0;) {
    dx = enc.blocks[i].backward(dx, cache.segments, cache.blocks[i], g.blocks[i]);
  }
  Mat<T> d_embedded(batch * p, m.config.encoder_width);
  for (Eigen::Index b = 0; b < batch; ++b) {
    d_embedded.middleRows(b * p, p) = dx.middleRows(b * stride, p);
    g.patch_pos += dx.middleRows(b * stride, p);
    g.latent_tokens += dx.middleRows(b * stride + p, n);
  }
  enc.patch_embed.backward_params(cache.patches, d_embedded, g.patch_embed);
}

// ---------------------------------------------------------------------------
// Decoder

template <typename T>
struct DecoderCache {
  Mat<T> token_rows;
  std::vector<int> lengths;
  std::vector<Segment> segments;
  std::vector<typename Block<T>::Cache> blocks;
  typename LayerNorm<T>::Cache ln_post;
  Mat<T> mask_hidden;
  Mat<T> upscaled;  // pre-activation, pixel rows
  Mat<T> activated;
  typename Conv3x3<T>::Cache conv;
};

// `token_rows` stacks each sample's quantized embeddings, lengths[b] rows for
// sample b. Returns unclamped pixel rows, (batch * H * W) x channels.
template <typename T>
Mat<T> decoder_forward(const TokenizerModel<T>& m, const Mat<T>& token_rows,
                       std::span<const int> lengths, DecoderCache<T>* cache) {
  const auto& dec = m.decoder;
  const Eigen::Index p = m.config.n_patches();
  const Eigen::Index width = m.config.decoder_width;
  const Eigen::Index batch = static_cast<Eigen::Index>(lengths.size());
  Eigen::Index total = 0;
  for (int len : lengths) {
    require(len >= 1 && len <= m.config.n_latent_tokens, ErrorKind::kInvalidInput,
            "token count " + std::to_string(len) + " outside [1, " +
                std::to_string(m.config.n_latent_tokens) + "]");
    total += len;
  }
  require(token_rows.rows() == total, ErrorKind::kInvalidInput, "token rows / lengths mismatch");

  const Mat<T> embedded = dec.token_embed.forward(token_rows);
  const Mat<T> masks = dec.mask_pos.rowwise() + dec.mask_token.row(0);
  Mat<T> x(batch * p + total, width);
  std::vector<Segment> segs;
  segs.reserve(static_cast<size_t>(batch));
  Eigen::Index offset = 0, src = 0;
  for (Eigen::Index b = 0; b < batch; ++b) {
    const Eigen::Index len = lengths[static_cast<size_t>(b)];
    x.middleRows(offset, p) = masks;
    x.middleRows(offset + p, len) = embedded.middleRows(src, len) + dec.token_pos.topRows(len);
    segs.push_back({offset, p + len});
    offset += p + len;
    src += len;
  }
  if (cache) cache->blocks.resize(dec.blocks.size());
  for (size_t i = 0; i < dec.blocks.size(); ++i) {
    x = dec.blocks[i].forward(x, segs, cache ? &cache->blocks[i] : nullptr);
  }
  const Mat<T> normed = dec.ln_post.forward(x, cache ? &cache->ln_post : nullptr);
  Mat<T> mask_hidden(batch * p, width);
  for (Eigen::Index b = 0; b < batch; ++b) {
    mask_hidden.middleRows(b * p, p) = normed.middleRows(segs[static_cast<size_t>(b)].offset, p);
  }
  Mat<T> upscaled = m.upscale_layout().to_pixels(dec.to_pixels.forward(mask_hidden));
  Mat<T> activated = gelu(upscaled);
  Mat<T> out = dec.conv.forward(activated, m.config.image_size, cache ? &cache->conv : nullptr);
  if (cache) {
    cache->token_rows = token_rows;
    cache->lengths.assign(lengths.begin(), lengths.end());
    cache->segments = std::move(segs);
    cache->mask_hidden = std::move(mask_hidden);
    cache->upscaled = std::move(upscaled);
    cache->activated = std::move(activated);
  }
  return out;
}

// Returns the gradient with respect to the stacked token embeddings.
template <typename T>
Mat<T> decoder_backward(const TokenizerModel<T>& m, const DecoderCache<T>& cache,
                        const Mat<T>& d_pixels, TokenizerModel<T>& grad) {
  const auto& dec = m.decoder;
  auto& g = grad.decoder;
  const Eigen::Index p = m.config.n_patches();
  const Eigen::Index width = m.config.decoder_width;
  const Eigen::Index batch = static_cast<Eigen::Index>(cache.lengths.size());

  const Mat<T> d_act = dec.conv.backward(d_pixels, m.config.image_size, cache.conv, g.conv);
  const Mat<T> d_up = gelu_backward(cache.upscaled, d_act);
  const Mat<T> d_proj = m.upscale_layout().to_patches(d_up);
  const Mat<T> d_mask_hidden = dec.to_pixels.backward(cache.mask_hidden, d_proj, g.to_pixels);

  const Eigen::Index rows = cache.segments.back().offset + cache.segments.back().length;
  Mat<T> d_normed = Mat<T>::Zero(rows, width);
  for (Eigen::Index b = 0; b < batch; ++b) {
    d_normed.middleRows(cache.segments[static_cast<size_t>(b)].offset, p) =
        d_mask_hidden.middleRows(b * p, p);
  }
  Mat<T> dx = dec.ln_post.backward(d_normed, cache.ln_post, g.ln_post);
  for (size_t i = dec.blocks.size(); i-- > 0;) {
    dx = dec.blocks[i].backward(dx, cache.segments, cache.blocks[i], g.blocks[i]);
  }
  Mat<T> d_embedded(cache.token_rows.rows(), width);
  Eigen::Index src = 0;
  for (Eigen::Index b = 0; b < batch; ++b) {
    const Segment& s = cache.segments[static_cast<size_t>(b)];
    const Eigen::Index len = cache.lengths[static_cast<size_t>(b)];
    g.mask_pos += dx.middleRows(s.offset, p);
    g.mask_token += dx.middleRows(s.offset, p).colwise().sum();
    g.token_pos.topRows(len) += dx.middleRows(s.offset + p, len);
    d_embedded.middleRows(src, len) = dx.middleRows(s.offset + p, len);
    src += len;
  }
  return dec.token_embed.backward(cache.token_rows, d_embedded, g.token_embed);
}

// ---------------------------------------------------------------------------
// Inference API. All functions are const on the model.

template <typename T>
Mat<T> encode_batch(const TokenizerModel<T>& m, std::span<const ImageTensor> images,
                    Mat<T>* hidden = nullptr) {
  const Mat<T> patches = m.input_layout().to_patches(images_to_pixels<T>(images, m.config));
  Mat<T> z = encoder_forward(m, patches, static_cast<EncoderCache<T>*>(nullptr), hidden);
  require(z.allFinite(), ErrorKind::kNumeric, "encoder produced non-finite activations");
  return z;
}

// N x token_dim continuous latents for one image.
template <typename T>
LatentSequence<T> encode(const ImageTensor& image, const TokenizerModel<T>& m) {
  return encode_batch(m, std::span<const ImageTensor>(&image, 1));
}

// Full-length token sequences, one per image.
template <typename T>
std::vector<TokenSequence> tokenize_batch(const TokenizerModel<T>& m,
                                          std::span<const ImageTensor> images) {
  const Mat<T> z = encode_batch(m, images);
  const Quantized<T> q = quantize(z, m.codebook);
  const size_t n = static_cast<size_t>(m.config.n_latent_tokens);
  std::vector<TokenSequence> out;
  for (size_t b = 0; b < images.size(); ++b) {
    out.emplace_back(q.tokens.begin() + static_cast<std::ptrdiff_t>(b * n),
                     q.tokens.begin() + static_cast<std::ptrdiff_t>((b + 1) * n));
  }
  return out;
}

template <typename T>
TokenSequence tokenize(const ImageTensor& image, const TokenizerModel<T>& m) {
  return tokenize_batch(m, std::span<const ImageTensor>(&image, 1)).front();
}

inline void check_tokens(const TokenSequence& tokens, const ModelConfig& config) {
  require(!tokens.empty() && tokens.size() <= static_cast<size_t>(config.n_latent_tokens),
          ErrorKind::kInvalidInput,
          "token count " + std::to_string(tokens.size()) + " outside [1, " +
              std::to_string(config.n_latent_tokens) + "]");
  for (TokenId id : tokens) {
    require(id < static_cast<TokenId>(config.codebook_size), ErrorKind::kInvalidToken,
            "token id " + std::to_string(id) + " >= codebook size " +
                std::to_string(config.codebook_size));
  }
}

// Decodes sequences of possibly different lengths. Output values in [0, 1].
template <typename T>
std::vector<ImageTensor> decode_batch(const TokenizerModel<T>& m,
                                      std::span<const TokenSequence> sequences) {
  constexpr size_t kChunk = 64;
  std::vector<ImageTensor> out;
  out.reserve(sequences.size());
  for (size_t start = 0; start < sequences.size(); start += kChunk) {
    const size_t end = std::min(sequences.size(), start + kChunk);
    std::vector<int> lengths;
    TokenSequence all;
    for (size_t i = start; i < end; ++i) {
      check_tokens(sequences[i], m.config);
      lengths.push_back(static_cast<int>(sequences[i].size()));
      all.insert(all.end(), sequences[i].begin(), sequences[i].end());
    }
    const Mat<T> pixels = decoder_forward(m, lookup(m.codebook, all), lengths,
                                          static_cast<DecoderCache<T>*>(nullptr));
    require(pixels.allFinite(), ErrorKind::kNumeric, "decoder produced non-finite activations");
    for (auto& img : pixels_to_images(pixels, m.config, /*clamp=*/true)) {
      out.push_back(std::move(img));
    }
  }
  return out;
}

template <typename T>
ImageTensor decode(const TokenSequence& tokens, const TokenizerModel<T>& m) {
  return decode_batch(m, std::span<const TokenSequence>(&tokens, 1)).front();
}

// decode() for sequences read from files: same contract, ids validated
// against the codebook before any lookup.
template <typename T>
ImageTensor detokenize(const TokenSequence& tokens, const TokenizerModel<T>& m) {
  check_tokens(tokens, m.config);
  return decode(tokens, m);
}

// Mean of the encoder's latent-position outputs, one row per image.
template <typename T>
Mat<T> pooled_features(const TokenizerModel<T>& m, std::span<const ImageTensor> images) {
  constexpr size_t kChunk = 64;
  const Eigen::Index n = m.config.n_latent_tokens;
  Mat<T> out(static_cast<Eigen::Index>(images.size()), m.config.encoder_width);
  for (size_t start = 0; start < images.size(); start += kChunk) {
    const size_t end = std::min(images.size(), start + kChunk);
    Mat<T> hidden;
    encode_batch(m, images.subspan(start, end - start), &hidden);
    for (size_t b = start; b < end; ++b) {
      out.row(static_cast<Eigen::Index>(b)) =
          hidden.middleRows(static_cast<Eigen::Index>(b - start) * n, n).colwise().mean();
    }
  }
  return out;
}

}  // namespace onedp

#endif  // ONEDP_MODEL_HPP_

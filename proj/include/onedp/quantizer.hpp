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

#ifndef ONEDP_QUANTIZER_HPP_
#define ONEDP_QUANTIZER_HPP_

#include <cstdint>
#include <limits>
#include <vector>

#include "onedp/error.hpp"
#include "onedp/tensor.hpp"

namespace onedp {

using TokenId = std::uint32_t;

// Ordered token ids; a full-length sequence has N entries, a truncated one
// is a prefix of it.
using TokenSequence = std::vector<TokenId>;

// One latent embedding per row.
template <typename T>
using LatentSequence = Mat<T>;

template <typename T>
struct Codebook {
  Mat<T> entries;                          // K x token_dim
  std::vector<std::uint64_t> usage_counts;  // training bookkeeping, not a parameter

  Codebook() = default;
  Codebook(int size, int dim) : entries(Mat<T>::Zero(size, dim)), usage_counts(size, 0) {}

  template <class F, class... S>
  static void visit(F&& f, S&... s) {
    f("entries", false, s.entries...);
  }

  int size() const { return static_cast<int>(entries.rows()); }
  int dim() const { return static_cast<int>(entries.cols()); }
};

template <typename T>
struct Quantized {
  TokenSequence tokens;
  Mat<T> embeddings;  // embeddings.row(i) == codebook.entries.row(tokens[i])
};

// Nearest codebook row per latent row by squared Euclidean distance, ties to
// the lowest index. Distances accumulate dimension by dimension in order, so
// the result matches a naive double loop bit for bit.
template <typename T>
Quantized<T> quantize(const Mat<T>& latents, const Codebook<T>& codebook) {
  require(codebook.size() > 0, ErrorKind::kConfig, "empty codebook");
  require(latents.cols() == codebook.dim(), ErrorKind::kInvalidInput,
          "latent dimension does not match codebook");
  const Eigen::Index k = codebook.size();
  const Eigen::Index dim = codebook.dim();
  const Mat<T> transposed = codebook.entries.transpose();
  Eigen::Array<T, 1, Eigen::Dynamic> dist(k);
  Quantized<T> out;
  out.tokens.resize(static_cast<size_t>(latents.rows()));
  out.embeddings.resize(latents.rows(), dim);
  for (Eigen::Index r = 0; r < latents.rows(); ++r) {
    dist.setZero();
    for (Eigen::Index d = 0; d < dim; ++d) {
      dist += (latents(r, d) - transposed.row(d).array()).square();
    }
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < k; ++j) {
      if (dist[j] < dist[best]) best = j;
    }
    out.tokens[r] = static_cast<TokenId>(best);
    out.embeddings.row(r) = codebook.entries.row(best);
  }
  return out;
}

template <typename T>
Mat<T> lookup(const Codebook<T>& codebook, const TokenSequence& tokens) {
  Mat<T> out(static_cast<Eigen::Index>(tokens.size()), codebook.dim());
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] >= static_cast<TokenId>(codebook.size())) {
      fail(ErrorKind::kInvalidToken, "token id " + std::to_string(tokens[i]) +
                                         " >= codebook size " + std::to_string(codebook.size()));
    }
    out.row(static_cast<Eigen::Index>(i)) = codebook.entries.row(tokens[i]);
  }
  return out;
}

// Commitment and codebook losses share the same forward value, the mean of
// (z - c)^2; they differ only in which side receives the gradient.
template <typename T>
double vq_mse(const Mat<T>& latents, const Mat<T>& quantized) {
  return static_cast<double>((latents - quantized).squaredNorm()) /
         static_cast<double>(latents.size());
}

// Backward through the quantizer. The decoder-side gradient passes to the
// latents unchanged (straight-through); the commitment term pulls latents
// toward their codes and the codebook term pulls codes toward the latents.
template <typename T>
Mat<T> straight_through_backward(const Mat<T>& latents, const Quantized<T>& q,
                                 const Mat<T>& d_quantized, double commitment_weight,
                                 double codebook_weight, Mat<T>& d_codebook) {
  const T n = static_cast<T>(latents.size());
  const Mat<T> diff = latents - q.embeddings;
  Mat<T> d_latents = d_quantized + diff * static_cast<T>(2.0 * commitment_weight) / n;
  const T cb_scale = static_cast<T>(-2.0 * codebook_weight) / n;
  for (Eigen::Index r = 0; r < latents.rows(); ++r) {
    d_codebook.row(q.tokens[static_cast<size_t>(r)]) += diff.row(r) * cb_scale;
  }
  return d_latents;
}

}  // namespace onedp

#endif  // ONEDP_QUANTIZER_HPP_

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

// Tail Token Drop: during training, keep a uniformly sampled prefix of the
// quantized token sequence so that information concentrates at the head.

#ifndef ONEDP_TAIL_TOKEN_DROP_HPP_
#define ONEDP_TAIL_TOKEN_DROP_HPP_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "onedp/config.hpp"
#include "onedp/error.hpp"
#include "onedp/tensor.hpp"

namespace onedp {

struct DropPolicy {
  int n_max = 1;  // N, the full sequence length
  DropGranularity granularity = DropGranularity::kPerBatch;
  std::uint64_t rng_seed = 0;
  bool enabled = true;

  void validate() const {
    require(n_max >= 1, ErrorKind::kConfig, "drop policy: n_max must be >= 1");
  }

  static DropPolicy from(const TtdConfig& ttd, int n_latent_tokens) {
    return DropPolicy{n_latent_tokens, ttd.granularity, ttd.seed, ttd.enabled};
  }
};

// Keep length L uniform over {1, ..., N}, i.e. L = N - k with k ~ U(0, N - 1).
inline int sample_keep_length(const DropPolicy& policy, Rng& rng) {
  policy.validate();
  std::uniform_int_distribution<int> dist(1, policy.n_max);
  return dist(rng);
}

// Exact prefix of length `keep`; the input is not modified.
template <typename Seq>
Seq truncate(const Seq& seq, size_t keep) {
  require(keep >= 1 && keep <= seq.size(), ErrorKind::kInvalidInput,
          "truncate length " + std::to_string(keep) + " outside [1, " +
              std::to_string(seq.size()) + "]");
  return Seq(seq.begin(), seq.begin() + static_cast<std::ptrdiff_t>(keep));
}

template <typename T>
Mat<T> truncate_rows(const Mat<T>& rows, Eigen::Index keep) {
  require(keep >= 1 && keep <= rows.rows(), ErrorKind::kInvalidInput,
          "truncate length " + std::to_string(keep) + " outside [1, " +
              std::to_string(rows.rows()) + "]");
  return rows.topRows(keep);
}

// Owns the drop stream, which is independent of weight-init and data order.
class TailTokenDrop {
 public:
  explicit TailTokenDrop(const DropPolicy& policy)
      : policy_(policy), rng_(make_stream(policy.rng_seed, StreamTag::kTailDrop)) {
    policy_.validate();
  }

  // One keep length per sample. Per-batch granularity repeats a single draw.
  // Disabled policies keep everything and consume no randomness.
  std::vector<int> keep_lengths(int batch_size) {
    std::vector<int> out(static_cast<size_t>(batch_size), policy_.n_max);
    if (!policy_.enabled) return out;
    if (policy_.granularity == DropGranularity::kPerBatch) {
      const int keep = sample_keep_length(policy_, rng_);
      std::fill(out.begin(), out.end(), keep);
    } else {
      for (int& keep : out) keep = sample_keep_length(policy_, rng_);
    }
    return out;
  }

  const DropPolicy& policy() const { return policy_; }

 private:
  DropPolicy policy_;
  Rng rng_;
};

}  // namespace onedp

#endif  // ONEDP_TAIL_TOKEN_DROP_HPP_

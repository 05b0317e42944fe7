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

#ifndef ONEDP_TENSOR_HPP_
#define ONEDP_TENSOR_HPP_

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

#include <Eigen/Dense>

namespace onedp {

// Activations are stored one token (or pixel) per row.
template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename T>
using RowVec = Eigen::Matrix<T, 1, Eigen::Dynamic>;

using Rng = std::mt19937_64;

// Independent RNG streams are keyed by (seed, tag). Tags keep the weight-init,
// data-order, augmentation and tail-drop streams from sharing state.
enum class StreamTag : std::uint32_t {
  kInit = 1,
  kDataOrder = 2,
  kAugment = 3,
  kTailDrop = 4,
  kReseed = 5,
  kAnalysis = 6,
  kProbe = 7,
  kSynth = 8,
};

inline Rng make_stream(std::uint64_t seed, StreamTag tag, std::uint64_t index = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

// Normal(0, stddev) truncated to +-2 stddev by rejection.
template <typename T>
void fill_trunc_normal(Mat<T>& m, double stddev, Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    double v;
    do {
      v = dist(rng);
    } while (std::abs(v) > 2.0);
    m.data()[i] = static_cast<T>(v * stddev);
  }
}

template <typename T>
void fill_uniform(Mat<T>& m, double lo, double hi, Rng& rng) {
  std::uniform_real_distribution<double> dist(lo, hi);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<T>(dist(rng));
}

// Neumaier summation; metric reductions should not depend on summation order
// beyond rounding of the final result.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

template <typename T>
bool all_finite(const Mat<T>& m) {
  return m.allFinite();
}

}  // namespace onedp

#endif  // ONEDP_TENSOR_HPP_

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

#ifndef ONEDP_OPTIMIZER_HPP_
#define ONEDP_OPTIMIZER_HPP_

#include <cmath>
#include <numbers>
#include <string>

#include "onedp/config.hpp"
#include "onedp/model.hpp"

namespace onedp {

// Linear warmup to `lr`, then cosine decay to `end_lr` at total_steps.
struct CosineSchedule {
  double lr = 1e-4;
  double end_lr = 1e-5;
  int warmup_steps = 0;
  int total_steps = 1;

  double at(int step) const {
    if (warmup_steps > 0 && step < warmup_steps) {
      return lr * static_cast<double>(step + 1) / warmup_steps;
    }
    const int decay_steps = std::max(1, total_steps - warmup_steps);
    const double progress =
        std::clamp(static_cast<double>(step - warmup_steps) / decay_steps, 0.0, 1.0);
    return end_lr + 0.5 * (lr - end_lr) * (1.0 + std::cos(std::numbers::pi * progress));
  }
};

template <typename T>
double global_grad_norm(TokenizerModel<T>& grad) {
  double sq = 0.0;
  TokenizerModel<T>::visit(
      [&](const std::string&, bool, Mat<T>& g) { sq += static_cast<double>(g.squaredNorm()); },
      grad);
  return std::sqrt(sq);
}

// Scales gradients so their global L2 norm is at most max_norm; returns the
// norm before clipping.
template <typename T>
double clip_grad_norm(TokenizerModel<T>& grad, double max_norm) {
  const double norm = global_grad_norm(grad);
  if (max_norm > 0.0 && norm > max_norm) {
    const T scale = static_cast<T>(max_norm / (norm + 1e-12));
    TokenizerModel<T>::visit([&](const std::string&, bool, Mat<T>& g) { g *= scale; }, grad);
  }
  return norm;
}

// AdamW with decoupled weight decay on matrices flagged for decay.
template <typename T>
class AdamW {
 public:
  AdamW(const TokenizerModel<T>& model, const TrainConfig& config)
      : config_(config), m_(zeros_like(model)), v_(zeros_like(model)) {}

  void step(TokenizerModel<T>& model, TokenizerModel<T>& grad, double lr) {
    ++t_;
    const double bc1 = 1.0 - std::pow(config_.beta1, t_);
    const double bc2 = 1.0 - std::pow(config_.beta2, t_);
    const T b1 = static_cast<T>(config_.beta1), b2 = static_cast<T>(config_.beta2);
    const T step_size = static_cast<T>(lr / bc1);
    const T inv_bc2 = static_cast<T>(1.0 / bc2);
    const T eps = static_cast<T>(config_.eps);
    const T decay = static_cast<T>(1.0 - lr * config_.weight_decay);
    const T cb_scale = static_cast<T>(config_.codebook_lr_scale);
    TokenizerModel<T>::visit(
        [&](const std::string& name, bool decays, Mat<T>& w, Mat<T>& g, Mat<T>& m, Mat<T>& v) {
          const T scale = name.starts_with("codebook.") ? cb_scale : T(1);
          if (decays) w *= decay;
          m = b1 * m + (T(1) - b1) * g;
          v = b2 * v + (T(1) - b2) * g.cwiseProduct(g);
          w.array() -= scale * step_size * m.array() / ((v.array() * inv_bc2).sqrt() + eps);
        },
        model, grad, m_, v_);
  }

  // Forget moment estimates for one codebook row (after re-seeding it).
  void reset_codebook_row(Eigen::Index row) {
    m_.codebook.entries.row(row).setZero();
    v_.codebook.entries.row(row).setZero();
  }

  long steps_taken() const { return t_; }

 private:
  TrainConfig config_;
  TokenizerModel<T> m_;
  TokenizerModel<T> v_;
  long t_ = 0;
};

}  // namespace onedp

#endif  // ONEDP_OPTIMIZER_HPP_

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

#ifndef ONEDP_TRAINER_HPP_
#define ONEDP_TRAINER_HPP_

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "onedp/checkpoint.hpp"
#include "onedp/config.hpp"
#include "onedp/dataset.hpp"
#include "onedp/log.hpp"
#include "onedp/model.hpp"
#include "onedp/optimizer.hpp"
#include "onedp/quantizer.hpp"
#include "onedp/tail_token_drop.hpp"

namespace onedp {

struct LossReport {
  double l2_recon = 0.0;
  double commitment = 0.0;
  double codebook_loss = 0.0;
  double extra = 0.0;  // weighted perceptual + adversarial hook terms
  double total = 0.0;
  int kept_length = 0;
  double lr = 0.0;
  double grad_norm = 0.0;
};

inline constexpr const char* kLossLogHeader = "step,lr,kept_length,l2,commitment,codebook,total";

// Extension point for loss terms that need external networks (perceptual
// features, a discriminator). Receives reconstructed and target pixel rows;
// returns the unweighted loss and its gradient w.r.t. the reconstruction.
struct HookLoss {
  double value = 0.0;
  Mat<float> d_recon;
};
using LossHook = std::function<HookLoss(const Mat<float>& recon, const Mat<float>& target)>;

class Trainer {
 public:
  Trainer(Model& model, const Config& config, int total_steps)
      : model_(model),
        config_(config),
        optimizer_(model, config.train),
        drop_(DropPolicy::from(config.ttd, model.config.n_latent_tokens)),
        grad_(zeros_like(model)),
        reseed_rng_(make_stream(config.train.seed, StreamTag::kReseed)),
        schedule_{config.train.lr, config.train.end_lr, config.train.warmup_steps, total_steps},
        usage_snapshot_(model.codebook.usage_counts) {
    config_.validate();
    require(config.model == model.config, ErrorKind::kConfig,
            "trainer config does not match the model's config");
  }

  void set_perceptual_hook(LossHook hook) { perceptual_ = std::move(hook); }
  void set_gan_hook(LossHook hook) { gan_ = std::move(hook); }

  int step() const { return step_; }
  const CosineSchedule& schedule() const { return schedule_; }

  // One optimizer update on `batch`. Samples the keep length(s), truncates
  // the quantized sequence before the decoder, and backpropagates through
  // the quantizer with the straight-through estimator.
  LossReport train_step(std::span<const ImageTensor> batch) {
    const ModelConfig& mc = model_.config;
    const LossWeights& w = config_.loss;
    require(!batch.empty(), ErrorKind::kInvalidInput, "empty batch");
    require(w.perceptual == 0.0 || perceptual_, ErrorKind::kConfig,
            "loss.perceptual > 0 needs a registered perceptual hook");
    require(w.gan == 0.0 || gan_, ErrorKind::kConfig, "loss.gan > 0 needs a registered GAN hook");

    const Eigen::Index n = mc.n_latent_tokens;
    const Mat<float> target = images_to_pixels<float>(batch, mc);
    const Mat<float> patches = model_.input_layout().to_patches(target);

    EncoderCache<float> enc_cache;
    const Mat<float> z = encoder_forward(model_, patches, &enc_cache);
    if (step_ == 0 && config_.train.codebook_data_init && codebook_never_used()) {
      reseed_dead_entries(z);
    }
    const Quantized<float> q = quantize(z, model_.codebook);
    for (TokenId id : q.tokens) ++model_.codebook.usage_counts[id];

    const std::vector<int> keep = drop_.keep_lengths(static_cast<int>(batch.size()));
    Eigen::Index kept_rows = 0;
    for (int k : keep) kept_rows += k;
    Mat<float> token_rows(kept_rows, mc.token_dim);
    for (size_t b = 0, dst = 0; b < batch.size(); dst += static_cast<size_t>(keep[b]), ++b) {
      token_rows.middleRows(static_cast<Eigen::Index>(dst), keep[b]) =
          q.embeddings.middleRows(static_cast<Eigen::Index>(b) * n, keep[b]);
    }

    DecoderCache<float> dec_cache;
    const Mat<float> recon = decoder_forward(model_, token_rows, keep, &dec_cache);
    const Mat<float> diff = recon - target;

    LossReport report;
    report.lr = schedule_.at(step_);
    report.kept_length = representative_length(keep);
    report.l2_recon = static_cast<double>(diff.squaredNorm()) / static_cast<double>(diff.size());
    report.commitment = vq_mse(z, q.embeddings);
    report.codebook_loss = report.commitment;

    Mat<float> d_recon = diff * static_cast<float>(2.0 * w.reconstruction / diff.size());
    auto apply_hook = [&](const LossHook& hook, double weight) {
      if (weight == 0.0) return;
      HookLoss h = hook(recon, target);
      report.extra += weight * h.value;
      d_recon += h.d_recon * static_cast<float>(weight);
    };
    apply_hook(perceptual_, w.perceptual);
    apply_hook(gan_, w.gan);
    report.total = w.reconstruction * report.l2_recon + w.commitment * report.commitment +
                   w.codebook * report.codebook_loss + report.extra;
    if (!std::isfinite(report.total)) {
      fail(ErrorKind::kNumeric, "non-finite loss at step " + std::to_string(step_) +
                                    " (lr=" + std::to_string(report.lr) +
                                    ", kept_length=" + std::to_string(report.kept_length) + ")");
    }

    const Mat<float> d_tokens = decoder_backward(model_, dec_cache, d_recon, grad_);
    Mat<float> d_quantized = Mat<float>::Zero(z.rows(), z.cols());
    for (size_t b = 0, src = 0; b < batch.size(); src += static_cast<size_t>(keep[b]), ++b) {
      d_quantized.middleRows(static_cast<Eigen::Index>(b) * n, keep[b]) =
          d_tokens.middleRows(static_cast<Eigen::Index>(src), keep[b]);
    }
    const Mat<float> d_z = straight_through_backward(z, q, d_quantized, w.commitment, w.codebook,
                                                     grad_.codebook.entries);
    encoder_backward(model_, enc_cache, d_z, grad_);

    report.grad_norm = clip_grad_norm(grad_, config_.train.grad_clip);
    if (!std::isfinite(report.grad_norm)) {
      fail(ErrorKind::kNumeric, "non-finite gradient at step " + std::to_string(step_) +
                                    " (lr=" + std::to_string(report.lr) +
                                    ", kept_length=" + std::to_string(report.kept_length) + ")");
    }
    optimizer_.step(model_, grad_, report.lr);
    Model::visit([](const std::string&, bool, Mat<float>& g) { g.setZero(); }, grad_);

    ++step_;
    if (config_.train.reseed_every > 0 && step_ % config_.train.reseed_every == 0) {
      reseed_dead_entries(z);
    }
    return report;
  }

  // Entries unused since the previous check are replaced by latents from the
  // current batch plus small noise; returns how many were replaced.
  int reseed_dead_entries(const Mat<float>& latents) {
    auto& cb = model_.codebook;
    std::uniform_int_distribution<Eigen::Index> pick(0, latents.rows() - 1);
    const double spread = std::sqrt(
        std::max(1e-12, static_cast<double>((latents.rowwise() - latents.colwise().mean())
                                                .squaredNorm()) /
                            static_cast<double>(latents.size())));
    std::normal_distribution<double> noise(0.0, 0.1 * spread);
    int replaced = 0;
    for (Eigen::Index k = 0; k < cb.entries.rows(); ++k) {
      const size_t i = static_cast<size_t>(k);
      if (cb.usage_counts[i] == usage_snapshot_[i]) {
        cb.entries.row(k) = latents.row(pick(reseed_rng_));
        for (Eigen::Index d = 0; d < cb.entries.cols(); ++d) {
          cb.entries(k, d) += static_cast<float>(noise(reseed_rng_));
        }
        optimizer_.reset_codebook_row(k);
        ++replaced;
      }
    }
    usage_snapshot_ = cb.usage_counts;
    log::debug("re-seeded " + std::to_string(replaced) + " codebook entries");
    return replaced;
  }

 private:
  bool codebook_never_used() const {
    for (auto c : model_.codebook.usage_counts) {
      if (c != 0) return false;
    }
    return true;
  }

  static int representative_length(const std::vector<int>& keep) {
    double sum = 0.0;
    for (int k : keep) sum += k;
    return static_cast<int>(std::lround(sum / static_cast<double>(keep.size())));
  }

  Model& model_;
  Config config_;
  AdamW<float> optimizer_;
  TailTokenDrop drop_;
  Model grad_;
  Rng reseed_rng_;
  CosineSchedule schedule_;
  std::vector<std::uint64_t> usage_snapshot_;
  LossHook perceptual_;
  LossHook gan_;
  int step_ = 0;
};

inline std::string format_loss_row(int step, const LossReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%d,%.9g,%d,%.9g,%.9g,%.9g,%.9g", step, r.lr, r.kept_length,
                r.l2_recon, r.commitment, r.codebook_loss, r.total);
  return buf;
}

inline int total_steps(const TrainConfig& tc, size_t dataset_size) {
  if (tc.steps > 0) return tc.steps;
  const size_t per_epoch = (dataset_size + static_cast<size_t>(tc.batch_size) - 1) /
                           static_cast<size_t>(tc.batch_size);
  return static_cast<int>(per_epoch) * tc.epochs;
}

struct FitResult {
  std::filesystem::path checkpoint;
  std::filesystem::path loss_log;
  int steps = 0;
  double seconds = 0.0;
  std::vector<LossReport> reports;
};

using ProgressFn = std::function<void(int step, int total, const LossReport&)>;

// Trains `model` in place on `dataset`, writing out_dir/loss_log.csv,
// periodic out_dir/step_<n>.ckpt and the final out_dir/final.ckpt.
inline FitResult fit(const Dataset& dataset, Model& model, const Config& config,
                     const std::filesystem::path& out_dir, const ProgressFn& progress = {}) {
  require(!dataset.empty(), ErrorKind::kIngestion, "empty dataset");
  config.validate();
  std::filesystem::create_directories(out_dir);
  const int steps = total_steps(config.train, dataset.size());
  Trainer trainer(model, config, steps);
  BatchStream stream(dataset, config.train.batch_size,
                     {config.train.random_crop, config.train.random_flip}, config.train.seed);

  FitResult result;
  result.loss_log = out_dir / "loss_log.csv";
  result.steps = steps;
  const std::filesystem::path log_tmp = result.loss_log.string() + ".tmp";
  std::ofstream log_out(log_tmp, std::ios::trunc);
  require(log_out.good(), ErrorKind::kIo, "cannot write '" + log_tmp.string() + "'");
  log_out << kLossLogHeader << '\n';

  CheckpointMeta meta;
  meta.seed = config.train.seed;
  meta.train = to_json(config);

  const auto start = std::chrono::steady_clock::now();
  for (int s = 0; s < steps; ++s) {
    const std::vector<ImageTensor> batch = stream.next();
    LossReport r = trainer.train_step(batch);
    log_out << format_loss_row(s, r) << '\n';
    result.reports.push_back(r);
    if (progress) progress(s, steps, r);
    if (config.train.checkpoint_every > 0 && (s + 1) % config.train.checkpoint_every == 0 &&
        s + 1 < steps) {
      meta.step = static_cast<std::uint64_t>(s + 1);
      save_checkpoint(out_dir / ("step_" + std::to_string(s + 1) + ".ckpt"), model, meta);
    }
  }
  log_out.close();
  std::filesystem::rename(log_tmp, result.loss_log);
  meta.step = static_cast<std::uint64_t>(steps);
  result.checkpoint = out_dir / "final.ckpt";
  save_checkpoint(result.checkpoint, model, meta);
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

// Trailing mean over `window` reports ending at index `end` (exclusive).
inline double smoothed_total(const std::vector<LossReport>& reports, size_t end, size_t window) {
  require(end >= 1 && end <= reports.size(), ErrorKind::kInvalidInput, "bad smoothing range");
  const size_t begin = end > window ? end - window : 0;
  double sum = 0.0;
  for (size_t i = begin; i < end; ++i) sum += reports[i].total;
  return sum / static_cast<double>(end - begin);
}

inline double codebook_usage_fraction(const Model& model) {
  size_t used = 0;
  for (auto c : model.codebook.usage_counts) used += c > 0;
  return static_cast<double>(used) / static_cast<double>(model.codebook.usage_counts.size());
}

}  // namespace onedp

#endif  // ONEDP_TRAINER_HPP_

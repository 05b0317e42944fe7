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

// Token analyses: per-position contribution by random replacement,
// first-token clustering and swapping, and linear probing of pooled encoder
// features.
//
// Randomized analyses draw from substreams keyed by (seed, item index), so
// results do not depend on how items are batched or ordered.

#ifndef ONEDP_ANALYSIS_HPP_
#define ONEDP_ANALYSIS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "onedp/dataset.hpp"
#include "onedp/error.hpp"
#include "onedp/image.hpp"
#include "onedp/metrics.hpp"
#include "onedp/model.hpp"
#include "onedp/plot.hpp"
#include "onedp/tensor.hpp"

namespace onedp {

// Uniform id in [0, k) other than `original`.
inline TokenId replacement_token(TokenId original, int k, Rng& rng) {
  require(k >= 2, ErrorKind::kConfig, "replacement needs a codebook of at least 2 entries");
  std::uniform_int_distribution<TokenId> pick(0, static_cast<TokenId>(k - 2));
  const TokenId r = pick(rng);
  return r >= original ? r + 1 : r;
}

struct ContributionReport {
  std::vector<double> per_token_l1;        // N values
  std::vector<Mat<double>> per_token_map;  // N maps, H x W
  int trials = 0;
  std::uint64_t seed = 0;
};

// Trial t of item j draws its N replacement ids, in position order, from
// stream (seed + t, kAnalysis, j). A run with `trials` trials therefore
// averages exactly the single-trial runs with seeds seed .. seed+trials-1.
inline ContributionReport token_contribution(const Model& model,
                                             std::span<const ImageTensor> images, int trials,
                                             std::uint64_t seed) {
  require(trials >= 1, ErrorKind::kInvalidInput, "trials must be >= 1");
  require(!images.empty(), ErrorKind::kInvalidInput, "token_contribution needs images");
  const int n = model.config.n_latent_tokens;
  const int k = model.config.codebook_size;
  const int side = model.config.image_size;
  const std::vector<TokenSequence> tokens = tokenize_batch(model, images);
  const std::vector<ImageTensor> base = decode_batch(model, std::span(tokens));

  std::vector<Mat<double>> sums(static_cast<size_t>(n), Mat<double>::Zero(side, side));
  for (size_t j = 0; j < images.size(); ++j) {
    for (int t = 0; t < trials; ++t) {
      Rng rng = make_stream(seed + static_cast<std::uint64_t>(t), StreamTag::kAnalysis, j);
      std::vector<TokenSequence> edited(static_cast<size_t>(n), tokens[j]);
      for (int i = 0; i < n; ++i) {
        auto& id = edited[static_cast<size_t>(i)][static_cast<size_t>(i)];
        id = replacement_token(id, k, rng);
      }
      const std::vector<ImageTensor> out = decode_batch(model, std::span(edited));
      for (int i = 0; i < n; ++i) {
        const ImageTensor& a = out[static_cast<size_t>(i)];
        const ImageTensor& b = base[j];
        Mat<double>& acc = sums[static_cast<size_t>(i)];
        for (int y = 0; y < side; ++y)
          for (int x = 0; x < side; ++x) {
            double d = 0;
            for (int c = 0; c < a.channels; ++c) {
              d += std::abs(static_cast<double>(a.at(y, x, c)) - b.at(y, x, c));
            }
            acc(y, x) += d / a.channels;
          }
      }
    }
  }
  ContributionReport report;
  report.trials = trials;
  report.seed = seed;
  const double count = static_cast<double>(images.size()) * trials;
  for (auto& m : sums) {
    m /= count;
    report.per_token_l1.push_back(m.mean());
    report.per_token_map.push_back(std::move(m));
  }
  return report;
}

// Mean contribution of the first ceil(N/8) positions over that of the last
// ceil(N/8).
inline double head_tail_ratio(std::span<const double> per_token_l1) {
  require(!per_token_l1.empty(), ErrorKind::kInvalidInput, "empty contribution profile");
  const size_t n = per_token_l1.size();
  const size_t h = (n + 7) / 8;
  double head = 0, tail = 0;
  for (size_t i = 0; i < h; ++i) {
    head += per_token_l1[i];
    tail += per_token_l1[n - h + i];
  }
  return head / tail;
}

inline std::string contribution_csv(const ContributionReport& r) {
  std::string out = "position,l1\n";
  for (size_t i = 0; i < r.per_token_l1.size(); ++i) {
    out += std::to_string(i + 1) + "," + format_metric(r.per_token_l1[i]) + "\n";
  }
  return out;
}

struct ClusterReport {
  std::map<TokenId, std::vector<size_t>> clusters;  // first token -> image indices
  size_t total = 0;
};

inline ClusterReport first_token_cluster(const Model& model, std::span<const ImageTensor> images) {
  ClusterReport report;
  const std::vector<TokenSequence> tokens = tokenize_batch(model, images);
  for (size_t i = 0; i < tokens.size(); ++i) report.clusters[tokens[i].front()].push_back(i);
  report.total = images.size();
  return report;
}

// Largest clusters first, ties by token id.
inline std::vector<std::pair<TokenId, size_t>> cluster_sizes(const ClusterReport& r) {
  std::vector<std::pair<TokenId, size_t>> out;
  for (const auto& [id, members] : r.clusters) out.emplace_back(id, members.size());
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return out;
}

inline std::string cluster_csv(const ClusterReport& r) {
  std::string out = "first_token,count\n";
  for (const auto& [id, count] : cluster_sizes(r)) {
    out += std::to_string(id) + "," + std::to_string(count) + "\n";
  }
  return out;
}

struct SwapPair {
  ImageTensor original;
  ImageTensor swapped;
};

// Decodes [r, q_2..q_n] next to [q_1..q_n].
inline SwapPair first_token_swap(const Model& model, const ImageTensor& image,
                                 TokenId replacement_id, int n_tokens) {
  require(replacement_id < static_cast<TokenId>(model.config.codebook_size),
          ErrorKind::kInvalidToken,
          "replacement id " + std::to_string(replacement_id) + " >= codebook size " +
              std::to_string(model.config.codebook_size));
  require(n_tokens >= 1 && n_tokens <= model.config.n_latent_tokens, ErrorKind::kInvalidInput,
          "n_tokens " + std::to_string(n_tokens) + " outside [1, " +
              std::to_string(model.config.n_latent_tokens) + "]");
  TokenSequence tokens = tokenize(image, model);
  tokens.resize(static_cast<size_t>(n_tokens));
  std::vector<TokenSequence> pair = {tokens, tokens};
  pair[1].front() = replacement_id;
  std::vector<ImageTensor> out = decode_batch(model, std::span(pair));
  return {std::move(out[0]), std::move(out[1])};
}

// Replacement first tokens for a swap study: image j takes the first token
// of a partner drawn from stream (seed, kAnalysis, j); when the partner
// shares its first token, a random different id is used instead.
inline std::vector<TokenId> swap_partners(const std::vector<TokenSequence>& tokens, int k,
                                          std::uint64_t seed) {
  std::vector<TokenId> out;
  for (size_t j = 0; j < tokens.size(); ++j) {
    Rng rng = make_stream(seed, StreamTag::kAnalysis, j);
    std::uniform_int_distribution<size_t> pick(0, tokens.size() - 1);
    const TokenId own = tokens[j].front();
    const TokenId other = tokens[pick(rng)].front();
    out.push_back(other != own ? other : replacement_token(own, k, rng));
  }
  return out;
}

// Mean L1 between original and first-token-swapped reconstructions at each
// prefix length, with the same replacement per image for every length.
inline std::vector<double> swap_gaps(const Model& model, std::span<const ImageTensor> images,
                                     std::span<const int> lengths, std::uint64_t seed) {
  require(!images.empty(), ErrorKind::kInvalidInput, "swap_gaps needs images");
  const std::vector<TokenSequence> tokens = tokenize_batch(model, images);
  const std::vector<TokenId> partners = swap_partners(tokens, model.config.codebook_size, seed);
  std::vector<double> gaps;
  for (int n : lengths) {
    require(n >= 1 && n <= model.config.n_latent_tokens, ErrorKind::kInvalidInput,
            "length " + std::to_string(n) + " outside [1, " +
                std::to_string(model.config.n_latent_tokens) + "]");
    std::vector<TokenSequence> seqs;
    for (size_t j = 0; j < tokens.size(); ++j) {
      TokenSequence t(tokens[j].begin(), tokens[j].begin() + n);
      seqs.push_back(t);
      t.front() = partners[j];
      seqs.push_back(std::move(t));
    }
    const std::vector<ImageTensor> out = decode_batch(model, std::span(seqs));
    CompensatedSum s;
    for (size_t j = 0; j < tokens.size(); ++j) s.add(l1_error(out[2 * j], out[2 * j + 1]));
    gaps.push_back(s.value() / static_cast<double>(tokens.size()));
  }
  return gaps;
}

struct ProbeConfig {
  int epochs = 50;
  int batch_size = 64;
  double lr = 0.1;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
};

struct ProbeResult {
  double accuracy = 0;
  size_t n_train = 0;
  size_t n_test = 0;
  int n_classes = 0;
};

struct ProbeSplit {
  std::vector<size_t> train;
  std::vector<size_t> test;
};

// Stratified split: within each class, a seeded shuffle assigns the first
// round(test_fraction * size) members to the test set.
inline ProbeSplit probe_split(std::span<const int> labels, double test_fraction,
                              std::uint64_t seed) {
  require(test_fraction > 0 && test_fraction < 1, ErrorKind::kInvalidInput,
          "test_fraction must be in (0, 1)");
  std::map<int, std::vector<size_t>> by_class;
  for (size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  Rng rng = make_stream(seed, StreamTag::kProbe, 0);
  ProbeSplit split;
  for (auto& [label, members] : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    const size_t n_test = static_cast<size_t>(std::lround(test_fraction * members.size()));
    for (size_t i = 0; i < members.size(); ++i) {
      (i < n_test ? split.test : split.train).push_back(members[i]);
    }
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  require(!split.train.empty() && !split.test.empty(), ErrorKind::kInvalidInput,
          "probe split left an empty train or test set");
  return split;
}

// Multinomial logistic regression on standardized features, trained with
// minibatch SGD and momentum. Rows of `features` are samples.
inline ProbeResult probe_features(const Eigen::MatrixXd& features, std::span<const int> labels,
                                  const ProbeConfig& cfg) {
  require(static_cast<size_t>(features.rows()) == labels.size(), ErrorKind::kInvalidInput,
          "feature and label counts differ");
  require(cfg.epochs >= 1 && cfg.batch_size >= 1 && cfg.lr > 0, ErrorKind::kConfig,
          "probe epochs, batch_size and lr must be positive");
  const int n_classes = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<int> present(static_cast<size_t>(std::max(n_classes, 0)), 0);
  for (int l : labels) {
    require(l >= 0, ErrorKind::kInvalidInput, "negative label");
    present[static_cast<size_t>(l)] = 1;
  }
  require(std::accumulate(present.begin(), present.end(), 0) >= 2, ErrorKind::kInvalidInput,
          "linear probe needs at least 2 classes");

  const ProbeSplit split = probe_split(labels, cfg.test_fraction, cfg.seed);
  const Eigen::Index d = features.cols();
  Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(d), sd = Eigen::RowVectorXd::Zero(d);
  for (size_t i : split.train) mean += features.row(static_cast<Eigen::Index>(i));
  mean /= static_cast<double>(split.train.size());
  for (size_t i : split.train) {
    sd += (features.row(static_cast<Eigen::Index>(i)) - mean).array().square().matrix();
  }
  sd = (sd / static_cast<double>(split.train.size())).cwiseSqrt();
  for (Eigen::Index j = 0; j < d; ++j) {
    if (!(sd(j) > 1e-12)) sd(j) = 1.0;
  }
  auto row = [&](size_t i) -> Eigen::RowVectorXd {
    return (features.row(static_cast<Eigen::Index>(i)) - mean).cwiseQuotient(sd);
  };

  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(d, n_classes);
  Eigen::RowVectorXd b = Eigen::RowVectorXd::Zero(n_classes);
  Eigen::MatrixXd vw = w;
  Eigen::RowVectorXd vb = b;
  Rng rng = make_stream(cfg.seed, StreamTag::kProbe, 1);
  std::vector<size_t> order = split.train;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(cfg.batch_size)) {
      const size_t end = std::min(order.size(), start + static_cast<size_t>(cfg.batch_size));
      Eigen::MatrixXd gw = Eigen::MatrixXd::Zero(d, n_classes);
      Eigen::RowVectorXd gb = Eigen::RowVectorXd::Zero(n_classes);
      for (size_t s = start; s < end; ++s) {
        const Eigen::RowVectorXd x = row(order[s]);
        Eigen::RowVectorXd logits = x * w + b;
        logits.array() -= logits.maxCoeff();
        Eigen::RowVectorXd p = logits.array().exp().matrix();
        p /= p.sum();
        p(labels[order[s]]) -= 1.0;
        gw.noalias() += x.transpose() * p;
        gb += p;
      }
      const double inv = 1.0 / static_cast<double>(end - start);
      vw = cfg.momentum * vw + (gw * inv + cfg.weight_decay * w);
      vb = cfg.momentum * vb + gb * inv;
      w -= cfg.lr * vw;
      b -= cfg.lr * vb;
    }
  }

  size_t correct = 0;
  for (size_t i : split.test) {
    Eigen::Index pred = 0;
    (row(i) * w + b).maxCoeff(&pred);
    correct += static_cast<int>(pred) == labels[i];
  }
  ProbeResult r;
  r.accuracy = static_cast<double>(correct) / static_cast<double>(split.test.size());
  r.n_train = split.train.size();
  r.n_test = split.test.size();
  r.n_classes = n_classes;
  return r;
}

inline Eigen::MatrixXd encoder_features(const Model& model, std::span<const ImageTensor> images) {
  return pooled_features(model, images).cast<double>();
}

inline Eigen::MatrixXd pixel_features(std::span<const ImageTensor> images) {
  require(!images.empty(), ErrorKind::kInvalidInput, "pixel_features needs images");
  Eigen::MatrixXd out(static_cast<Eigen::Index>(images.size()),
                      static_cast<Eigen::Index>(images.front().size()));
  for (size_t i = 0; i < images.size(); ++i) {
    require(images[i].same_shape(images.front()), ErrorKind::kInvalidInput,
            "pixel_features needs same-shaped images");
    for (size_t j = 0; j < images[i].size(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = images[i].data[j];
    }
  }
  return out;
}

// Labels permuted by a seeded shuffle; the chance-level control.
inline std::vector<int> shuffled_labels(std::span<const int> labels, std::uint64_t seed) {
  std::vector<int> out(labels.begin(), labels.end());
  Rng rng = make_stream(seed, StreamTag::kProbe, 2);
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

inline ProbeResult linear_probe(const Model& model, const Dataset& dataset,
                                const ProbeConfig& cfg = {}) {
  require(!dataset.empty(), ErrorKind::kInvalidInput, "linear probe needs a labeled dataset");
  return probe_features(encoder_features(model, dataset.images), dataset.labels, cfg);
}

struct ProbeStudy {
  ProbeResult encoder;
  ProbeResult shuffled;
  ProbeResult pixels;
  // Binomial standard deviation of accuracy at chance 1/C on the test set.
  double chance_sigma = 0;
  // (encoder - shuffled) / chance_sigma.
  double margin_sigmas = 0;
};

inline ProbeStudy probe_study(const Model& model, const Dataset& dataset,
                              const ProbeConfig& cfg = {}) {
  require(!dataset.empty(), ErrorKind::kInvalidInput, "linear probe needs a labeled dataset");
  const Eigen::MatrixXd feats = encoder_features(model, dataset.images);
  ProbeStudy s;
  s.encoder = probe_features(feats, dataset.labels, cfg);
  s.shuffled = probe_features(feats, shuffled_labels(dataset.labels, cfg.seed), cfg);
  s.pixels = probe_features(pixel_features(dataset.images), dataset.labels, cfg);
  const double p = 1.0 / s.encoder.n_classes;
  s.chance_sigma = std::sqrt(p * (1 - p) / static_cast<double>(s.encoder.n_test));
  s.margin_sigmas = (s.encoder.accuracy - s.shuffled.accuracy) / s.chance_sigma;
  return s;
}

}  // namespace onedp

#endif  // ONEDP_ANALYSIS_HPP_

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

// Reconstruction metrics and the rate-distortion sweep.
//
// Images are compared in [0, 1] with MAX = 1. SSIM runs on the channel-mean
// grayscale image with an 8x8 uniform window at stride 1 and constants
// C1 = 0.01^2, C2 = 0.03^2; window variances are population variances.

#ifndef ONEDP_METRICS_HPP_
#define ONEDP_METRICS_HPP_

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "onedp/codec.hpp"
#include "onedp/dataset.hpp"
#include "onedp/error.hpp"
#include "onedp/image.hpp"
#include "onedp/log.hpp"
#include "onedp/model.hpp"
#include "onedp/tensor.hpp"

namespace onedp {

inline constexpr int kSsimWindow = 8;

namespace detail {

inline void check_same_shape(const ImageTensor& a, const ImageTensor& b) {
  require(a.same_shape(b), ErrorKind::kInvalidInput,
          "image shapes differ: " + std::to_string(a.height) + "x" + std::to_string(a.width) +
              "x" + std::to_string(a.channels) + " vs " + std::to_string(b.height) + "x" +
              std::to_string(b.width) + "x" + std::to_string(b.channels));
}

}  // namespace detail

inline double l1_error(const ImageTensor& a, const ImageTensor& b) {
  detail::check_same_shape(a, b);
  CompensatedSum s;
  for (size_t i = 0; i < a.size(); ++i) {
    s.add(std::abs(static_cast<double>(a.data[i]) - static_cast<double>(b.data[i])));
  }
  return a.size() ? s.value() / static_cast<double>(a.size()) : 0.0;
}

inline double l2_error(const ImageTensor& a, const ImageTensor& b) {
  detail::check_same_shape(a, b);
  CompensatedSum s;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a.data[i]) - static_cast<double>(b.data[i]);
    s.add(d * d);
  }
  return a.size() ? s.value() / static_cast<double>(a.size()) : 0.0;
}

// +infinity when mse == 0.
inline double psnr_from_mse(double mse) {
  if (mse <= 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

inline double psnr(const ImageTensor& a, const ImageTensor& b) {
  return psnr_from_mse(l2_error(a, b));
}

inline double ssim(const ImageTensor& a, const ImageTensor& b, int window = kSsimWindow) {
  detail::check_same_shape(a, b);
  require(window >= 1 && a.height >= window && a.width >= window, ErrorKind::kInvalidInput,
          "image " + std::to_string(a.height) + "x" + std::to_string(a.width) +
              " is smaller than the SSIM window " + std::to_string(window));
  constexpr double c1 = 0.01 * 0.01;
  constexpr double c2 = 0.03 * 0.03;
  const ImageTensor ga = to_gray(a);
  const ImageTensor gb = to_gray(b);
  const double n = static_cast<double>(window) * window;
  CompensatedSum total;
  int count = 0;
  for (int y = 0; y + window <= a.height; ++y) {
    for (int x = 0; x + window <= a.width; ++x) {
      double sa = 0, sb = 0;
      for (int dy = 0; dy < window; ++dy)
        for (int dx = 0; dx < window; ++dx) {
          sa += ga.at(y + dy, x + dx, 0);
          sb += gb.at(y + dy, x + dx, 0);
        }
      const double ma = sa / n, mb = sb / n;
      double va = 0, vb = 0, cov = 0;
      for (int dy = 0; dy < window; ++dy)
        for (int dx = 0; dx < window; ++dx) {
          const double da = ga.at(y + dy, x + dx, 0) - ma;
          const double db = gb.at(y + dy, x + dx, 0) - mb;
          va += da * da;
          vb += db * db;
          cov += da * db;
        }
      va /= n;
      vb /= n;
      cov /= n;
      total.add(((2 * ma * mb + c1) * (2 * cov + c2)) /
                ((ma * ma + mb * mb + c1) * (va + vb + c2)));
      ++count;
    }
  }
  return total.value() / count;
}

// Symmetric positive semidefinite square root by eigendecomposition;
// negative eigenvalues are clamped to zero.
inline Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  require(es.info() == Eigen::Success, ErrorKind::kNumeric,
          "eigendecomposition failed in matrix square root");
  const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

struct GaussianStats {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;  // unbiased, divisor n - 1
};

// Rows are samples.
inline GaussianStats gaussian_stats(const Eigen::MatrixXd& features) {
  require(features.rows() >= 2, ErrorKind::kInvalidInput,
          "Frechet distance needs at least 2 samples per side");
  GaussianStats s;
  s.mean = features.colwise().mean().transpose();
  const Eigen::MatrixXd centered = features.rowwise() - s.mean.transpose();
  s.cov = (centered.transpose() * centered) / static_cast<double>(features.rows() - 1);
  return s;
}

// ||mu_a - mu_b||^2 + tr(S_a + S_b - 2 (S_a S_b)^(1/2)). The trace of the
// product root is taken as tr sqrt(R S_b R) with R = sqrt(S_a), which shares
// its eigenvalues with S_a S_b and stays symmetric.
inline double frechet_distance(const GaussianStats& a, const GaussianStats& b) {
  require(a.mean.size() == b.mean.size(), ErrorKind::kInvalidInput,
          "feature dimensions differ: " + std::to_string(a.mean.size()) + " vs " +
              std::to_string(b.mean.size()));
  const Eigen::MatrixXd ra = psd_sqrt(a.cov);
  const Eigen::MatrixXd inner = ra * b.cov * ra;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (inner + inner.transpose()),
                                                    Eigen::EigenvaluesOnly);
  require(es.info() == Eigen::Success, ErrorKind::kNumeric,
          "eigendecomposition failed in Frechet distance");
  const double tr_root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  const double d = (a.mean - b.mean).squaredNorm() + a.cov.trace() + b.cov.trace() - 2 * tr_root;
  return std::max(d, 0.0);
}

inline double frechet_feature_distance(const Eigen::MatrixXd& features_a,
                                       const Eigen::MatrixXd& features_b) {
  require(features_a.cols() == features_b.cols(), ErrorKind::kInvalidInput,
          "feature dimensions differ: " + std::to_string(features_a.cols()) + " vs " +
              std::to_string(features_b.cols()));
  return frechet_distance(gaussian_stats(features_a), gaussian_stats(features_b));
}

// Whitespace or comma separated feature vectors, one per line.
inline Eigen::MatrixXd read_feature_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::kIo, "cannot open '" + path.string() + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    for (char& c : line) {
      if (c == ',') c = ' ';
    }
    std::istringstream ss(line);
    std::vector<double> row;
    double v;
    while (ss >> v) row.push_back(v);
    require(ss.eof(), ErrorKind::kInvalidInput,
            path.string() + ": non-numeric value in feature file");
    if (row.empty()) continue;
    require(rows.empty() || row.size() == rows.front().size(), ErrorKind::kInvalidInput,
            path.string() + ": ragged feature rows");
    rows.push_back(std::move(row));
  }
  require(!rows.empty(), ErrorKind::kInvalidInput, path.string() + ": no feature vectors");
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows.front().size()));
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows[i].size(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return out;
}

inline std::string format_metric(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

struct RDPoint {
  int n_tokens = 0;
  size_t payload_bytes = 0;
  double l1 = 0;
  double l2 = 0;
  double psnr = 0;  // of the dataset-mean l2
  double ssim = 0;
  std::optional<double> ffd;
};

struct SweepOptions {
  bool frechet = false;  // pooled encoder features of originals vs reconstructions
};

// Decodes each length-n prefix of every image's full token sequence and
// averages l1, l2 and SSIM over the dataset.
inline std::vector<RDPoint> rd_sweep(const Model& model, std::span<const ImageTensor> images,
                                     std::span<const int> lengths, const SweepOptions& opt = {}) {
  require(!images.empty(), ErrorKind::kInvalidInput, "rd_sweep needs a non-empty dataset");
  require(!lengths.empty(), ErrorKind::kInvalidInput, "rd_sweep needs at least one length");
  for (int n : lengths) {
    require(n >= 1 && n <= model.config.n_latent_tokens, ErrorKind::kInvalidInput,
            "length " + std::to_string(n) + " outside [1, " +
                std::to_string(model.config.n_latent_tokens) + "]");
  }
  const std::vector<TokenSequence> full = tokenize_batch(model, images);
  Eigen::MatrixXd original_features;
  if (opt.frechet) original_features = pooled_features(model, images).cast<double>();
  std::vector<RDPoint> out;
  for (int n : lengths) {
    std::vector<TokenSequence> prefixes;
    prefixes.reserve(full.size());
    for (const TokenSequence& t : full) prefixes.emplace_back(t.begin(), t.begin() + n);
    const std::vector<ImageTensor> recon = decode_batch(model, std::span(prefixes));
    CompensatedSum l1, l2, ss;
    for (size_t i = 0; i < images.size(); ++i) {
      l1.add(l1_error(images[i], recon[i]));
      l2.add(l2_error(images[i], recon[i]));
      ss.add(ssim(images[i], recon[i]));
    }
    const double count = static_cast<double>(images.size());
    RDPoint p;
    p.n_tokens = n;
    p.payload_bytes = payload_size(static_cast<size_t>(n), model.config.bits_per_token());
    p.l1 = l1.value() / count;
    p.l2 = l2.value() / count;
    p.psnr = psnr_from_mse(p.l2);
    p.ssim = ss.value() / count;
    if (opt.frechet) {
      p.ffd = frechet_feature_distance(original_features,
                                       pooled_features(model, std::span(recon)).cast<double>());
    }
    out.push_back(p);
  }
  return out;
}

inline constexpr const char* kRDHeader = "n_tokens,payload_bytes,l1,l2,psnr,ssim,ffd";

// ffd is left empty when it was not computed.
inline std::string rd_csv(std::span<const RDPoint> points) {
  std::string out = std::string(kRDHeader) + "\n";
  for (const RDPoint& p : points) {
    out += std::to_string(p.n_tokens) + "," + std::to_string(p.payload_bytes) + "," +
           format_metric(p.l1) + "," + format_metric(p.l2) + "," + format_metric(p.psnr) + "," +
           format_metric(p.ssim) + "," + (p.ffd ? format_metric(*p.ffd) : "") + "\n";
  }
  return out;
}

inline void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  write_file_atomic(path, std::vector<char>(text.begin(), text.end()));
}

struct MethodMetrics {
  std::string method;
  size_t count = 0;
  double l1 = 0;
  double l2 = 0;
  double psnr = 0;  // mean of per-image PSNR; inf if any pair is identical
  double ssim = 0;
};

// Mean metrics of each reconstruction directory against the originals, over
// the relative PNG paths present in all three directories.
inline std::vector<MethodMetrics> compare_external(
    std::span<const std::filesystem::path> recon_dirs, const std::filesystem::path& originals) {
  namespace fs = std::filesystem;
  require(fs::is_directory(originals), ErrorKind::kIngestion,
          "'" + originals.string() + "' is not a directory");
  for (const fs::path& d : recon_dirs) {
    require(fs::is_directory(d), ErrorKind::kIngestion,
            "'" + d.string() + "' is not a directory");
  }
  std::vector<fs::path> common;
  for (const fs::path& p : list_pngs(originals)) {
    const fs::path rel = fs::relative(p, originals);
    bool all = true;
    for (const fs::path& d : recon_dirs) {
      if (!fs::exists(d / rel)) {
        log::warn("skipping '" + rel.string() + "': missing in '" + d.string() + "'");
        all = false;
      }
    }
    if (all) common.push_back(rel);
  }
  if (common.empty()) log::warn("no filenames shared by all directories; table is empty");

  std::vector<MethodMetrics> out;
  for (const fs::path& d : recon_dirs) {
    MethodMetrics m;
    m.method = d.filename().empty() ? d.parent_path().filename().string() : d.filename().string();
    CompensatedSum l1, l2, ps, ss;
    bool inf_psnr = false;
    for (const fs::path& rel : common) {
      const ImageTensor a = read_png(originals / rel);
      const ImageTensor b = read_png(d / rel);
      if (!a.same_shape(b)) {
        log::warn("skipping '" + (d / rel).string() + "': shape differs from original");
        continue;
      }
      l1.add(l1_error(a, b));
      l2.add(l2_error(a, b));
      const double p = psnr(a, b);
      if (std::isinf(p)) {
        inf_psnr = true;
      } else {
        ps.add(p);
      }
      ss.add(ssim(a, b));
      ++m.count;
    }
    if (m.count > 0) {
      const double c = static_cast<double>(m.count);
      m.l1 = l1.value() / c;
      m.l2 = l2.value() / c;
      m.psnr = inf_psnr ? std::numeric_limits<double>::infinity() : ps.value() / c;
      m.ssim = ss.value() / c;
    }
    out.push_back(m);
  }
  if (common.empty()) out.clear();
  return out;
}

inline constexpr const char* kCompareHeader = "method,count,l1,l2,psnr,ssim";

inline std::string compare_csv(std::span<const MethodMetrics> rows) {
  std::string out = std::string(kCompareHeader) + "\n";
  for (const MethodMetrics& m : rows) {
    out += m.method + "," + std::to_string(m.count) + "," + format_metric(m.l1) + "," +
           format_metric(m.l2) + "," + format_metric(m.psnr) + "," + format_metric(m.ssim) + "\n";
  }
  return out;
}

}  // namespace onedp

#endif  // ONEDP_METRICS_HPP_

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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <vector>

#include "onedp/metrics.hpp"
#include "onedp/model.hpp"
#include "onedp/tail_token_drop.hpp"
#include "test_util.hpp"

namespace onedp {
namespace {

ImageTensor ramp(int h, int w, float scale) {
  ImageTensor img(h, w, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) img.at(y, x, c) = scale * static_cast<float>((y * w + x + c) % 17) / 16.0f;
  return img;
}

ImageTensor add(const ImageTensor& a, float v) {
  ImageTensor b = a;
  for (float& x : b.data) x += v;
  return b;
}

// Plain per-window SSIM in double on the channel-mean gray image, written
// from the definition without reusing the library's helpers.
double reference_ssim(const ImageTensor& a, const ImageTensor& b, int win) {
  auto gray = [](const ImageTensor& img, int y, int x) {
    double s = 0;
    for (int c = 0; c < img.channels; ++c) s += img.at(y, x, c);
    return s / img.channels;
  };
  const double c1 = 1e-4, c2 = 9e-4;
  double total = 0;
  int windows = 0;
  for (int y0 = 0; y0 + win <= a.height; ++y0) {
    for (int x0 = 0; x0 + win <= a.width; ++x0) {
      std::vector<double> pa, pb;
      for (int y = y0; y < y0 + win; ++y)
        for (int x = x0; x < x0 + win; ++x) {
          pa.push_back(gray(a, y, x));
          pb.push_back(gray(b, y, x));
        }
      const double n = static_cast<double>(pa.size());
      double ma = 0, mb = 0;
      for (size_t i = 0; i < pa.size(); ++i) {
        ma += pa[i] / n;
        mb += pb[i] / n;
      }
      double va = 0, vb = 0, cv = 0;
      for (size_t i = 0; i < pa.size(); ++i) {
        va += (pa[i] - ma) * (pa[i] - ma) / n;
        vb += (pb[i] - mb) * (pb[i] - mb) / n;
        cv += (pa[i] - ma) * (pb[i] - mb) / n;
      }
      total += (2 * ma * mb + c1) * (2 * cv + c2) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++windows;
    }
  }
  return total / windows;
}

TEST(Metrics, PsnrOfConstantOffset) {
  const ImageTensor a = ramp(16, 16, 0.9f);
  EXPECT_NEAR(psnr(a, add(a, 0.1f)), 20.0, 1e-5);
  EXPECT_NEAR(psnr_from_mse(0.01), 20.0, 1e-12);
}

TEST(Metrics, PsnrIdenticalIsInfinite) {
  const ImageTensor a = ramp(8, 8, 1.0f);
  EXPECT_TRUE(std::isinf(psnr(a, a)));
  EXPECT_GT(psnr(a, a), 0);
  EXPECT_EQ(format_metric(psnr(a, a)), "inf");
}

TEST(Metrics, L1L2) {
  const ImageTensor a(4, 4, 3, 0.2f);
  const ImageTensor b(4, 4, 3, 0.5f);
  EXPECT_NEAR(l1_error(a, b), 0.3, 1e-7);
  EXPECT_NEAR(l2_error(a, b), 0.09, 1e-7);
  EXPECT_EQ(l2_error(a, a), 0.0);
  EXPECT_ERROR_KIND(l1_error(a, ImageTensor(4, 5, 3)), ErrorKind::kInvalidInput);
}

TEST(Metrics, SsimSelfIsOne) {
  Rng rng(1);
  const ImageTensor a = random_image(12, 12, 3, rng);
  EXPECT_NEAR(ssim(a, a), 1.0, 1e-12);
  const ImageTensor flat(8, 8, 3, 0.3f);
  EXPECT_NEAR(ssim(flat, flat), 1.0, 1e-12);
}

TEST(Metrics, SsimMatchesReference) {
  Rng rng(2);
  for (int t = 0; t < 5; ++t) {
    const ImageTensor a = random_image(11, 13, 3, rng);
    const ImageTensor b = random_image(11, 13, 3, rng);
    EXPECT_NEAR(ssim(a, b), reference_ssim(a, b, 8), 1e-6);
    EXPECT_NEAR(ssim(a, b), ssim(b, a), 1e-12);
    EXPECT_NEAR(ssim(a, b, 3), reference_ssim(a, b, 3), 1e-6);
  }
}

TEST(Metrics, SsimTooSmall) {
  EXPECT_ERROR_KIND(ssim(ImageTensor(7, 7, 3), ImageTensor(7, 7, 3)), ErrorKind::kInvalidInput);
}

TEST(Metrics, FrechetIdenticalIsZero) {
  Rng rng(3);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd f(50, 4);
  for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] = nd(rng);
  const GaussianStats s = gaussian_stats(f);
  EXPECT_NEAR(frechet_distance(s, s), 0.0, 1e-6);
  EXPECT_NEAR(frechet_feature_distance(f, f), 0.0, 1e-6);
}

TEST(Metrics, FrechetMeanShift) {
  GaussianStats a{Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Identity(3, 3)};
  GaussianStats b{Eigen::Vector3d(1.0, -2.0, 0.5), Eigen::MatrixXd::Identity(3, 3)};
  EXPECT_NEAR(frechet_distance(a, b), 1.0 + 4.0 + 0.25, 1e-6);
}

TEST(Metrics, FrechetDiagonalClosedForm) {
  // Commuting diagonal covariances: sum (sqrt(a_i) - sqrt(b_i))^2.
  const Eigen::Vector3d va(1.0, 4.0, 0.25), vb(9.0, 1.0, 0.25);
  GaussianStats a{Eigen::VectorXd::Zero(3), va.asDiagonal().toDenseMatrix()};
  GaussianStats b{Eigen::VectorXd::Zero(3), vb.asDiagonal().toDenseMatrix()};
  double want = 0;
  for (int i = 0; i < 3; ++i) want += std::pow(std::sqrt(va[i]) - std::sqrt(vb[i]), 2);
  EXPECT_NEAR(frechet_distance(a, b), want, 1e-9);
  EXPECT_NEAR(frechet_distance(b, a), want, 1e-9);
}

TEST(Metrics, GaussianStatsUnbiased) {
  Eigen::MatrixXd f(3, 1);
  f << 1, 2, 3;
  const GaussianStats s = gaussian_stats(f);
  EXPECT_DOUBLE_EQ(s.mean[0], 2.0);
  EXPECT_DOUBLE_EQ(s.cov(0, 0), 1.0);
  EXPECT_ERROR_KIND(gaussian_stats(Eigen::MatrixXd(1, 2)), ErrorKind::kInvalidInput);
}

TEST(Metrics, PsdSqrt) {
  Eigen::MatrixXd m(2, 2);
  m << 5, 4, 4, 5;
  const Eigen::MatrixXd r = psd_sqrt(m);
  EXPECT_TRUE((r * r).isApprox(m, 1e-12));
}

TEST(Metrics, FeatureFile) {
  TempDir dir;
  {
    std::ofstream(dir.path / "f.txt") << "1 2\n3,4\n\n5 6\n";
  }
  const Eigen::MatrixXd f = read_feature_file(dir.path / "f.txt");
  ASSERT_EQ(f.rows(), 3);
  EXPECT_EQ(f(1, 1), 4.0);
  {
    std::ofstream(dir.path / "bad.txt") << "1 2\n3\n";
  }
  EXPECT_ERROR_KIND(read_feature_file(dir.path / "bad.txt"), ErrorKind::kInvalidInput);
}

TEST(Metrics, FormatMetric) {
  EXPECT_EQ(format_metric(0.5), "0.5");
  EXPECT_EQ(format_metric(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(format_metric(std::nan("")), "nan");
}

TEST(Metrics, RdSweep) {
  const Model m = init_model<float>(tiny_config(), 0);
  std::vector<ImageTensor> imgs = {test_image(8, 1), test_image(8, 2), test_image(8, 3)};
  const std::vector<int> lengths = {1, 2, 4};
  const auto pts = rd_sweep(m, imgs, lengths, {.frechet = true});
  ASSERT_EQ(pts.size(), 3u);
  for (size_t i = 0; i < pts.size(); ++i) {
    const int n = lengths[i];
    EXPECT_EQ(pts[i].n_tokens, n);
    EXPECT_EQ(pts[i].payload_bytes, static_cast<size_t>((n * 12 + 7) / 8));
    // Oracle: decode each prefix directly and average.
    double l2 = 0;
    for (const auto& img : imgs) l2 += l2_error(img, decode(truncate(tokenize(img, m), n), m));
    EXPECT_NEAR(pts[i].l2, l2 / 3, 1e-9);
    EXPECT_NEAR(pts[i].psnr, psnr_from_mse(pts[i].l2), 1e-12);
    ASSERT_TRUE(pts[i].ffd.has_value());
    EXPECT_GE(*pts[i].ffd, 0.0);
  }
  const std::string csv = rd_csv(pts);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "n_tokens,payload_bytes,l1,l2,psnr,ssim,ffd");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}

TEST(Metrics, RdSweepErrors) {
  const Model m = init_model<float>(tiny_config(), 0);
  std::vector<ImageTensor> none;
  const std::vector<int> ok = {1};
  EXPECT_ERROR_KIND(rd_sweep(m, none, ok), ErrorKind::kInvalidInput);
  std::vector<ImageTensor> one = {test_image(8, 1)};
  const std::vector<int> bad = {5};
  EXPECT_ERROR_KIND(rd_sweep(m, one, bad), ErrorKind::kInvalidInput);
}

TEST(Metrics, CompareExternal) {
  TempDir dir;
  namespace fs = std::filesystem;
  fs::create_directories(dir.path / "orig");
  fs::create_directories(dir.path / "same");
  fs::create_directories(dir.path / "off");
  // Multiples of 1/255 survive the 8-bit PNG round trip exactly.
  ImageTensor a(8, 8, 3, 51.0f / 255);
  ImageTensor b(8, 8, 3, 102.0f / 255);
  write_png(dir.path / "orig" / "x.png", a);
  write_png(dir.path / "orig" / "y.png", a);
  write_png(dir.path / "same" / "x.png", a);
  write_png(dir.path / "same" / "y.png", a);
  write_png(dir.path / "off" / "x.png", b);
  const std::vector<fs::path> dirs = {dir.path / "same", dir.path / "off"};
  const auto rows = compare_external(dirs, dir.path / "orig");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].method, "same");
  EXPECT_EQ(rows[0].count, 1u);  // y.png is missing from "off"
  EXPECT_TRUE(std::isinf(rows[0].psnr));
  EXPECT_NEAR(rows[1].l1, 0.2, 1e-6);
  EXPECT_NEAR(rows[1].psnr, psnr_from_mse(0.04), 1e-4);
  const std::string csv = compare_csv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "method,count,l1,l2,psnr,ssim");

  fs::create_directories(dir.path / "empty");
  const std::vector<fs::path> none = {dir.path / "empty"};
  EXPECT_TRUE(compare_external(none, dir.path / "orig").empty());
  EXPECT_ERROR_KIND(compare_external(none, dir.path / "missing"), ErrorKind::kIngestion);
}

}  // namespace
}  // namespace onedp

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

#include <numeric>
#include <random>
#include <vector>

#include "onedp/tail_token_drop.hpp"
#include "test_util.hpp"

namespace onedp {
namespace {

TEST(Ttd, KeepLengthInRange) {
  DropPolicy p{32};
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    const int k = sample_keep_length(p, rng);
    ASSERT_GE(k, 1);
    ASSERT_LE(k, 32);
  }
}

TEST(Ttd, SingleTokenAlwaysKeepsOne) {
  DropPolicy p{1};
  Rng rng(2);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_keep_length(p, rng), 1);
}

TEST(Ttd, EveryLengthAppears) {
  DropPolicy p{32};
  Rng rng(3);
  std::vector<int> seen(33, 0);
  for (int i = 0; i < 5000; ++i) ++seen[static_cast<size_t>(sample_keep_length(p, rng))];
  for (int k = 1; k <= 32; ++k) EXPECT_GT(seen[static_cast<size_t>(k)], 0) << k;
}

TEST(Ttd, InvalidPolicy) {
  DropPolicy p{0};
  Rng rng(4);
  EXPECT_ERROR_KIND(sample_keep_length(p, rng), ErrorKind::kConfig);
}

TEST(Ttd, TruncateIsPrefix) {
  const std::vector<int> seq = {5, 6, 7, 8};
  EXPECT_EQ(truncate(seq, 4), seq);
  EXPECT_EQ(truncate(seq, 1), std::vector<int>{5});
  EXPECT_EQ(truncate(truncate(seq, 3), 2), truncate(seq, 2));
  EXPECT_ERROR_KIND(truncate(seq, 0), ErrorKind::kInvalidInput);
  EXPECT_ERROR_KIND(truncate(seq, 5), ErrorKind::kInvalidInput);
}

TEST(Ttd, TruncateRows) {
  Mat<float> m(3, 2);
  m << 1, 2, 3, 4, 5, 6;
  const Mat<float> t = truncate_rows(m, 2);
  ASSERT_EQ(t.rows(), 2);
  EXPECT_EQ(t(1, 1), 4.0f);
  EXPECT_ERROR_KIND(truncate_rows(m, 4), ErrorKind::kInvalidInput);
}

TEST(Ttd, PerBatchRepeatsOneDraw) {
  TailTokenDrop drop(DropPolicy{32, DropGranularity::kPerBatch, 9, true});
  for (int i = 0; i < 50; ++i) {
    const auto keep = drop.keep_lengths(8);
    ASSERT_EQ(keep.size(), 8u);
    for (int k : keep) EXPECT_EQ(k, keep[0]);
  }
}

TEST(Ttd, PerSampleVaries) {
  TailTokenDrop drop(DropPolicy{32, DropGranularity::kPerSample, 9, true});
  const auto keep = drop.keep_lengths(64);
  EXPECT_NE(std::count(keep.begin(), keep.end(), keep[0]), 64);
}

TEST(Ttd, DisabledKeepsEverything) {
  TailTokenDrop drop(DropPolicy{32, DropGranularity::kPerBatch, 9, false});
  for (int i = 0; i < 20; ++i) {
    for (int k : drop.keep_lengths(4)) EXPECT_EQ(k, 32);
  }
}

TEST(Ttd, SeededStreamIsReproducible) {
  TailTokenDrop a(DropPolicy{32, DropGranularity::kPerSample, 5, true});
  TailTokenDrop b(DropPolicy{32, DropGranularity::kPerSample, 5, true});
  TailTokenDrop c(DropPolicy{32, DropGranularity::kPerSample, 6, true});
  const auto ka = a.keep_lengths(100);
  EXPECT_EQ(ka, b.keep_lengths(100));
  EXPECT_NE(ka, c.keep_lengths(100));
}

}  // namespace
}  // namespace onedp

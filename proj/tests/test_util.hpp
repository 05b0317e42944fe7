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

#ifndef ONEDP_TESTS_TEST_UTIL_HPP_
#define ONEDP_TESTS_TEST_UTIL_HPP_

#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <string>

#include "onedp/config.hpp"
#include "onedp/error.hpp"
#include "onedp/image.hpp"
#include "onedp/synth.hpp"
#include "onedp/tensor.hpp"

// Expects `stmt` to throw onedp::Error of the given kind.
#define EXPECT_ERROR_KIND(stmt, expected_kind)                                      \
  do {                                                                              \
    try {                                                                           \
      (void)(stmt);                                                                 \
      ADD_FAILURE() << "expected " << ::onedp::to_string(expected_kind) << " from " \
                    << #stmt;                                                       \
    } catch (const ::onedp::Error& e) {                                             \
      EXPECT_EQ(e.kind(), expected_kind) << e.what();                               \
    }                                                                               \
  } while (0)

namespace onedp {

// Small enough for sub-second forward/backward passes.
inline ModelConfig tiny_config() {
  ModelConfig mc;
  mc.image_size = 8;
  mc.patch_size = 4;
  mc.n_latent_tokens = 4;
  mc.codebook_size = 4096;
  mc.token_dim = 4;
  mc.encoder_width = 16;
  mc.encoder_heads = 2;
  mc.decoder_width = 16;
  mc.decoder_heads = 2;
  mc.encoder_depth = 1;
  mc.decoder_depth = 1;
  mc.mlp_ratio = 2;
  mc.upscaler_channels = 4;
  return mc;
}

inline ImageTensor test_image(int size, std::uint64_t seed, int cls = -1) {
  Rng rng = make_stream(seed, StreamTag::kSynth, 1000);
  return synth_image(cls >= 0 ? cls : static_cast<int>(seed % 10), size, rng);
}

inline ImageTensor random_image(int h, int w, int c, Rng& rng) {
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  ImageTensor img(h, w, c);
  for (float& v : img.data) v = u(rng);
  return img;
}

// Fresh directory removed on destruction.
struct TempDir {
  std::filesystem::path path;
  TempDir() {
    static int counter = 0;
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    std::string name = info ? std::string(info->test_suite_name()) + "_" + info->name() : "t";
    for (char& c : name) {
      if (c == '/') c = '_';
    }
    path = std::filesystem::temp_directory_path() /
           ("onedp_test_" + name + "_" + std::to_string(++counter));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

}  // namespace onedp

#endif  // ONEDP_TESTS_TEST_UTIL_HPP_

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

#ifndef ONEDP_CONFIG_HPP_
#define ONEDP_CONFIG_HPP_

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "onedp/error.hpp"

namespace onedp {

using Json = nlohmann::json;

inline constexpr int kConfigVersion = 1;

struct ModelConfig {
  int image_size = 32;
  int channels = 3;
  int patch_size = 4;
  int n_latent_tokens = 32;
  int codebook_size = 4096;
  int token_dim = 12;
  int encoder_width = 64;
  int encoder_depth = 2;
  int encoder_heads = 4;
  int decoder_width = 64;
  int decoder_depth = 2;
  int decoder_heads = 4;
  int mlp_ratio = 4;
  int upscaler_channels = 16;

  int grid() const { return image_size / patch_size; }
  int n_patches() const { return grid() * grid(); }
  int patch_dim() const { return patch_size * patch_size * channels; }

  // ceil(log2(K)); 12 for the default 4096-entry codebook.
  int bits_per_token() const {
    int bits = 0;
    while ((std::uint64_t{1} << bits) < static_cast<std::uint64_t>(codebook_size)) ++bits;
    return bits;
  }

  void validate() const {
    auto check = [](bool ok, const std::string& what) {
      require(ok, ErrorKind::kConfig, "model config: " + what);
    };
    check(image_size > 0 && patch_size > 0, "image_size and patch_size must be positive");
    check(image_size % patch_size == 0, "image_size must be divisible by patch_size");
    check(channels > 0, "channels must be positive");
    check(codebook_size >= 2, "codebook_size must be >= 2");
    check(codebook_size <= (1 << 16), "codebook_size must fit in 16 bits");
    check(token_dim >= 1, "token_dim must be >= 1");
    check(n_latent_tokens >= 1 && n_latent_tokens <= 65535, "n_latent_tokens must be in [1, 65535]");
    check(encoder_width > 0 && encoder_heads > 0 && encoder_width % encoder_heads == 0,
          "encoder_width must be a positive multiple of encoder_heads");
    check(decoder_width > 0 && decoder_heads > 0 && decoder_width % decoder_heads == 0,
          "decoder_width must be a positive multiple of decoder_heads");
    check(encoder_depth >= 0 && decoder_depth >= 0, "depths must be non-negative");
    check(mlp_ratio >= 1 && upscaler_channels >= 1, "mlp_ratio and upscaler_channels must be >= 1");
  }

  bool operator==(const ModelConfig&) const = default;
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ModelConfig, image_size, channels, patch_size,
                                                n_latent_tokens, codebook_size, token_dim,
                                                encoder_width, encoder_depth, encoder_heads,
                                                decoder_width, decoder_depth, decoder_heads,
                                                mlp_ratio, upscaler_channels)

enum class DropGranularity { kPerBatch, kPerSample };

NLOHMANN_JSON_SERIALIZE_ENUM(DropGranularity, {{DropGranularity::kPerBatch, "per_batch"},
                                               {DropGranularity::kPerSample, "per_sample"}})

struct TtdConfig {
  bool enabled = true;
  DropGranularity granularity = DropGranularity::kPerBatch;
  std::uint64_t seed = 0;
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(TtdConfig, enabled, granularity, seed)

// Perceptual and adversarial weights are extension points: non-zero values
// require a registered loss hook (see trainer.hpp).
struct LossWeights {
  double reconstruction = 1.0;
  double commitment = 0.25;
  double codebook = 1.0;
  double perceptual = 0.0;
  double gan = 0.0;
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(LossWeights, reconstruction, commitment, codebook,
                                                perceptual, gan)

struct TrainConfig {
  int epochs = 1;
  int steps = 0;  // when > 0, overrides epochs
  int batch_size = 16;
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.99;
  double weight_decay = 1e-4;
  double eps = 1e-8;
  int warmup_steps = 500;
  double end_lr = 1e-5;
  double grad_clip = 1.0;
  int reseed_every = 500;
  double codebook_lr_scale = 1.0;  // codebook step size relative to lr
  bool codebook_data_init = true;   // seed a never-used codebook from the first batch
  int checkpoint_every = 0;
  bool random_crop = false;
  bool random_flip = true;
  std::uint64_t seed = 0;

  void validate() const {
    auto check = [](bool ok, const std::string& what) {
      require(ok, ErrorKind::kConfig, "train config: " + what);
    };
    check(epochs > 0 || steps > 0, "epochs or steps must be positive");
    check(steps >= 0 && batch_size > 0, "counts must be positive");
    check(lr > end_lr && end_lr >= 0.0, "need lr > end_lr >= 0");
    check(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1, "betas must be in [0, 1)");
    check(eps > 0 && weight_decay >= 0, "eps must be positive, weight_decay non-negative");
    check(warmup_steps >= 0 && reseed_every >= 0 && checkpoint_every >= 0,
          "intervals must be non-negative");
    check(grad_clip >= 0, "grad_clip must be non-negative");
    check(codebook_lr_scale > 0, "codebook_lr_scale must be positive");
  }
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(TrainConfig, epochs, steps, batch_size, lr, beta1,
                                                beta2, weight_decay, eps, warmup_steps, end_lr,
                                                grad_clip, reseed_every, codebook_lr_scale,
                                                codebook_data_init, checkpoint_every,
                                                random_crop, random_flip, seed)

struct Config {
  ModelConfig model;
  TrainConfig train;
  TtdConfig ttd;
  LossWeights loss;

  void validate() const {
    model.validate();
    train.validate();
  }
};

inline Json to_json(const Config& c) {
  Json j;
  j["version"] = kConfigVersion;
  j["model"] = c.model;
  j["train"] = c.train;
  j["ttd"] = c.ttd;
  j["loss"] = c.loss;
  return j;
}

// Unknown keys are rejected so typos in config files and --set overrides do
// not silently fall back to defaults.
inline void check_known_keys(const Json& given, const Json& schema, const std::string& prefix) {
  for (auto it = given.begin(); it != given.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    require(schema.contains(it.key()), ErrorKind::kConfig, "unknown config key '" + key + "'");
    if (it.value().is_object() && schema[it.key()].is_object()) {
      check_known_keys(it.value(), schema[it.key()], key);
    }
  }
}

inline Config config_from_json(const Json& j) {
  check_known_keys(j, to_json(Config{}), "");
  if (j.contains("version")) {
    require(j["version"].get<int>() == kConfigVersion, ErrorKind::kConfig,
            "unsupported config version " + j["version"].dump());
  }
  Config c;
  try {
    if (j.contains("model")) c.model = j["model"].get<ModelConfig>();
    if (j.contains("train")) c.train = j["train"].get<TrainConfig>();
    if (j.contains("ttd")) c.ttd = j["ttd"].get<TtdConfig>();
    if (j.contains("loss")) c.loss = j["loss"].get<LossWeights>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kConfig, std::string("bad config value: ") + e.what());
  }
  c.validate();
  return c;
}

inline Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::kConfig, "cannot open config '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::kConfig, "cannot parse '" + path.string() + "': " + e.what());
  }
}

// Applies "section.key=value" overrides. Values are parsed as JSON literals,
// falling back to a bare string (so ttd.granularity=per_sample works).
inline Json apply_overrides(Json j, const std::vector<std::string>& overrides) {
  const Json schema = to_json(Config{});
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    require(eq != std::string::npos && eq > 0, ErrorKind::kConfig,
            "override '" + kv + "' is not key=value");
    const std::string key = kv.substr(0, eq);
    const std::string raw = kv.substr(eq + 1);
    const auto dot = key.find('.');
    require(dot != std::string::npos, ErrorKind::kConfig,
            "override key '" + key + "' must be section.key");
    const std::string section = key.substr(0, dot);
    const std::string field = key.substr(dot + 1);
    require(schema.contains(section) && schema[section].is_object() &&
                schema[section].contains(field),
            ErrorKind::kConfig, "unknown config key '" + key + "'");
    Json value;
    try {
      value = Json::parse(raw);
    } catch (const nlohmann::json::parse_error&) {
      value = raw;
    }
    j[section][field] = value;
  }
  return j;
}

// defaults < config file < overrides
inline Config load_config(const std::filesystem::path& path,
                          const std::vector<std::string>& overrides = {}) {
  Json j = path.empty() ? Json::object() : read_json_file(path);
  return config_from_json(apply_overrides(std::move(j), overrides));
}

}  // namespace onedp

#endif  // ONEDP_CONFIG_HPP_

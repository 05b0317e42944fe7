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

// Checkpoint archive, little-endian:
//
//   "ONEDPCK1"                 8-byte magic
//   u32 format version (1)
//   u32 n, n bytes             JSON header: config and seed metadata
//   u32 parameter count
//   per parameter: u16 name length, name, u32 rows, u32 cols,
//                  rows * cols float32 values (row-major)
//   u32 K, K x u64             codebook usage counts
//
// Parameters appear in visit order, so save -> load -> save is byte-exact.

#ifndef ONEDP_CHECKPOINT_HPP_
#define ONEDP_CHECKPOINT_HPP_

#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "onedp/config.hpp"
#include "onedp/error.hpp"
#include "onedp/model.hpp"

namespace onedp {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

inline constexpr std::array<char, 8> kCheckpointMagic = {'O', 'N', 'E', 'D', 'P', 'C', 'K', '1'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointMeta {
  std::uint64_t seed = 0;
  std::uint64_t step = 0;
  Json train;  // training configuration the weights came from, if any
};

// FNV-1a 64 over parameter names, shapes and raw float bytes. Used as the
// model_id of token stream files.
inline std::uint64_t fingerprint(const Model& model) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* data, size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  };
  Model copy = model;
  Model::visit(
      [&](const std::string& name, bool, Mat<float>& w) {
        mix(name.data(), name.size());
        const std::uint32_t shape[2] = {static_cast<std::uint32_t>(w.rows()),
                                        static_cast<std::uint32_t>(w.cols())};
        mix(shape, sizeof(shape));
        mix(w.data(), static_cast<size_t>(w.size()) * sizeof(float));
      },
      copy);
  return h;
}

// 16 lowercase hex digits.
inline std::string format_model_id(std::uint64_t id) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(id));
  return buf;
}

namespace detail {

class Writer {
 public:
  void bytes(const void* data, size_t n) {
    const auto* p = static_cast<const char*>(data);
    buf_.insert(buf_.end(), p, p + n);
  }
  template <typename U>
  void pod(U v) {
    bytes(&v, sizeof(v));
  }
  const std::vector<char>& buffer() const { return buf_; }

 private:
  std::vector<char> buf_;
};

class Reader {
 public:
  explicit Reader(std::vector<char> buf) : buf_(std::move(buf)) {}
  void bytes(void* out, size_t n) {
    require(pos_ + n <= buf_.size(), ErrorKind::kCorruptStream, "checkpoint truncated");
    std::memcpy(out, buf_.data() + pos_, n);
    pos_ += n;
  }
  template <typename U>
  U pod() {
    U v;
    bytes(&v, sizeof(v));
    return v;
  }
  std::string str(size_t n) {
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
  }
  bool done() const { return pos_ == buf_.size(); }

 private:
  std::vector<char> buf_;
  size_t pos_ = 0;
};

}  // namespace detail

// Writes to a temporary sibling, then renames over the destination.
inline void write_file_atomic(const std::filesystem::path& path, const std::vector<char>& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(out.good(), ErrorKind::kIo, "cannot open '" + tmp.string() + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    require(out.good(), ErrorKind::kIo, "write to '" + tmp.string() + "' failed");
  }
  std::filesystem::rename(tmp, path);
}

inline std::vector<char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorKind::kIo, "cannot open '" + path.string() + "'");
  return std::vector<char>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline std::vector<char> serialize_checkpoint(const Model& model, const CheckpointMeta& meta) {
  detail::Writer w;
  w.bytes(kCheckpointMagic.data(), kCheckpointMagic.size());
  w.pod(kCheckpointVersion);
  Json header;
  header["config_version"] = kConfigVersion;
  header["model"] = model.config;
  header["seed"] = meta.seed;
  header["step"] = meta.step;
  if (!meta.train.is_null()) header["train"] = meta.train;
  const std::string text = header.dump();
  w.pod(static_cast<std::uint32_t>(text.size()));
  w.bytes(text.data(), text.size());

  std::vector<std::pair<std::string, const Mat<float>*>> params;
  Model copy = model;
  Model::visit([&](const std::string& name, bool, Mat<float>& m) { params.emplace_back(name, &m); },
               copy);
  w.pod(static_cast<std::uint32_t>(params.size()));
  for (const auto& [name, m] : params) {
    w.pod(static_cast<std::uint16_t>(name.size()));
    w.bytes(name.data(), name.size());
    w.pod(static_cast<std::uint32_t>(m->rows()));
    w.pod(static_cast<std::uint32_t>(m->cols()));
    w.bytes(m->data(), static_cast<size_t>(m->size()) * sizeof(float));
  }
  w.pod(static_cast<std::uint32_t>(model.codebook.usage_counts.size()));
  for (std::uint64_t c : model.codebook.usage_counts) w.pod(c);
  return w.buffer();
}

inline void save_checkpoint(const std::filesystem::path& path, const Model& model,
                            const CheckpointMeta& meta = {}) {
  write_file_atomic(path, serialize_checkpoint(model, meta));
}

struct LoadedCheckpoint {
  Model model;
  CheckpointMeta meta;
};

inline LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  detail::Reader r(read_file(path));
  std::array<char, 8> magic{};
  r.bytes(magic.data(), magic.size());
  require(magic == kCheckpointMagic, ErrorKind::kCorruptStream,
          "'" + path.string() + "' is not a checkpoint");
  const auto version = r.pod<std::uint32_t>();
  require(version == kCheckpointVersion, ErrorKind::kUnsupportedVersion,
          "unsupported checkpoint version " + std::to_string(version));
  const auto header_len = r.pod<std::uint32_t>();
  Json header;
  try {
    header = Json::parse(r.str(header_len));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kCorruptStream, std::string("bad checkpoint header: ") + e.what());
  }
  require(header.value("config_version", 0) == kConfigVersion, ErrorKind::kUnsupportedVersion,
          "unsupported config version in checkpoint");
  LoadedCheckpoint out;
  out.model = make_model<float>(header.at("model").get<ModelConfig>());
  out.meta.seed = header.value("seed", std::uint64_t{0});
  out.meta.step = header.value("step", std::uint64_t{0});
  if (header.contains("train")) out.meta.train = header["train"];

  const auto count = r.pod<std::uint32_t>();
  size_t seen = 0;
  Model::visit(
      [&](const std::string& name, bool, Mat<float>& m) {
        require(seen < count, ErrorKind::kCorruptStream, "checkpoint has too few parameters");
        const auto len = r.pod<std::uint16_t>();
        const std::string stored = r.str(len);
        require(stored == name, ErrorKind::kCorruptStream,
                "checkpoint parameter '" + stored + "' where '" + name + "' expected");
        const auto rows = r.pod<std::uint32_t>();
        const auto cols = r.pod<std::uint32_t>();
        require(rows == m.rows() && cols == m.cols(), ErrorKind::kCorruptStream,
                "shape mismatch for '" + name + "'");
        r.bytes(m.data(), static_cast<size_t>(m.size()) * sizeof(float));
        ++seen;
      },
      out.model);
  require(seen == count, ErrorKind::kCorruptStream, "checkpoint has extra parameters");
  const auto k = r.pod<std::uint32_t>();
  require(k == out.model.codebook.usage_counts.size(), ErrorKind::kCorruptStream,
          "usage count table size mismatch");
  for (auto& c : out.model.codebook.usage_counts) c = r.pod<std::uint64_t>();
  require(r.done(), ErrorKind::kCorruptStream, "trailing bytes in checkpoint");
  require(out.model.codebook.entries.allFinite(), ErrorKind::kCorruptStream,
          "non-finite codebook entry");
  return out;
}

}  // namespace onedp

#endif  // ONEDP_CHECKPOINT_HPP_

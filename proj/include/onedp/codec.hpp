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

// The .1dp token stream format.
//
//   offset  size  field
//   0       4     magic "1DPC"
//   4       1     version (1)
//   5       1     flags (reserved, 0)
//   6       2     width, big-endian
//   8       2     height, big-endian
//   10      2     token_count L, big-endian, >= 1
//   12      1     bits_per_token
//   13      8     model_id, big-endian fingerprint of the model weights
//   21      ...   payload, ceil(L * bits_per_token / 8) bytes
//
// Tokens are packed MSB-first in sequence order; trailing pad bits are zero.

#ifndef ONEDP_CODEC_HPP_
#define ONEDP_CODEC_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "onedp/checkpoint.hpp"
#include "onedp/error.hpp"
#include "onedp/image.hpp"
#include "onedp/log.hpp"
#include "onedp/model.hpp"
#include "onedp/quantizer.hpp"

namespace onedp {

inline constexpr std::array<std::uint8_t, 4> kStreamMagic = {'1', 'D', 'P', 'C'};
inline constexpr std::uint8_t kStreamVersion = 1;
inline constexpr size_t kStreamHeaderSize = 21;
inline constexpr int kMaxBitsPerToken = 16;

// Strict parsing rejects nonzero pad bits, nonzero flags and model_id
// mismatches; lenient parsing logs a warning and continues.
enum class ParseMode { kStrict, kLenient };

using Bytes = std::vector<std::uint8_t>;

inline size_t payload_size(size_t token_count, int bits_per_token) {
  return (token_count * static_cast<size_t>(bits_per_token) + 7) / 8;
}

inline size_t stream_file_size(size_t token_count, int bits_per_token) {
  return kStreamHeaderSize + payload_size(token_count, bits_per_token);
}

namespace detail {

inline void check_bits(int bits) {
  require(bits >= 1 && bits <= kMaxBitsPerToken, ErrorKind::kInvalidInput,
          "bits_per_token " + std::to_string(bits) + " outside [1, 16]");
}

inline void complain(ParseMode mode, const std::string& msg) {
  if (mode == ParseMode::kStrict) fail(ErrorKind::kCorruptStream, msg);
  log::warn(msg);
}

}  // namespace detail

inline Bytes pack_tokens(const TokenSequence& tokens, int bits_per_token) {
  detail::check_bits(bits_per_token);
  const std::uint64_t limit = std::uint64_t{1} << bits_per_token;
  Bytes out(payload_size(tokens.size(), bits_per_token), 0);
  std::uint32_t acc = 0;  // pending bits, right-aligned
  int pending = 0;
  size_t pos = 0;
  for (TokenId t : tokens) {
    if (t >= limit) {
      fail(ErrorKind::kInvalidToken, "token id " + std::to_string(t) + " does not fit in " +
                                         std::to_string(bits_per_token) + " bits");
    }
    acc = (acc << bits_per_token) | t;
    pending += bits_per_token;
    while (pending >= 8) {
      pending -= 8;
      out[pos++] = static_cast<std::uint8_t>(acc >> pending);
    }
    acc &= (1u << pending) - 1;
  }
  if (pending > 0) out[pos] = static_cast<std::uint8_t>(acc << (8 - pending));
  return out;
}

inline TokenSequence unpack_tokens(std::span<const std::uint8_t> payload, size_t token_count,
                                   int bits_per_token, ParseMode mode = ParseMode::kStrict) {
  detail::check_bits(bits_per_token);
  const size_t expected = payload_size(token_count, bits_per_token);
  require(payload.size() == expected, ErrorKind::kCorruptStream,
          "payload is " + std::to_string(payload.size()) + " bytes, expected " +
              std::to_string(expected));
  TokenSequence out;
  out.reserve(token_count);
  std::uint32_t acc = 0;
  int pending = 0;
  size_t pos = 0;
  const std::uint32_t mask = (1u << bits_per_token) - 1;
  for (size_t i = 0; i < token_count; ++i) {
    while (pending < bits_per_token) {
      acc = (acc << 8) | payload[pos++];
      pending += 8;
    }
    pending -= bits_per_token;
    out.push_back((acc >> pending) & mask);
    acc &= (1u << pending) - 1;
  }
  if (acc != 0) detail::complain(mode, "nonzero pad bits in token payload");
  return out;
}

struct StreamHeader {
  std::uint8_t version = kStreamVersion;
  std::uint8_t flags = 0;
  std::uint16_t width = 0;
  std::uint16_t height = 0;
  std::uint16_t token_count = 0;
  std::uint8_t bits_per_token = 0;
  std::uint64_t model_id = 0;

  bool operator==(const StreamHeader&) const = default;
};

struct TokenStreamFile {
  StreamHeader header;
  TokenSequence tokens;
};

inline Bytes serialize_stream(const TokenStreamFile& file) {
  const StreamHeader& h = file.header;
  require(!file.tokens.empty() && file.tokens.size() <= 0xFFFF, ErrorKind::kInvalidInput,
          "token count " + std::to_string(file.tokens.size()) + " outside [1, 65535]");
  require(h.token_count == file.tokens.size(), ErrorKind::kInvalidInput,
          "header token_count disagrees with the token list");
  Bytes out(kStreamMagic.begin(), kStreamMagic.end());
  auto put16 = [&](std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
  };
  out.push_back(h.version);
  out.push_back(h.flags);
  put16(h.width);
  put16(h.height);
  put16(h.token_count);
  out.push_back(h.bits_per_token);
  for (int shift = 56; shift >= 0; shift -= 8) {
    out.push_back(static_cast<std::uint8_t>(h.model_id >> shift));
  }
  const Bytes payload = pack_tokens(file.tokens, h.bits_per_token);
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

inline StreamHeader parse_stream_header(std::span<const std::uint8_t> bytes,
                                        ParseMode mode = ParseMode::kStrict) {
  require(bytes.size() >= kStreamHeaderSize, ErrorKind::kCorruptStream,
          "stream is " + std::to_string(bytes.size()) + " bytes, shorter than the header");
  require(std::equal(kStreamMagic.begin(), kStreamMagic.end(), bytes.begin()),
          ErrorKind::kCorruptStream, "bad magic, not a .1dp stream");
  auto get16 = [&](size_t at) {
    return static_cast<std::uint16_t>((bytes[at] << 8) | bytes[at + 1]);
  };
  StreamHeader h;
  h.version = bytes[4];
  require(h.version == kStreamVersion, ErrorKind::kUnsupportedVersion,
          "unsupported stream version " + std::to_string(h.version));
  h.flags = bytes[5];
  if (h.flags != 0) detail::complain(mode, "reserved flags byte is nonzero");
  h.width = get16(6);
  h.height = get16(8);
  h.token_count = get16(10);
  h.bits_per_token = bytes[12];
  for (size_t i = 13; i < kStreamHeaderSize; ++i) h.model_id = (h.model_id << 8) | bytes[i];
  require(h.token_count >= 1, ErrorKind::kCorruptStream, "token_count is zero");
  require(h.bits_per_token >= 1 && h.bits_per_token <= kMaxBitsPerToken,
          ErrorKind::kCorruptStream,
          "bits_per_token " + std::to_string(h.bits_per_token) + " outside [1, 16]");
  return h;
}

inline TokenStreamFile parse_stream(std::span<const std::uint8_t> bytes,
                                    ParseMode mode = ParseMode::kStrict) {
  TokenStreamFile file;
  file.header = parse_stream_header(bytes, mode);
  file.tokens = unpack_tokens(bytes.subspan(kStreamHeaderSize), file.header.token_count,
                              file.header.bits_per_token, mode);
  return file;
}

inline void write_stream_file(const std::filesystem::path& path, const TokenStreamFile& file) {
  const Bytes bytes = serialize_stream(file);
  write_file_atomic(path, std::vector<char>(bytes.begin(), bytes.end()));
}

inline TokenStreamFile read_stream_file(const std::filesystem::path& path,
                                        ParseMode mode = ParseMode::kStrict) {
  const std::vector<char> raw = read_file(path);
  const Bytes bytes(raw.begin(), raw.end());
  try {
    return parse_stream(bytes, mode);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

// Header fields for a stream of `tokens` produced by `model`.
inline TokenStreamFile make_stream(const Model& model, TokenSequence tokens) {
  check_tokens(tokens, model.config);
  TokenStreamFile file;
  file.header.width = static_cast<std::uint16_t>(model.config.image_size);
  file.header.height = static_cast<std::uint16_t>(model.config.image_size);
  file.header.token_count = static_cast<std::uint16_t>(tokens.size());
  file.header.bits_per_token = static_cast<std::uint8_t>(model.config.bits_per_token());
  file.header.model_id = fingerprint(model);
  file.tokens = std::move(tokens);
  return file;
}

// Tokenizes an in-memory image at model resolution and keeps the first
// n_tokens ids.
inline TokenStreamFile encode_tokens(const ImageTensor& image, const Model& model, int n_tokens) {
  require(n_tokens >= 1 && n_tokens <= model.config.n_latent_tokens, ErrorKind::kInvalidInput,
          "n_tokens " + std::to_string(n_tokens) + " outside [1, " +
              std::to_string(model.config.n_latent_tokens) + "]");
  const ImageTensor fitted = fit_square(image, model.config.image_size);
  TokenSequence tokens = tokenize(fitted, model);
  tokens.resize(static_cast<size_t>(n_tokens));
  return make_stream(model, std::move(tokens));
}

inline TokenStreamFile encode_image(const std::filesystem::path& image_path, const Model& model,
                                    int n_tokens, const std::filesystem::path& out_path) {
  require(n_tokens >= 1 && n_tokens <= model.config.n_latent_tokens, ErrorKind::kInvalidInput,
          "n_tokens " + std::to_string(n_tokens) + " outside [1, " +
              std::to_string(model.config.n_latent_tokens) + "]");
  TokenStreamFile file =
      encode_tokens(read_png(image_path, model.config.channels), model, n_tokens);
  write_stream_file(out_path, file);
  return file;
}

// Checks that a parsed stream belongs to `model`. Geometry mismatches are
// always fatal; a model_id mismatch is fatal only in strict mode.
inline void check_stream_model(const StreamHeader& h, const Model& model, ParseMode mode) {
  require(h.bits_per_token == model.config.bits_per_token(), ErrorKind::kModelMismatch,
          "stream uses " + std::to_string(h.bits_per_token) + " bits per token, model uses " +
              std::to_string(model.config.bits_per_token()));
  require(h.width == model.config.image_size && h.height == model.config.image_size,
          ErrorKind::kModelMismatch,
          "stream is " + std::to_string(h.width) + "x" + std::to_string(h.height) +
              ", model decodes " + std::to_string(model.config.image_size) + "x" +
              std::to_string(model.config.image_size));
  require(h.token_count <= model.config.n_latent_tokens, ErrorKind::kModelMismatch,
          "stream holds " + std::to_string(h.token_count) + " tokens, model accepts at most " +
              std::to_string(model.config.n_latent_tokens));
  const std::uint64_t id = fingerprint(model);
  if (h.model_id != id) {
    const std::string msg = "stream model_id " + format_model_id(h.model_id) +
                            " does not match checkpoint " + format_model_id(id);
    if (mode == ParseMode::kStrict) fail(ErrorKind::kModelMismatch, msg);
    log::warn(msg);
  }
}

inline ImageTensor decode_stream(const TokenStreamFile& file, const Model& model,
                                 std::optional<int> prefix_n = std::nullopt,
                                 ParseMode mode = ParseMode::kStrict) {
  check_stream_model(file.header, model, mode);
  TokenSequence tokens = file.tokens;
  if (prefix_n) {
    require(*prefix_n >= 1 && static_cast<size_t>(*prefix_n) <= tokens.size(),
            ErrorKind::kInvalidInput,
            "prefix " + std::to_string(*prefix_n) + " outside [1, " +
                std::to_string(tokens.size()) + "]");
    tokens.resize(static_cast<size_t>(*prefix_n));
  }
  return detokenize(tokens, model);
}

inline ImageTensor decode_file(const std::filesystem::path& in_path, const Model& model,
                               std::optional<int> prefix_n = std::nullopt,
                               ParseMode mode = ParseMode::kStrict,
                               const std::optional<std::filesystem::path>& out_path = {}) {
  ImageTensor image = decode_stream(read_stream_file(in_path, mode), model, prefix_n, mode);
  if (out_path) write_png(*out_path, image);
  return image;
}

}  // namespace onedp

#endif  // ONEDP_CODEC_HPP_

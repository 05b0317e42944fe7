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

#ifndef ONEDP_ERROR_HPP_
#define ONEDP_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace onedp {

enum class ErrorKind {
  kInvalidInput,
  kInvalidToken,
  kConfig,
  kNumeric,
  kIngestion,
  kCorruptStream,
  kUnsupportedVersion,
  kModelMismatch,
  kIo,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput: return "invalid_input";
    case ErrorKind::kInvalidToken: return "invalid_token";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kNumeric: return "numeric";
    case ErrorKind::kIngestion: return "ingestion";
    case ErrorKind::kCorruptStream: return "corrupt_stream";
    case ErrorKind::kUnsupportedVersion: return "unsupported_version";
    case ErrorKind::kModelMismatch: return "model_mismatch";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

// Every failure surfaced by the library is an Error tagged with its kind, so
// callers (and the CLI's machine-readable error line) can branch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) fail(kind, message);
}

}  // namespace onedp

#endif  // ONEDP_ERROR_HPP_

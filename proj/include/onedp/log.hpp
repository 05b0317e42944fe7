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

#ifndef ONEDP_LOG_HPP_
#define ONEDP_LOG_HPP_

#include <atomic>
#include <iostream>
#include <string_view>

namespace onedp::log {

// 0 = errors only, 1 = warnings (default), 2 = info, 3 = debug.
inline std::atomic<int>& verbosity() {
  static std::atomic<int> level{1};
  return level;
}

inline void warn(std::string_view msg) {
  if (verbosity() >= 1) std::cerr << "warning: " << msg << '\n';
}

inline void info(std::string_view msg) {
  if (verbosity() >= 2) std::cerr << msg << '\n';
}

inline void debug(std::string_view msg) {
  if (verbosity() >= 3) std::cerr << msg << '\n';
}

}  // namespace onedp::log

#endif  // ONEDP_LOG_HPP_

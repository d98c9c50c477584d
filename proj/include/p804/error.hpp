// Copyright 2026 The p804kit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace p804 {

// Every failure raised by the toolkit carries a short machine-readable code
// ("invalid-argument", "io", "undefined-correlation", ...) next to the message.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

[[noreturn]] inline void fail(std::string_view code, const std::string& message) {
  throw Error(std::string(code), message);
}

inline void require(bool condition, std::string_view code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace p804

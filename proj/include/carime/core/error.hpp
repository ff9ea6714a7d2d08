// Copyright 2026 The CariMe Authors. All Rights Reserved.
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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace carime {

/// Coarse error categories; the CLI maps them to exit codes.
enum class ErrorKind {
  kInvalidArgument = 2,
  kShapeMismatch = 3,
  kNumerical = 4,
  kIo = 5,
  kFormat = 6,
  kConfig = 7,
  kRemote = 8,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

#define CARIME_CHECK(cond, kind, msg)        \
  do {                                       \
    if (!(cond)) ::carime::fail((kind), (msg)); \
  } while (0)

}  // namespace carime

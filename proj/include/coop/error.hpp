/*
 * Copyright 2026 The COOP Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace coop {

enum class ErrorKind {
  kInvalidArgument,
  kDimensionMismatch,
  kUndefinedCorrelation,
  kSearchSpaceTooLarge,
  kParse,
  kMissingData,
  kIo,
};

inline std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid_argument";
    case ErrorKind::kDimensionMismatch: return "dimension_mismatch";
    case ErrorKind::kUndefinedCorrelation: return "undefined_correlation";
    case ErrorKind::kSearchSpaceTooLarge: return "search_space_too_large";
    case ErrorKind::kParse: return "parse_error";
    case ErrorKind::kMissingData: return "missing_data";
    case ErrorKind::kIo: return "io_error";
  }
  return "unknown";
}

// Every failure raised by the library carries a machine-readable kind so the
// CLI can emit a structured error object.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace coop

// Copyright 2026 The ihom Authors.
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

#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ihom {

enum class ErrorCode {
  kInvalidInput,
  kDimensionMismatch,
  kGridMismatch,
  kSingularSolve,
  kConvergence,
  kNoSolution,
  kDiscretization,
  kNegativeMass,
  kTruncation,
  kFactorization,
  kPathAborted,
  kHorizon,
  kDomain,
  kParse,
  kValidation,
  kIo,
  kStage,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported through this type; `code()` lets callers
// and tests branch on the failure class without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// %.6g rendering for diagnostics.
inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace ihom

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

#include "ihom/error.hpp"

namespace ihom {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput: return "invalid-input";
    case ErrorCode::kDimensionMismatch: return "dimension-mismatch";
    case ErrorCode::kGridMismatch: return "grid-mismatch";
    case ErrorCode::kSingularSolve: return "singular-solve";
    case ErrorCode::kConvergence: return "convergence";
    case ErrorCode::kNoSolution: return "no-solution";
    case ErrorCode::kDiscretization: return "discretization";
    case ErrorCode::kNegativeMass: return "negative-mass";
    case ErrorCode::kTruncation: return "truncation";
    case ErrorCode::kFactorization: return "factorization";
    case ErrorCode::kPathAborted: return "path-aborted";
    case ErrorCode::kHorizon: return "horizon";
    case ErrorCode::kDomain: return "domain";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kValidation: return "validation";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kStage: return "stage";
  }
  return "unknown";
}

}  // namespace ihom

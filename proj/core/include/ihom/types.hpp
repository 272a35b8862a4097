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

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>

namespace ihom {

/// Largest spatial dimension supported by the fixed-size point type.
inline constexpr int kMaxDim = 4;

/// Point or vector in R x T^{d-1}; entries past the active dimension are zero.
using Vec = std::array<double, kMaxDim>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

enum class Side { kPlus, kMinus };

inline const char* side_name(Side s) { return s == Side::kPlus ? "plus" : "minus"; }

inline bool all_finite(const Vec& x, int dim) {
  for (int i = 0; i < dim; ++i) {
    if (!std::isfinite(x[i])) return false;
  }
  return true;
}

}  // namespace ihom

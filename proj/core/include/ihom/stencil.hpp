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
#include <string>
#include <string_view>

#include "ihom/types.hpp"

namespace ihom {

/// Discretisation of L = 1/2 Laplacian + b.grad on a uniform grid.
///
/// kCentral4 is the default. kUpwind pairs the 3-point Laplacian with
/// first-order upwinded drift, giving nonnegative off-diagonal rates for
/// any drift amplitude.
enum class StencilKind { kCentral2, kCentral4, kUpwind };

std::string_view to_string(StencilKind kind);
StencilKind stencil_from_string(std::string_view name);

/// Largest |offset| used by the stencil along one axis.
int stencil_reach(StencilKind kind);

struct StencilEntry {
  int axis = 0;
  int offset = 0;
  double weight = 0.0;
};

/// Off-diagonal generator weights of one grid node; the diagonal is minus
/// their sum so every row annihilates constants.
struct StencilRow {
  std::array<StencilEntry, 4 * kMaxDim> entries{};
  int size = 0;
  double diagonal = 0.0;
};

StencilRow generator_row(const Vec& drift, int dim, double h, StencilKind kind);

/// Weights w_m (m = 1..reach) of the antisymmetric first-derivative stencil
/// f'(x) ~ sum_m w_m (f(x + m h) - f(x - m h)) / h.
std::array<double, 3> first_derivative_weights(StencilKind kind);

}  // namespace ihom

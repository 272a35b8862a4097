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

#include "ihom/stencil.hpp"

#include "ihom/error.hpp"

namespace ihom {

std::string_view to_string(StencilKind kind) {
  switch (kind) {
    case StencilKind::kCentral2: return "central2";
    case StencilKind::kCentral4: return "central4";
    case StencilKind::kUpwind: return "upwind";
  }
  return "unknown";
}

StencilKind stencil_from_string(std::string_view name) {
  if (name == "central2") return StencilKind::kCentral2;
  if (name == "central4") return StencilKind::kCentral4;
  if (name == "upwind") return StencilKind::kUpwind;
  fail(ErrorCode::kInvalidInput, "unknown stencil '" + std::string(name) + "'");
}

int stencil_reach(StencilKind kind) { return kind == StencilKind::kCentral4 ? 2 : 1; }

std::array<double, 3> first_derivative_weights(StencilKind kind) {
  if (kind == StencilKind::kCentral4) return {0.0, 2.0 / 3.0, -1.0 / 12.0};
  return {0.0, 0.5, 0.0};
}

StencilRow generator_row(const Vec& drift, int dim, double h, StencilKind kind) {
  StencilRow row;
  const double inv_h = 1.0 / h;
  const double inv_h2 = inv_h * inv_h;
  auto push = [&row](int axis, int offset, double w) {
    row.entries[row.size++] = StencilEntry{axis, offset, w};
  };
  for (int a = 0; a < dim; ++a) {
    const double b = drift[a];
    switch (kind) {
      case StencilKind::kCentral2:
        push(a, +1, 0.5 * inv_h2 + 0.5 * b * inv_h);
        push(a, -1, 0.5 * inv_h2 - 0.5 * b * inv_h);
        break;
      case StencilKind::kCentral4:
        // 1/2 (4/3, -1/12) Laplacian, (2/3, -1/12) first derivative.
        push(a, +1, 0.5 * (4.0 / 3.0) * inv_h2 + (2.0 / 3.0) * b * inv_h);
        push(a, -1, 0.5 * (4.0 / 3.0) * inv_h2 - (2.0 / 3.0) * b * inv_h);
        push(a, +2, -0.5 * (1.0 / 12.0) * inv_h2 - (1.0 / 12.0) * b * inv_h);
        push(a, -2, -0.5 * (1.0 / 12.0) * inv_h2 + (1.0 / 12.0) * b * inv_h);
        break;
      case StencilKind::kUpwind:
        push(a, +1, 0.5 * inv_h2 + (b > 0.0 ? b * inv_h : 0.0));
        push(a, -1, 0.5 * inv_h2 + (b < 0.0 ? -b * inv_h : 0.0));
        break;
    }
  }
  double s = 0.0;
  for (int k = 0; k < row.size; ++k) s += row.entries[k].weight;
  row.diagonal = -s;
  return row;
}

}  // namespace ihom

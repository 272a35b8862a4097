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

#include <cstddef>
#include <vector>

#include "ihom/types.hpp"

namespace ihom {

/// Uniform grid of n nodes per unit period. Strip grids additionally cover
/// k_trunc unit cells on each side of the interface.
struct GridSpec {
  int n = 64;
  int dim = 2;
  int k_trunc = 8;

  double h() const { return 1.0 / n; }
  /// n^dim.
  std::size_t torus_nodes() const;
  /// n^(dim-1).
  std::size_t tangential_nodes() const;
  /// h^dim, the quadrature weight of a node.
  double cell_volume() const;

  /// Throws kInvalidInput when n < 8 or dim is outside [1, kMaxDim].
  void validate() const;
  /// Additionally requires k_trunc >= 4.
  void validate_strip() const;
};

inline bool same_torus_grid(const GridSpec& a, const GridSpec& b) {
  return a.n == b.n && a.dim == b.dim;
}

/// Values on the torus grid, row-major with axis 0 slowest.
struct GridFunction {
  GridSpec grid;
  std::vector<double> values;

  GridFunction() = default;
  GridFunction(const GridSpec& g, double fill = 0.0) : grid(g), values(g.torus_nodes(), fill) {}

  /// Sum of values times h^d.
  double integral() const;
  /// h^d sum f * weight.
  double integral_against(const GridFunction& weight) const;
};

/// Multi-index helpers for row-major torus grids.
class TorusIndexer {
 public:
  explicit TorusIndexer(const GridSpec& grid);

  std::size_t size() const { return size_; }
  std::array<int, kMaxDim> unflatten(std::size_t index) const;
  std::size_t flatten(const std::array<int, kMaxDim>& multi) const;
  /// Index of the node shifted by `offset` along `axis`, with periodic wrap.
  std::size_t shifted(std::size_t index, int axis, int offset) const;
  Vec coordinates(std::size_t index) const;

 private:
  int n_;
  int dim_;
  std::size_t size_;
  std::array<std::size_t, kMaxDim> stride_{};
};

}  // namespace ihom

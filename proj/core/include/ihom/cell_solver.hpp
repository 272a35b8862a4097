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

#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "ihom/drift_field.hpp"
#include "ihom/grid.hpp"
#include "ihom/stencil.hpp"

namespace ihom {

struct CellTolerances {
  /// Relative residual accepted from a linear solve.
  double linear = 1e-10;
  /// Largest |int b dmu| for which the corrector equation is considered solvable.
  double centering = 1e-8;
  /// Negative density entries above -clip * max(mu) are set to zero.
  double clip = 1e-12;
  /// Asymmetry of the assembled tensor tolerated under strict mode.
  double asymmetry = 1e-6;
  bool strict = false;
};

/// Sparse discretisation of L = 1/2 Laplacian + b.grad on the periodic grid.
/// Rows sum to zero; immutable once assembled.
class GeneratorMatrix {
 public:
  using Matrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

  GeneratorMatrix(GridSpec grid, StencilKind kind, Matrix op, std::vector<std::vector<double>> drift);

  const GridSpec& grid() const { return grid_; }
  StencilKind stencil() const { return kind_; }
  const Matrix& matrix() const { return op_; }
  const std::vector<double>& drift(int axis) const { return drift_[axis]; }

  std::vector<double> apply(std::span<const double> f) const;
  std::vector<double> apply_adjoint(std::span<const double> mu) const;
  /// Largest absolute entry; used to make residuals relative.
  double scale() const { return scale_; }

 private:
  GridSpec grid_;
  StencilKind kind_;
  Matrix op_;
  std::vector<std::vector<double>> drift_;
  double scale_ = 0.0;
};

GeneratorMatrix discretize_generator(const TorusField& b, const GridSpec& grid,
                                     StencilKind kind = StencilKind::kCentral4);

struct InvariantDensity {
  GridFunction density;
  /// max |L* mu| / (scale * max mu).
  double residual = 0.0;
  int clipped = 0;
};

/// Solves L* mu = 0 with int mu = 1 by pinning one node and normalising.
InvariantDensity solve_invariant_density(const GeneratorMatrix& generator, const CellTolerances& tol = {});

struct CorrectorSolution {
  std::vector<GridFunction> correctors;
  std::vector<double> residuals;
  /// Discrete int b_i dmu that was projected out of each right-hand side.
  Vec centering{};
};

/// Solves L g_i = -b_i, then shifts each g_i to have zero mu-mean.
CorrectorSolution solve_corrector(const GeneratorMatrix& generator, const TorusField& b, const GridFunction& mu,
                                  const CellTolerances& tol = {});

/// Central-difference derivative matching the stencil order (upwind uses 2nd order).
GridFunction grid_derivative(const GridFunction& f, int axis, StencilKind kind);

struct EffectiveTensor {
  Eigen::MatrixXd D;
  double asymmetry = 0.0;
};

/// D_ij = int (delta_ik + d_k g_i)(delta_kj + d_k g_j) dmu, symmetrised.
EffectiveTensor effective_tensor(std::span<const GridFunction> correctors, const GridFunction& mu,
                                 const GridSpec& grid, StencilKind kind = StencilKind::kCentral4,
                                 const CellTolerances& tol = {});

struct CellResiduals {
  double density = 0.0;
  std::vector<double> corrector;
  Vec centering{};
  double asymmetry = 0.0;
};

struct CellSolution {
  Side side = Side::kPlus;
  GridSpec grid;
  StencilKind stencil = StencilKind::kCentral4;
  GridFunction mu;
  std::vector<GridFunction> correctors;
  Eigen::MatrixXd D;
  CellResiduals residuals;
};

struct CellOptions {
  StencilKind stencil = StencilKind::kCentral4;
  CellTolerances tol;
};

CellSolution solve_cell(Side side, const TorusField& b, const GridSpec& grid, const CellOptions& options = {});

}  // namespace ihom

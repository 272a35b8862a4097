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

#include "ihom/cell_solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/SparseLU>

#include "ihom/error.hpp"

namespace ihom {

namespace {

using ColMatrix = Eigen::SparseMatrix<double>;
using LU = Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>>;

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Replaces row `pin` of `a` by the unit row e_pin.
ColMatrix pin_row(ColMatrix a, Eigen::Index pin) {
  a.prune([pin](Eigen::Index row, Eigen::Index, double) { return row != pin; });
  a.coeffRef(pin, pin) = 1.0;
  a.makeCompressed();
  return a;
}

void factorize(LU& lu, const ColMatrix& a, const char* what) {
  lu.analyzePattern(a);
  lu.factorize(a);
  if (lu.info() != Eigen::Success) {
    fail(ErrorCode::kSingularSolve, std::string(what) + ": sparse factorisation failed (" + lu.lastErrorMessage() +
                                        "); the null space is not one-dimensional");
  }
}

// Solve with one step of iterative refinement.
Eigen::VectorXd solve_refined(LU& lu, const ColMatrix& a, const Eigen::VectorXd& rhs) {
  Eigen::VectorXd x = lu.solve(rhs);
  const Eigen::VectorXd r = rhs - a * x;
  x += lu.solve(r);
  return x;
}

}  // namespace

GeneratorMatrix::GeneratorMatrix(GridSpec grid, StencilKind kind, Matrix op, std::vector<std::vector<double>> drift)
    : grid_(grid), kind_(kind), op_(std::move(op)), drift_(std::move(drift)) {
  for (int k = 0; k < op_.outerSize(); ++k) {
    for (Matrix::InnerIterator it(op_, k); it; ++it) scale_ = std::max(scale_, std::abs(it.value()));
  }
}

std::vector<double> GeneratorMatrix::apply(std::span<const double> f) const {
  if (f.size() != static_cast<std::size_t>(op_.cols())) fail(ErrorCode::kGridMismatch, "vector size mismatch");
  Eigen::Map<const Eigen::VectorXd> in(f.data(), static_cast<Eigen::Index>(f.size()));
  Eigen::VectorXd out = op_ * in;
  return {out.data(), out.data() + out.size()};
}

std::vector<double> GeneratorMatrix::apply_adjoint(std::span<const double> mu) const {
  if (mu.size() != static_cast<std::size_t>(op_.rows())) fail(ErrorCode::kGridMismatch, "vector size mismatch");
  Eigen::Map<const Eigen::VectorXd> in(mu.data(), static_cast<Eigen::Index>(mu.size()));
  Eigen::VectorXd out = op_.transpose() * in;
  return {out.data(), out.data() + out.size()};
}

GeneratorMatrix discretize_generator(const TorusField& b, const GridSpec& grid, StencilKind kind) {
  grid.validate();
  if (b.dim() != grid.dim) fail(ErrorCode::kGridMismatch, "drift dimension differs from grid dimension");
  auto samples = sample_on_grid(b, grid);
  const TorusIndexer idx(grid);
  const double h = grid.h();

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(idx.size() * static_cast<std::size_t>(4 * grid.dim + 1));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    Vec drift{};
    for (int a = 0; a < grid.dim; ++a) drift[a] = samples[a][k];
    const StencilRow row = generator_row(drift, grid.dim, h, kind);
    const auto r = static_cast<Eigen::Index>(k);
    triplets.emplace_back(r, r, row.diagonal);
    for (int e = 0; e < row.size; ++e) {
      const auto& entry = row.entries[e];
      triplets.emplace_back(r, static_cast<Eigen::Index>(idx.shifted(k, entry.axis, entry.offset)), entry.weight);
    }
  }
  GeneratorMatrix::Matrix op(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(idx.size()));
  op.setFromTriplets(triplets.begin(), triplets.end());
  op.makeCompressed();
  return GeneratorMatrix(grid, kind, std::move(op), std::move(samples));
}

InvariantDensity solve_invariant_density(const GeneratorMatrix& generator, const CellTolerances& tol) {
  const auto& grid = generator.grid();
  const auto size = generator.matrix().rows();
  ColMatrix adjoint = generator.matrix().transpose();
  const ColMatrix pinned = pin_row(adjoint, 0);

  LU lu;
  factorize(lu, pinned, "invariant density");
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(size);
  rhs[0] = 1.0;
  Eigen::VectorXd mu = solve_refined(lu, pinned, rhs);
  if (!mu.allFinite()) fail(ErrorCode::kSingularSolve, "invariant density solve produced non-finite values");

  mu /= mu.sum() * grid.cell_volume();
  const double peak = mu.cwiseAbs().maxCoeff();

  InvariantDensity out;
  out.density = GridFunction(grid);
  for (Eigen::Index i = 0; i < size; ++i) {
    double v = mu[i];
    if (v < 0.0) {
      if (v < -tol.clip * peak) {
        fail(ErrorCode::kDiscretization,
             "invariant density has a negative entry " + format_number(v / peak) +
                 " relative to its peak; refine the grid or use the upwind stencil");
      }
      v = 0.0;
      ++out.clipped;
    }
    out.density.values[static_cast<std::size_t>(i)] = v;
  }
  if (out.clipped > 0) {
    const double mass = out.density.integral();
    for (double& v : out.density.values) v /= mass;
  }

  const auto res = generator.apply_adjoint(out.density.values);
  out.residual = max_abs(res) / (generator.scale() * max_abs(out.density.values));
  if (out.residual > tol.linear) {
    fail(ErrorCode::kSingularSolve, "adjoint residual " + format_number(out.residual) +
                                        " after the pinned solve; the null space is not simple");
  }
  return out;
}

CorrectorSolution solve_corrector(const GeneratorMatrix& generator, const TorusField& b, const GridFunction& mu,
                                  const CellTolerances& tol) {
  const auto& grid = generator.grid();
  if (!same_torus_grid(grid, mu.grid) || mu.values.size() != grid.torus_nodes()) {
    fail(ErrorCode::kGridMismatch, "density and generator grids differ");
  }
  if (b.dim() != grid.dim) fail(ErrorCode::kGridMismatch, "drift and generator dimensions differ");

  CorrectorSolution out;
  out.centering = check_centering(b, mu);
  for (int i = 0; i < grid.dim; ++i) {
    if (std::abs(out.centering[i]) > tol.centering) {
      fail(ErrorCode::kNoSolution, "centering condition violated: int b_" + std::to_string(i + 1) +
                                       " dmu = " + format_number(out.centering[i]) + " exceeds tolerance " +
                                       format_number(tol.centering));
    }
  }

  const ColMatrix op = generator.matrix();
  const ColMatrix pinned = pin_row(op, 0);
  LU lu;
  factorize(lu, pinned, "corrector");

  const auto size = op.rows();
  for (int i = 0; i < grid.dim; ++i) {
    const auto& bi = generator.drift(i);
    Eigen::VectorXd rhs(size);
    for (Eigen::Index k = 0; k < size; ++k) rhs[k] = -bi[static_cast<std::size_t>(k)] + out.centering[i];
    Eigen::VectorXd pinned_rhs = rhs;
    pinned_rhs[0] = 0.0;
    Eigen::VectorXd g = solve_refined(lu, pinned, pinned_rhs);

    GridFunction gi(grid);
    for (Eigen::Index k = 0; k < size; ++k) gi.values[static_cast<std::size_t>(k)] = g[k];
    const double mean = gi.integral_against(mu);
    for (double& v : gi.values) v -= mean;

    Eigen::Map<const Eigen::VectorXd> gv(gi.values.data(), size);
    const Eigen::VectorXd r = op * gv - rhs;
    const double denom = generator.scale() * gv.cwiseAbs().maxCoeff() + rhs.cwiseAbs().maxCoeff();
    const double residual = denom > 0.0 ? r.cwiseAbs().maxCoeff() / denom : 0.0;
    if (!std::isfinite(residual) || residual > tol.linear) {
      fail(ErrorCode::kConvergence, "corrector " + std::to_string(i + 1) + " residual " + std::to_string(residual) +
                                        " above tolerance " + std::to_string(tol.linear));
    }
    out.residuals.push_back(residual);
    out.correctors.push_back(std::move(gi));
  }
  return out;
}

GridFunction grid_derivative(const GridFunction& f, int axis, StencilKind kind) {
  const TorusIndexer idx(f.grid);
  const auto w = first_derivative_weights(kind);
  const int reach = kind == StencilKind::kCentral4 ? 2 : 1;
  const double inv_h = 1.0 / f.grid.h();
  GridFunction out(f.grid);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    double s = 0.0;
    for (int m = 1; m <= reach; ++m) {
      s += w[m] * (f.values[idx.shifted(k, axis, m)] - f.values[idx.shifted(k, axis, -m)]);
    }
    out.values[k] = s * inv_h;
  }
  return out;
}

EffectiveTensor effective_tensor(std::span<const GridFunction> correctors, const GridFunction& mu,
                                 const GridSpec& grid, StencilKind kind, const CellTolerances& tol) {
  const int d = grid.dim;
  if (static_cast<int>(correctors.size()) != d) {
    fail(ErrorCode::kDimensionMismatch, "need one corrector per dimension");
  }
  for (const auto& g : correctors) {
    if (!same_torus_grid(g.grid, grid) || g.values.size() != grid.torus_nodes()) {
      fail(ErrorCode::kGridMismatch, "corrector grid differs from the tensor grid");
    }
  }
  if (!same_torus_grid(mu.grid, grid) || mu.values.size() != grid.torus_nodes()) {
    fail(ErrorCode::kGridMismatch, "density grid differs from the tensor grid");
  }

  // grad[i][k] = d_k g_i
  std::vector<std::vector<GridFunction>> grad(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    for (int k = 0; k < d; ++k) grad[i].push_back(grid_derivative(correctors[i], k, kind));
  }

  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(d, d);
  const std::size_t nodes = grid.torus_nodes();
  for (std::size_t x = 0; x < nodes; ++x) {
    const double w = mu.values[x];
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        double s = 0.0;
        for (int k = 0; k < d; ++k) {
          const double a = (i == k ? 1.0 : 0.0) + grad[i][k].values[x];
          const double c = (k == j ? 1.0 : 0.0) + grad[j][k].values[x];
          s += a * c;
        }
        D(i, j) += w * s;
      }
    }
  }
  D *= grid.cell_volume();

  EffectiveTensor out;
  out.asymmetry = (D - D.transpose()).norm();
  out.D = 0.5 * (D + D.transpose());
  if (tol.strict && out.asymmetry > tol.asymmetry) {
    fail(ErrorCode::kDiscretization, "effective tensor asymmetry " + format_number(out.asymmetry) +
                                         " exceeds " + format_number(tol.asymmetry));
  }
  return out;
}

CellSolution solve_cell(Side side, const TorusField& b, const GridSpec& grid, const CellOptions& options) {
  const GeneratorMatrix generator = discretize_generator(b, grid, options.stencil);
  InvariantDensity density = solve_invariant_density(generator, options.tol);
  CorrectorSolution corr = solve_corrector(generator, b, density.density, options.tol);
  EffectiveTensor tensor = effective_tensor(corr.correctors, density.density, grid, options.stencil, options.tol);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(tensor.D, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() <= 0.0) {
    fail(ErrorCode::kDiscretization, std::string("effective tensor on the ") + side_name(side) +
                                         " side is not positive definite");
  }

  CellSolution out;
  out.side = side;
  out.grid = grid;
  out.stencil = options.stencil;
  out.mu = std::move(density.density);
  out.correctors = std::move(corr.correctors);
  out.D = std::move(tensor.D);
  out.residuals.density = density.residual;
  out.residuals.corrector = std::move(corr.residuals);
  out.residuals.centering = corr.centering;
  out.residuals.asymmetry = tensor.asymmetry;
  return out;
}

}  // namespace ihom

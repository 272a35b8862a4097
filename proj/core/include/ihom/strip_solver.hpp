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

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ihom/cell_solver.hpp"
#include "ihom/drift_field.hpp"
#include "ihom/grid.hpp"
#include "ihom/stencil.hpp"

namespace ihom {

struct QOptions {
  /// First cell index used in the rate fit; negative selects ceil(eta).
  int burn_in = -1;
  /// Mass differences (relative to q+ + q-) below this are numerical noise.
  double floor = 1e-13;
  /// The floor is raised to this multiple of the two outermost differences,
  /// which carry only solver roundoff once the tail has converged.
  double noise_factor = 20.0;
  /// Differences above this are never treated as roundoff.
  double noise_cap = 1e-7;
};

/// Result of extract_q. Rates are per unit cell; NaN when fewer than three
/// differences rise above the floor.
struct QEstimate {
  double q_plus = 0.5;
  double q_minus = 0.5;
  double rate_plus = 0.0;
  double rate_minus = 0.0;
  double r2_plus = 1.0;
  double r2_minus = 1.0;
  bool below_floor_plus = true;
  bool below_floor_minus = true;
  /// Bound on |q_hat - q| from the fitted geometric tail plus the floor.
  double tail_bound_plus = 0.0;
  double tail_bound_minus = 0.0;
  int burn_in = 0;
  double floor_plus = 0.0;
  double floor_minus = 0.0;
  int fit_points_plus = 0;
  int fit_points_minus = 0;

  double tail_bound() const { return tail_bound_plus > tail_bound_minus ? tail_bound_plus : tail_bound_minus; }
};

/// Masses are indexed by distance from the interface: plus[j] = mu([j, j+1] x T),
/// minus[j] = mu([-j-1, -j] x T). Needs at least four cells per side.
QEstimate extract_q(std::span<const double> plus, std::span<const double> minus, const QOptions& options = {});

/// Discrete invariant density on [-K, K) x T^{d-1}, layer-major
/// (index = layer * n^{d-1} + tangential index, layer 0 at x1 = -K).
struct StripMeasure {
  GridSpec grid;
  StencilKind stencil = StencilKind::kCentral4;
  double eta = kDefaultEta;
  std::vector<double> density;
  std::vector<double> masses_plus;
  std::vector<double> masses_minus;
  QEstimate q;
  /// Far-field coefficients: the outermost cells equal c * mu+-.
  double c_plus = 0.5;
  double c_minus = 0.5;
  /// max |L* mu| / (scale * max mu) over the whole truncated strip.
  double residual = 0.0;
  int clipped = 0;
  /// Truncations tried before acceptance (the last one is grid.k_trunc).
  std::vector<int> k_history;

  int layers() const { return 2 * grid.k_trunc * grid.n; }
  std::size_t tangential() const { return grid.tangential_nodes(); }
  double layer_x1(int layer) const { return (layer - grid.k_trunc * grid.n) * grid.h(); }
  double at(int layer, std::size_t t) const { return density[static_cast<std::size_t>(layer) * tangential() + t]; }
};

struct StripOptions {
  StencilKind stencil = StencilKind::kCentral4;
  QOptions q;
  /// Double k_trunc while the tail bound exceeds this, up to k_max.
  bool auto_refine = true;
  double contamination = 1e-6;
  int k_max = 64;
  /// Entries below -clip * max are an error; smaller negatives are zeroed.
  double clip = 1e-10;
  double linear = 1e-9;
};

StripMeasure solve_strip_measure(const InterfaceDriftField& b, const CellSolution& plus, const CellSolution& minus,
                                 const GridSpec& grid, const StripOptions& options = {});

/// max over the cell of |mu - q mu+-| / max(q mu+-) for cell j on the given side.
double cell_profile_error(const StripMeasure& strip, const CellSolution& cell, int j);

/// p+- = q+- D11+- / (q+ D11+ + q- D11-).
std::pair<double, double> compute_p(double q_plus, double q_minus, double d11_plus, double d11_minus);

struct AlphaResult {
  /// alpha[j] for j = 1..d-1 (tangential axes); alpha[0] unused and zero.
  Vec alpha{};
  /// int b_j dmu over the truncated strip.
  Vec integral{};
  /// Per-cell far-field contribution c+- * int b+-_j dmu+-.
  double tail_residual = 0.0;
};

inline constexpr double kAlphaTailTolerance = 1e-6;

AlphaResult compute_alpha(const StripMeasure& mu, const InterfaceDriftField& b, double p_plus, double p_minus,
                          const Eigen::MatrixXd& d_plus, const Eigen::MatrixXd& d_minus,
                          const CellSolution* cell_plus = nullptr, const CellSolution* cell_minus = nullptr);

/// Parameters of the limit process.
struct InterfaceParams {
  int dim = 1;
  double p_plus = 0.5;
  double p_minus = 0.5;
  double q_plus = 0.5;
  double q_minus = 0.5;
  Vec alpha{};
  Eigen::MatrixXd D_plus;
  Eigen::MatrixXd D_minus;
  /// Lower-triangular factors with M M^T = D.
  Eigen::MatrixXd M_plus;
  Eigen::MatrixXd M_minus;
  /// K_1 = p+ - p-, K_j = alpha_j.
  Eigen::VectorXd K;
  double rate_plus = 0.0;
  double rate_minus = 0.0;
  double tail_bound = 0.0;
  double alpha_tail_residual = 0.0;
  double factor_error = 0.0;
};

InterfaceParams assemble_interface_params(const CellSolution& plus, const CellSolution& minus, const QEstimate& q,
                                          const AlphaResult& alpha);

/// Direct construction from (p+, alpha, D+-); q+- follow from inverting p.
InterfaceParams make_interface_params(double p_plus, const Vec& alpha, const Eigen::MatrixXd& d_plus,
                                      const Eigen::MatrixXd& d_minus);

}  // namespace ihom

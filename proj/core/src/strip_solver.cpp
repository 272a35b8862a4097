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

#include "ihom/strip_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "ihom/error.hpp"

namespace ihom {

namespace {

struct SideFit {
  double rate = std::numeric_limits<double>::quiet_NaN();
  double r2 = 1.0;
  bool below_floor = true;
  double tail = 0.0;
  int points = 0;
  double floor = 0.0;
};

SideFit fit_side(std::span<const double> m, double scale, int burn_in, const QOptions& options,
                 const char* side) {
  const int k = static_cast<int>(m.size());
  const double noise = std::max(std::abs(m[k - 1] - m[k - 2]), std::abs(m[k - 2] - m[k - 3])) / scale;
  const double floor = std::max(options.floor, std::min(options.noise_factor * noise, options.noise_cap));
  std::vector<double> xs;
  std::vector<double> ys;
  for (int j = burn_in; j + 1 < k; ++j) {
    const double d = std::abs(m[j + 1] - m[j]) / scale;
    if (!(d > floor)) break;
    xs.push_back(j);
    ys.push_back(std::log(d));
  }
  SideFit out;
  out.floor = floor;
  out.points = static_cast<int>(xs.size());
  const double last_diff = std::abs(m[k - 1] - m[k - 2]) / scale;
  if (xs.size() < 3) {
    out.tail = floor + last_diff;
    return out;
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  if (!(slope < 0.0)) {
    fail(ErrorCode::kTruncation, std::string("cell masses on the ") + side +
                                     " side do not decay towards their limit (fit slope " + format_number(slope) +
                                     "); increase k_trunc");
  }
  const double intercept = my - slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (intercept + slope * xs[i]);
    ss_res += r * r;
  }
  out.rate = -slope;
  out.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  out.below_floor = false;
  const double ratio = std::exp(slope);
  const double predicted = std::exp(intercept + slope * (k - 2));
  out.tail = std::max(predicted, last_diff) / (1.0 - ratio) + floor;
  return out;
}

}  // namespace

QEstimate extract_q(std::span<const double> plus, std::span<const double> minus, const QOptions& options) {
  if (plus.size() < 4 || minus.size() < 4) {
    fail(ErrorCode::kInvalidInput, "extract_q needs at least four cell masses per side");
  }
  if (plus.size() != minus.size()) fail(ErrorCode::kInvalidInput, "cell mass sequences differ in length");
  for (std::size_t j = 0; j < plus.size(); ++j) {
    if (!(plus[j] >= 0.0) || !(minus[j] >= 0.0) || !std::isfinite(plus[j]) || !std::isfinite(minus[j])) {
      fail(ErrorCode::kInvalidInput, "cell masses must be finite and nonnegative");
    }
  }
  const std::size_t k = plus.size();
  const double qp = 0.5 * (plus[k - 1] + plus[k - 2]);
  const double qm = 0.5 * (minus[k - 1] + minus[k - 2]);
  const double total = qp + qm;
  if (!(total > 0.0)) fail(ErrorCode::kInvalidInput, "outermost cell masses are zero");

  QEstimate out;
  out.burn_in = std::max(options.burn_in, 0);
  if (out.burn_in > static_cast<int>(k) - 2) out.burn_in = static_cast<int>(k) - 2;
  out.q_plus = qp / total;
  out.q_minus = 1.0 - out.q_plus;

  const auto fp = fit_side(plus, total, out.burn_in, options, "plus");
  const auto fm = fit_side(minus, total, out.burn_in, options, "minus");
  out.rate_plus = fp.rate;
  out.rate_minus = fm.rate;
  out.r2_plus = fp.r2;
  out.r2_minus = fm.r2;
  out.below_floor_plus = fp.below_floor;
  out.below_floor_minus = fm.below_floor;
  out.tail_bound_plus = fp.tail;
  out.tail_bound_minus = fm.tail;
  out.floor_plus = fp.floor;
  out.floor_minus = fm.floor;
  out.fit_points_plus = fp.points;
  out.fit_points_minus = fm.points;
  return out;
}

namespace {

using ColMatrix = Eigen::SparseMatrix<double>;

// Node bookkeeping for the truncated strip.
class StripIndex {
 public:
  explicit StripIndex(const GridSpec& g)
      : n_(g.n), dim_(g.dim), layers_(2 * g.k_trunc * g.n), tangential_(g.tangential_nodes()) {
    std::size_t s = 1;
    for (int a = dim_ - 1; a >= 1; --a) {
      stride_[a] = s;
      s *= static_cast<std::size_t>(n_);
    }
  }

  int layers() const { return layers_; }
  std::size_t tangential() const { return tangential_; }
  std::size_t node(int layer, std::size_t t) const { return static_cast<std::size_t>(layer) * tangential_ + t; }

  std::size_t shift_tangential(std::size_t t, int axis, int offset) const {
    const int i = static_cast<int>((t / stride_[axis]) % static_cast<std::size_t>(n_));
    int j = (i + offset) % n_;
    if (j < 0) j += n_;
    return t + (static_cast<std::size_t>(j) - static_cast<std::size_t>(i)) * stride_[axis];
  }

  Vec tangential_coords(std::size_t t) const {
    Vec x{};
    for (int a = 1; a < dim_; ++a) {
      x[a] = static_cast<double>((t / stride_[a]) % static_cast<std::size_t>(n_)) / n_;
    }
    return x;
  }

  // Torus index of the node after reducing x1 modulo one period.
  std::size_t torus_index(int layer, std::size_t t) const {
    return static_cast<std::size_t>(layer % n_) * tangential_ + t;
  }

 private:
  int n_;
  int dim_;
  int layers_;
  std::size_t tangential_;
  std::array<std::size_t, kMaxDim> stride_{};
};

StripMeasure solve_once(const InterfaceDriftField& b, const CellSolution& plus, const CellSolution& minus,
                        const GridSpec& grid, const StripOptions& options) {
  const StripIndex idx(grid);
  const int n = grid.n;
  const int kn = grid.k_trunc * n;
  const int layers = idx.layers();
  const std::size_t tang = idx.tangential();
  const double h = grid.h();
  const int lo = n;               // first interior layer
  const int hi = layers - n - 1;  // last interior layer
  const int reach = stencil_reach(options.stencil);

  const auto interior_count = static_cast<Eigen::Index>(static_cast<std::size_t>(hi - lo + 1) * tang);
  const Eigen::Index col_plus = interior_count;
  const Eigen::Index col_minus = interior_count + 1;
  const Eigen::Index flux_row = interior_count;
  const Eigen::Index norm_row = interior_count + 1;
  const Eigen::Index size = interior_count + 2;
  auto unknown = [&](int layer, std::size_t t) {
    return static_cast<Eigen::Index>(static_cast<std::size_t>(layer - lo) * tang + t);
  };

  // Row of the generator at node (layer, t), targets as (layer, t) pairs.
  struct Target {
    int layer;
    std::size_t t;
    double w;
  };
  auto rates = [&](int layer, std::size_t t, std::array<Target, 4 * kMaxDim + 1>& out) {
    Vec x = idx.tangential_coords(t);
    x[0] = (layer - kn) * h;
    const StencilRow row = generator_row(b(x), grid.dim, h, options.stencil);
    int m = 0;
    out[m++] = {layer, t, row.diagonal};
    for (int e = 0; e < row.size; ++e) {
      const auto& en = row.entries[e];
      if (en.axis == 0) {
        out[m++] = {layer + en.offset, t, en.weight};
      } else {
        out[m++] = {layer, idx.shift_tangential(t, en.axis, en.offset), en.weight};
      }
    }
    return m;
  };

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(size) * static_cast<std::size_t>(4 * grid.dim + 2));
  std::array<Target, 4 * kMaxDim + 1> targets{};
  double scale = 0.0;
  for (int layer = lo - reach; layer <= hi + reach; ++layer) {
    const bool interior = layer >= lo && layer <= hi;
    for (std::size_t t = 0; t < tang; ++t) {
      const int m = rates(layer, t, targets);
      Eigen::Index col = 0;
      double coef = 1.0;
      if (interior) {
        col = unknown(layer, t);
      } else if (layer > hi) {
        col = col_plus;
        coef = plus.mu.values[idx.torus_index(layer, t)];
      } else {
        col = col_minus;
        coef = minus.mu.values[idx.torus_index(layer, t)];
      }
      for (int e = 0; e < m; ++e) {
        const auto& tg = targets[e];
        scale = std::max(scale, std::abs(tg.w));
        if (tg.layer >= lo && tg.layer <= hi) {
          triplets.emplace_back(unknown(tg.layer, tg.t), col, tg.w * coef);
        }
        // Net flux across the junction between layers hi and hi + 1.
        if (layer <= hi && tg.layer > hi) triplets.emplace_back(flux_row, col, tg.w * coef);
        if (layer > hi && tg.layer <= hi) triplets.emplace_back(flux_row, col, -tg.w * coef);
      }
    }
  }
  triplets.emplace_back(norm_row, col_plus, 1.0);
  triplets.emplace_back(norm_row, col_minus, 1.0);

  ColMatrix a(size, size);
  a.setFromTriplets(triplets.begin(), triplets.end());
  a.makeCompressed();

  Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(a);
  lu.factorize(a);
  if (lu.info() != Eigen::Success) {
    fail(ErrorCode::kConvergence, "strip factorisation failed: " + lu.lastErrorMessage());
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(size);
  rhs[norm_row] = 1.0;
  Eigen::VectorXd sol = lu.solve(rhs);
  sol += lu.solve(rhs - a * sol);
  if (!sol.allFinite()) fail(ErrorCode::kConvergence, "strip solve produced non-finite values");

  StripMeasure out;
  out.grid = grid;
  out.stencil = options.stencil;
  out.eta = b.eta();
  out.density.assign(static_cast<std::size_t>(layers) * tang, 0.0);
  const double cp = sol[col_plus];
  const double cm = sol[col_minus];
  for (int layer = 0; layer < layers; ++layer) {
    for (std::size_t t = 0; t < tang; ++t) {
      double v = 0.0;
      if (layer >= lo && layer <= hi) {
        v = sol[unknown(layer, t)];
      } else if (layer > hi) {
        v = cp * plus.mu.values[idx.torus_index(layer, t)];
      } else {
        v = cm * minus.mu.values[idx.torus_index(layer, t)];
      }
      out.density[idx.node(layer, t)] = v;
    }
  }

  const double peak = *std::max_element(out.density.begin(), out.density.end());
  if (!(peak > 0.0)) fail(ErrorCode::kNegativeMass, "strip density has no positive mass");
  for (double& v : out.density) {
    if (v < 0.0) {
      if (v < -options.clip * peak) {
        fail(ErrorCode::kNegativeMass, "strip density has a negative entry " + format_number(v / peak) +
                                           " relative to its peak");
      }
      v = 0.0;
      ++out.clipped;
    }
  }

  // Adjoint residual on the solved layers.
  std::vector<double> res(static_cast<std::size_t>(hi - lo + 1) * tang, 0.0);
  for (int layer = lo - reach; layer <= hi + reach; ++layer) {
    for (std::size_t t = 0; t < tang; ++t) {
      const double mu = out.density[idx.node(layer, t)];
      const int m = rates(layer, t, targets);
      for (int e = 0; e < m; ++e) {
        const auto& tg = targets[e];
        if (tg.layer >= lo && tg.layer <= hi) res[static_cast<std::size_t>(unknown(tg.layer, tg.t))] += tg.w * mu;
      }
    }
  }
  double rmax = 0.0;
  for (double r : res) rmax = std::max(rmax, std::abs(r));
  out.residual = rmax / (scale * peak);
  if (!(out.residual <= options.linear)) {
    fail(ErrorCode::kConvergence, "strip adjoint residual " + format_number(out.residual) + " above tolerance");
  }

  const double vol = grid.cell_volume();
  const int k = grid.k_trunc;
  out.masses_plus.assign(static_cast<std::size_t>(k), 0.0);
  out.masses_minus.assign(static_cast<std::size_t>(k), 0.0);
  for (int layer = 0; layer < layers; ++layer) {
    double s = 0.0;
    for (std::size_t t = 0; t < tang; ++t) s += out.density[idx.node(layer, t)];
    const int cell = (layer - kn) >= 0 ? (layer - kn) / n : (layer - kn + 1) / n - 1;
    if (cell >= 0) {
      out.masses_plus[static_cast<std::size_t>(cell)] += s * vol;
    } else {
      out.masses_minus[static_cast<std::size_t>(-cell - 1)] += s * vol;
    }
  }

  QOptions qopt = options.q;
  if (qopt.burn_in < 0) qopt.burn_in = static_cast<int>(std::ceil(b.eta()));
  out.q = extract_q(out.masses_plus, out.masses_minus, qopt);

  const double norm = 0.5 * (out.masses_plus[k - 1] + out.masses_plus[k - 2]) +
                      0.5 * (out.masses_minus[k - 1] + out.masses_minus[k - 2]);
  for (double& v : out.density) v /= norm;
  for (double& v : out.masses_plus) v /= norm;
  for (double& v : out.masses_minus) v /= norm;
  out.c_plus = cp / norm;
  out.c_minus = cm / norm;
  return out;
}

void check_cell(const CellSolution& cell, Side expected, const GridSpec& grid) {
  const char* side = side_name(expected);
  if (cell.side != expected) fail(ErrorCode::kInvalidInput, std::string(side) + " cell solution is for the other side");
  if (!same_torus_grid(cell.grid, grid)) {
    fail(ErrorCode::kGridMismatch, std::string(side) + " cell solution was computed on a different grid");
  }
}

}  // namespace

StripMeasure solve_strip_measure(const InterfaceDriftField& b, const CellSolution& plus, const CellSolution& minus,
                                 const GridSpec& grid, const StripOptions& options) {
  grid.validate_strip();
  if (b.dim() != grid.dim) fail(ErrorCode::kGridMismatch, "drift and strip grid dimensions differ");
  check_cell(plus, Side::kPlus, grid);
  check_cell(minus, Side::kMinus, grid);
  if (plus.stencil != options.stencil || minus.stencil != options.stencil) {
    fail(ErrorCode::kGridMismatch, "cell solutions use a different stencil than the strip solve");
  }
  if (b.eta() + 1.0 >= grid.k_trunc) {
    fail(ErrorCode::kInvalidInput, "interface strip reaches the far-field closure layer; increase k_trunc");
  }

  GridSpec g = grid;
  std::vector<int> history;
  while (true) {
    history.push_back(g.k_trunc);
    const bool can_refine = options.auto_refine && 2 * g.k_trunc <= options.k_max;
    try {
      StripMeasure s = solve_once(b, plus, minus, g, options);
      if (can_refine && s.q.tail_bound() > options.contamination) {
        g.k_trunc *= 2;
        continue;
      }
      s.k_history = history;
      return s;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kTruncation && can_refine) {
        g.k_trunc *= 2;
        continue;
      }
      throw;
    }
  }
}

double cell_profile_error(const StripMeasure& strip, const CellSolution& cell, int j) {
  const int n = strip.grid.n;
  const int kn = strip.grid.k_trunc * n;
  if (j < 0 || j >= strip.grid.k_trunc) fail(ErrorCode::kInvalidInput, "cell index outside the truncated strip");
  if (!same_torus_grid(cell.grid, strip.grid)) fail(ErrorCode::kGridMismatch, "cell and strip grids differ");
  const bool plus = cell.side == Side::kPlus;
  const double q = plus ? strip.q.q_plus : strip.q.q_minus;
  const int first = plus ? kn + j * n : kn - (j + 1) * n;
  const std::size_t tang = strip.tangential();
  double err = 0.0;
  double peak = 0.0;
  for (int l = 0; l < n; ++l) {
    const int layer = first + l;
    for (std::size_t t = 0; t < tang; ++t) {
      const double ref = q * cell.mu.values[static_cast<std::size_t>(layer % n) * tang + t];
      err = std::max(err, std::abs(strip.at(layer, t) - ref));
      peak = std::max(peak, ref);
    }
  }
  return err / peak;
}

std::pair<double, double> compute_p(double q_plus, double q_minus, double d11_plus, double d11_minus) {
  if (!(d11_plus > 0.0) || !(d11_minus > 0.0)) {
    fail(ErrorCode::kInvalidInput, "D11 must be positive on both sides");
  }
  if (!(q_plus >= 0.0) || !(q_minus >= 0.0) || std::abs(q_plus + q_minus - 1.0) > 1e-12) {
    fail(ErrorCode::kInvalidInput, "q+ and q- must be nonnegative and sum to one");
  }
  const double p = q_plus * d11_plus / (q_plus * d11_plus + q_minus * d11_minus);
  return {p, 1.0 - p};
}

AlphaResult compute_alpha(const StripMeasure& mu, const InterfaceDriftField& b, double p_plus, double p_minus,
                          const Eigen::MatrixXd& d_plus, const Eigen::MatrixXd& d_minus,
                          const CellSolution* cell_plus, const CellSolution* cell_minus) {
  const GridSpec& g = mu.grid;
  if (b.dim() != g.dim) fail(ErrorCode::kGridMismatch, "drift and strip dimensions differ");
  if (std::abs(mu.q.q_plus + mu.q.q_minus - 1.0) > 1e-12) {
    fail(ErrorCode::kInvalidInput, "strip measure is not normalised to q+ + q- = 1");
  }
  const StripIndex idx(g);
  const int kn = g.k_trunc * g.n;
  const double h = g.h();

  AlphaResult out;
  for (int layer = 0; layer < idx.layers(); ++layer) {
    for (std::size_t t = 0; t < idx.tangential(); ++t) {
      Vec x = idx.tangential_coords(t);
      x[0] = (layer - kn) * h;
      const Vec v = b(x);
      const double w = mu.density[idx.node(layer, t)];
      for (int j = 1; j < g.dim; ++j) out.integral[j] += v[j] * w;
    }
  }
  const double factor = 2.0 * (p_plus / d_plus(0, 0) + p_minus / d_minus(0, 0));
  for (int j = 1; j < g.dim; ++j) {
    out.integral[j] *= g.cell_volume();
    out.alpha[j] = factor * out.integral[j];
  }

  if (cell_plus != nullptr && cell_minus != nullptr) {
    const Vec cp = check_centering(b.plus(), cell_plus->mu);
    const Vec cm = check_centering(b.minus(), cell_minus->mu);
    for (int j = 1; j < g.dim; ++j) {
      out.tail_residual =
          std::max(out.tail_residual, std::max(std::abs(mu.c_plus * cp[j]), std::abs(mu.c_minus * cm[j])));
    }
    if (out.tail_residual > kAlphaTailTolerance) {
      fail(ErrorCode::kTruncation, "far-field tangential flux " + format_number(out.tail_residual) +
                                       " per cell exceeds " + std::to_string(kAlphaTailTolerance));
    }
  }
  return out;
}

namespace {

Eigen::MatrixXd lower_factor(const Eigen::MatrixXd& d, const char* side, double& err) {
  Eigen::LLT<Eigen::MatrixXd> llt(d);
  if (llt.info() != Eigen::Success) {
    fail(ErrorCode::kFactorization, std::string("D on the ") + side + " side is not positive definite");
  }
  Eigen::MatrixXd m = llt.matrixL();
  err = std::max(err, (m * m.transpose() - d).norm());
  return m;
}

InterfaceParams finish(InterfaceParams p) {
  const int d = p.dim;
  if (p.D_plus.rows() != d || p.D_plus.cols() != d || p.D_minus.rows() != d || p.D_minus.cols() != d) {
    fail(ErrorCode::kDimensionMismatch, "effective tensors do not match the dimension");
  }
  if (!(p.p_plus > 0.0 && p.p_plus < 1.0)) fail(ErrorCode::kInvalidInput, "p+ must lie strictly inside (0, 1)");
  p.M_plus = lower_factor(p.D_plus, "plus", p.factor_error);
  p.M_minus = lower_factor(p.D_minus, "minus", p.factor_error);
  if (p.factor_error > 1e-12 * std::max(1.0, std::max(p.D_plus.norm(), p.D_minus.norm()))) {
    fail(ErrorCode::kFactorization, "Cholesky factor does not reproduce D");
  }
  p.K = Eigen::VectorXd::Zero(d);
  p.K[0] = p.p_plus - p.p_minus;
  for (int j = 1; j < d; ++j) p.K[j] = p.alpha[j];
  return p;
}

}  // namespace

InterfaceParams assemble_interface_params(const CellSolution& plus, const CellSolution& minus, const QEstimate& q,
                                          const AlphaResult& alpha) {
  InterfaceParams p;
  p.dim = static_cast<int>(plus.D.rows());
  p.D_plus = plus.D;
  p.D_minus = minus.D;
  const auto [pp, pm] = compute_p(q.q_plus, q.q_minus, plus.D(0, 0), minus.D(0, 0));
  p.p_plus = pp;
  p.p_minus = pm;
  p.q_plus = q.q_plus;
  p.q_minus = q.q_minus;
  p.alpha = alpha.alpha;
  p.rate_plus = q.rate_plus;
  p.rate_minus = q.rate_minus;
  p.tail_bound = q.tail_bound();
  p.alpha_tail_residual = alpha.tail_residual;
  return finish(std::move(p));
}

InterfaceParams make_interface_params(double p_plus, const Vec& alpha, const Eigen::MatrixXd& d_plus,
                                      const Eigen::MatrixXd& d_minus) {
  InterfaceParams p;
  p.dim = static_cast<int>(d_plus.rows());
  if (p.dim < 1 || p.dim > kMaxDim) fail(ErrorCode::kInvalidInput, "dimension outside the supported range");
  p.D_plus = d_plus;
  p.D_minus = d_minus;
  p.p_plus = p_plus;
  p.p_minus = 1.0 - p_plus;
  if (d_plus.rows() > 0 && d_minus.rows() > 0 && d_plus(0, 0) > 0.0 && d_minus(0, 0) > 0.0) {
    const double a = p_plus / d_plus(0, 0);
    const double c = p.p_minus / d_minus(0, 0);
    p.q_plus = a / (a + c);
    p.q_minus = 1.0 - p.q_plus;
  }
  p.alpha = alpha;
  p.alpha[0] = 0.0;
  return finish(std::move(p));
}

}  // namespace ihom

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

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "ihom/estimate.hpp"
#include "ihom/rng.hpp"
#include "ihom/strip_solver.hpp"
#include "ihom/types.hpp"

namespace ihom {

/// Lattice scheme for the limit process.
///
/// The first coordinate is a walk z on Z with time h^2 per step, mapped to
/// X1 = h sqrt(D11+) z for z > 0 and h sqrt(D11-) z for z <= 0. At z = 0 it
/// steps up with probability beta, where
///   beta / (1 - beta) = p+ sqrt(D11-) / (p- sqrt(D11+)),
/// so that exits from symmetric levels +-delta happen on the plus side with
/// probability p+. Each zero visit adds h (beta sqrt(D11+) + (1 - beta) sqrt(D11-))
/// to the symmetric local time.
struct LimitScheme {
  double h = 0.01;
  InterfaceParams params;
  double horizon = 1.0;

  /// Throws kValidation unless h > 0, p+ in (0,1) and horizon / h^2 >= 1e4.
  void validate() const;
  double skew_beta() const;
  double local_time_step() const;
  long long steps() const;
};

inline constexpr long long kMinLimitSteps = 10000;

struct SkewPath {
  std::vector<double> t;
  std::vector<double> x1;
  /// Nondecreasing; grows only on steps leaving zero.
  std::vector<double> local_time;
};

SkewPath simulate_skew_first(const LimitScheme& scheme, PathRng& rng);

struct LimitPath {
  int dim = 1;
  std::vector<double> t;
  std::vector<Vec> x;
  std::vector<double> local_time;
};

/// Full path; x0[0] is snapped to the walk lattice.
LimitPath simulate_limit_path(const LimitScheme& scheme, const Vec& x0, PathRng& rng);

/// Summary of one limit path at the horizon.
struct LimitEndpoint {
  Vec x0{};
  Vec x{};
  double local_time = 0.0;
  /// Time spent with X1 > 0 and X1 <= 0.
  double time_plus = 0.0;
  double time_minus = 0.0;
};

LimitEndpoint simulate_limit_endpoint(const LimitScheme& scheme, const Vec& x0, PathRng& rng);

/// n endpoints with per-path seeds derived from (seed, stream).
std::vector<LimitEndpoint> simulate_limit_endpoints(const LimitScheme& scheme, const Vec& x0, long long n,
                                                    std::uint64_t seed, Stream stream = Stream::kLimitPaths);

/// P[X1 exits (-delta, delta) on the plus side], walk started at zero.
/// P(first coordinate reaches +delta before -delta) from zero. Each level is
/// rounded up to the lattice of its side, so off-lattice delta carries an
/// O(h / delta) bias.
PathEstimate skew_exit_probability(const InterfaceParams& params, double h, double delta, long long n,
                                   std::uint64_t seed);

/// Piecewise quadratic f+-(x) = c + g+-.x + x^T A+- x / 2 on x1 > 0 and x1 <= 0.
struct GluingTestFunction {
  int dim = 1;
  double c = 0.0;
  Eigen::VectorXd grad_plus;
  Eigen::VectorXd grad_minus;
  Eigen::MatrixXd hess_plus;
  Eigen::MatrixXd hess_minus;

  double operator()(const Vec& x) const;
  /// D+-_ij / 2 d_i d_j f on each side (constant for quadratics).
  double generator_plus(const InterfaceParams& p) const;
  double generator_minus(const InterfaceParams& p) const;
};

/// Caller-chosen part of a test function; the plus-side normal slope and the
/// mixed plus-side entries A+_{1k} (k >= 2) are solved from the gluing condition.
struct QuadraticSpec {
  int dim = 1;
  double c = 0.0;
  /// Shared gradient; entry 0 is the minus-side normal slope.
  Vec grad{};
  /// Minus-side Hessian (symmetric).
  Eigen::MatrixXd hess;
  /// Plus-side second normal derivative.
  double a11_plus = 0.0;
};

GluingTestFunction make_gluing_test_function(const InterfaceParams& params, const QuadraticSpec& spec);

/// Raw construction without solving; used for negative controls.
GluingTestFunction make_piecewise_quadratic(const QuadraticSpec& spec, double slope_plus,
                                            const Eigen::VectorXd& mixed_plus);

/// Largest coefficient of p+ d1 f+ - p- d1 f- + sum_j alpha_j d_j f as an affine function on the interface.
/// `constant` receives the value at the origin of the interface.
double gluing_residual(const GluingTestFunction& f, const InterfaceParams& params, double* constant = nullptr);

/// Continuity defect across x1 = 0 (max coefficient mismatch).
double continuity_defect(const GluingTestFunction& f);

inline constexpr double kGluingTolerance = 1e-10;

/// Mean of f(X_T) - f(X_0) - int L f(X_s) ds over the endpoints. Throws kDomain
/// when f violates the gluing condition unless `negative_control` is set.
PathEstimate verify_martingale_problem(const std::vector<LimitEndpoint>& paths, const GluingTestFunction& f,
                                       const InterfaceParams& params, bool negative_control = false);

/// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::vector<double> a, std::vector<double> b);
/// Asymptotic critical value sqrt(-ln(alpha/2)/2) * sqrt((n+m)/(nm)).
double ks_critical(double alpha, std::size_t n, std::size_t m);

struct LawComparison {
  std::vector<double> ks;
  double max_ks = 0.0;
  /// Critical value at level alpha / dim (Bonferroni over coordinates).
  double threshold = 0.0;
  bool pass = false;
};

LawComparison compare_laws(const std::vector<Vec>& micro, const std::vector<Vec>& limit, int dim,
                           double alpha = 0.01);

/// Samples of the limit process at time t from x0, seeds from (seed, kLimitSamples).
std::vector<Vec> sample_limit(const InterfaceParams& params, double h, double t, const Vec& x0, long long n,
                              std::uint64_t seed);

}  // namespace ihom

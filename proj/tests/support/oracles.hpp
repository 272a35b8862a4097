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

// Closed-form and quadrature reference values used by the tests. Nothing here
// calls into the solvers under test.
#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Modified Bessel function I0 by its power series.
inline double bessel_i0(double x) {
  double term = 1.0;
  double sum = 1.0;
  const double q = 0.25 * x * x;
  for (int k = 1; k < 200 && term > 1e-18 * sum; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
  }
  return sum;
}

/// Composite Gauss-Legendre (5 points) on [a, b] with m panels.
inline double integrate(const std::function<double(double)>& f, double a, double b, int m = 400) {
  static const double xg[5] = {0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640,
                               0.9061798459386640};
  static const double wg[5] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665, 0.2369268850561891,
                               0.2369268850561891};
  const double h = (b - a) / m;
  double s = 0.0;
  for (int i = 0; i < m; ++i) {
    const double c = a + (i + 0.5) * h;
    for (int k = 0; k < 5; ++k) s += wg[k] * f(c + 0.5 * h * xg[k]);
  }
  return 0.5 * h * s;
}

/// One-dimensional periodic gradient field b = -V'. Generator 1/2 u'' + b u'.
struct Periodic1D {
  std::function<double(double)> V;

  double z_minus() const { return integrate([&](double x) { return std::exp(-2.0 * V(x)); }, 0.0, 1.0); }
  double z_plus() const { return integrate([&](double x) { return std::exp(2.0 * V(x)); }, 0.0, 1.0); }
  /// Stationary density e^{-2V} / Z.
  double mu(double x) const { return std::exp(-2.0 * V(x)) / z_minus(); }
  /// Derivative of the corrector: 1 + g' = e^{2V} / int e^{2V}.
  double corrector_slope(double x) const { return std::exp(2.0 * V(x)) / z_plus() - 1.0; }
  /// Harmonic-mean effective diffusivity.
  double D() const { return 1.0 / (z_plus() * z_minus()); }
};

/// Antiderivative B(x) = int_0^x b on a fine table, for a drift b on the line.
class Antiderivative {
 public:
  Antiderivative(std::function<double(double)> b, double lo, double hi, int per_unit = 2000)
      : b_(std::move(b)), lo_(lo), step_(1.0 / per_unit) {
    const int n = static_cast<int>(std::ceil((hi - lo) * per_unit));
    values_.assign(n + 1, 0.0);
    for (int i = 0; i < n; ++i) {
      const double a = lo + i * step_;
      values_[i + 1] = values_[i] + integrate(b_, a, a + step_, 1);
    }
    shift_ = raw(0.0);
  }
  double at(double x) const { return raw(x) - shift_; }

 private:
  double raw(double x) const {
    const int i = static_cast<int>(std::floor((x - lo_) / step_));
    const double a = lo_ + i * step_;
    return values_[i] + integrate(b_, a, x, 1);
  }

  std::function<double(double)> b_;
  double lo_;
  double step_;
  double shift_ = 0.0;
  std::vector<double> values_;
};

/// Limiting cell masses of the reversible 1-D density e^{2B}, normalised so
/// they sum to one. `far` must lie beyond the interface.
inline std::pair<double, double> two_sided_q(const std::function<double(double)>& b, int far = 3) {
  const Antiderivative B(b, -far - 2.0, far + 2.0);
  auto w = [&](double x) { return std::exp(2.0 * B.at(x)); };
  const double plus = integrate(w, far, far + 1.0, 200);
  const double minus = integrate(w, -far - 1.0, -far, 200);
  return {plus / (plus + minus), minus / (plus + minus)};
}

/// Probability that the 1-D diffusion with drift b started at x0 leaves
/// (-L, L) through +L, from the scale function s' = e^{-2B}.
inline double exit_plus(const std::function<double(double)>& b, double x0, double L) {
  const Antiderivative B(b, -L - 1.0, L + 1.0);
  auto s = [&](double x) { return std::exp(-2.0 * B.at(x)); };
  const int m = static_cast<int>(400 * L) + 50;
  return integrate(s, -L, x0, m) / integrate(s, -L, L, m);
}

/// Occupation of [-1, 1] by Brownian motion killed at +-k, from the Green's
/// function g(0, y) = k - |y|.
inline double killed_bm_occupation(double k) {
  return integrate([k](double y) { return k - std::abs(y); }, -1.0, 1.0, 2);
}

/// E|N(0, t)|, which equals the symmetric local time E L_t of Brownian motion.
inline double abs_gaussian_mean(double t) { return std::sqrt(2.0 * t / kPi); }

/// Kolmogorov distribution tail 2 sum (-1)^{k-1} e^{-2 k^2 x^2}.
inline double kolmogorov_tail(double x) {
  double s = 0.0;
  for (int k = 1; k < 100; ++k) s += (k % 2 ? 2.0 : -2.0) * std::exp(-2.0 * k * k * x * x);
  return s;
}

/// x with kolmogorov_tail(x) = alpha, by bisection.
inline double kolmogorov_quantile(double alpha) {
  double lo = 0.3;
  double hi = 3.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (kolmogorov_tail(mid) > alpha ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace oracle

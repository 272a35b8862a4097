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

#include "ihom/limit_process.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ihom/error.hpp"

namespace ihom {

void LimitScheme::validate() const {
  if (!(h > 0.0) || !std::isfinite(h)) fail(ErrorCode::kValidation, "limit step h must be positive");
  if (!(params.p_plus > 0.0 && params.p_plus < 1.0)) fail(ErrorCode::kValidation, "p+ must lie in (0, 1)");
  if (!(horizon > 0.0)) fail(ErrorCode::kValidation, "limit horizon must be positive");
  if (steps() < kMinLimitSteps) {
    fail(ErrorCode::kValidation, "horizon / h^2 = " + std::to_string(steps()) + " steps; at least " +
                                     std::to_string(kMinLimitSteps) + " are required");
  }
  if (params.M_plus.rows() != params.dim || params.M_minus.rows() != params.dim || params.K.size() != params.dim) {
    fail(ErrorCode::kValidation, "interface parameters are incomplete");
  }
}

double LimitScheme::skew_beta() const {
  const double sp = std::sqrt(params.D_plus(0, 0));
  const double sm = std::sqrt(params.D_minus(0, 0));
  return params.p_plus * sm / (params.p_plus * sm + params.p_minus * sp);
}

double LimitScheme::local_time_step() const {
  const double b = skew_beta();
  return h * (b * std::sqrt(params.D_plus(0, 0)) + (1.0 - b) * std::sqrt(params.D_minus(0, 0)));
}

long long LimitScheme::steps() const { return static_cast<long long>(std::llround(horizon / (h * h))); }

namespace {

// Walk state plus tangential coordinates.
class Walker {
 public:
  Walker(const LimitScheme& s, const Vec& x0)
      : h_(s.h),
        beta_(s.skew_beta()),
        dl_(s.local_time_step()),
        dim_(s.params.dim),
        sp_(std::sqrt(s.params.D_plus(0, 0))),
        sm_(std::sqrt(s.params.D_minus(0, 0))),
        mp_(s.params.M_plus),
        mm_(s.params.M_minus),
        k_(s.params.K) {
    const double scale = x0[0] > 0.0 ? h_ * sp_ : h_ * sm_;
    z_ = std::llround(x0[0] / scale);
    x_ = x0;
    x_[0] = x1();
  }

  double x1() const { return z_ > 0 ? h_ * sp_ * static_cast<double>(z_) : h_ * sm_ * static_cast<double>(z_); }
  const Vec& x() const { return x_; }
  long long z() const { return z_; }
  double local_time() const { return local_; }

  // One step of time h^2; returns true when the step started on the plus side.
  bool step(PathRng& rng) {
    const bool plus = z_ > 0;
    double dl = 0.0;
    int dz = 0;
    double dw1 = 0.0;
    if (z_ == 0) {
      dz = rng.uniform() < beta_ ? 1 : -1;
      dl = dl_;
      dw1 = h_ * (dz - (2.0 * beta_ - 1.0));
    } else {
      dz = coin(rng) ? 1 : -1;
      dw1 = h_ * dz;
    }
    if (dim_ > 1) {
      const Eigen::MatrixXd& m = plus ? mp_ : mm_;
      std::array<double, kMaxDim> dw{};
      dw[0] = dw1;
      for (int k = 1; k < dim_; ++k) dw[k] = h_ * rng.gaussian();
      for (int j = 1; j < dim_; ++j) {
        double s = k_[j] * dl;
        for (int k = 0; k <= j; ++k) s += m(j, k) * dw[k];
        x_[j] += s;
      }
    }
    z_ += dz;
    local_ += dl;
    x_[0] = x1();
    return plus;
  }

 private:
  bool coin(PathRng& rng) {
    if (left_ == 0) {
      bits_ = rng.bits();
      left_ = 64;
    }
    const bool b = (bits_ & 1U) != 0;
    bits_ >>= 1U;
    --left_;
    return b;
  }

  double h_;
  double beta_;
  double dl_;
  int dim_;
  double sp_;
  double sm_;
  Eigen::MatrixXd mp_;
  Eigen::MatrixXd mm_;
  Eigen::VectorXd k_;
  long long z_ = 0;
  Vec x_{};
  double local_ = 0.0;
  std::uint64_t bits_ = 0;
  int left_ = 0;
};

}  // namespace

SkewPath simulate_skew_first(const LimitScheme& scheme, PathRng& rng) {
  scheme.validate();
  LimitScheme first = scheme;
  // Only the first coordinate is needed; drop tangential work.
  first.params.dim = 1;
  first.params.M_plus = scheme.params.M_plus.topLeftCorner(1, 1);
  first.params.M_minus = scheme.params.M_minus.topLeftCorner(1, 1);
  first.params.K = scheme.params.K.head(1);
  Walker w(first, Vec{});
  const long long n = scheme.steps();
  SkewPath p;
  p.t.reserve(static_cast<std::size_t>(n + 1));
  p.x1.reserve(static_cast<std::size_t>(n + 1));
  p.local_time.reserve(static_cast<std::size_t>(n + 1));
  p.t.push_back(0.0);
  p.x1.push_back(0.0);
  p.local_time.push_back(0.0);
  const double dt = scheme.h * scheme.h;
  for (long long k = 0; k < n; ++k) {
    w.step(rng);
    p.t.push_back(static_cast<double>(k + 1) * dt);
    p.x1.push_back(w.x1());
    p.local_time.push_back(w.local_time());
  }
  return p;
}

LimitPath simulate_limit_path(const LimitScheme& scheme, const Vec& x0, PathRng& rng) {
  scheme.validate();
  Walker w(scheme, x0);
  const long long n = scheme.steps();
  const double dt = scheme.h * scheme.h;
  LimitPath p;
  p.dim = scheme.params.dim;
  p.t.reserve(static_cast<std::size_t>(n + 1));
  p.x.reserve(static_cast<std::size_t>(n + 1));
  p.local_time.reserve(static_cast<std::size_t>(n + 1));
  p.t.push_back(0.0);
  p.x.push_back(w.x());
  p.local_time.push_back(0.0);
  for (long long k = 0; k < n; ++k) {
    w.step(rng);
    p.t.push_back(static_cast<double>(k + 1) * dt);
    p.x.push_back(w.x());
    p.local_time.push_back(w.local_time());
  }
  return p;
}

LimitEndpoint simulate_limit_endpoint(const LimitScheme& scheme, const Vec& x0, PathRng& rng) {
  Walker w(scheme, x0);
  const long long n = scheme.steps();
  long long plus = 0;
  LimitEndpoint e;
  e.x0 = w.x();
  for (long long k = 0; k < n; ++k) {
    if (w.step(rng)) ++plus;
  }
  const double dt = scheme.h * scheme.h;
  e.x = w.x();
  e.local_time = w.local_time();
  e.time_plus = static_cast<double>(plus) * dt;
  e.time_minus = static_cast<double>(n - plus) * dt;
  return e;
}

std::vector<LimitEndpoint> simulate_limit_endpoints(const LimitScheme& scheme, const Vec& x0, long long n,
                                                    std::uint64_t seed, Stream stream) {
  scheme.validate();
  std::vector<LimitEndpoint> out;
  out.reserve(static_cast<std::size_t>(std::max<long long>(n, 0)));
  for (long long i = 0; i < n; ++i) {
    PathRng rng(derive_seed(seed, stream, static_cast<std::uint64_t>(i)));
    out.push_back(simulate_limit_endpoint(scheme, x0, rng));
  }
  return out;
}

PathEstimate skew_exit_probability(const InterfaceParams& params, double h, double delta, long long n,
                                   std::uint64_t seed) {
  if (!(params.p_plus > 0.0 && params.p_plus < 1.0)) fail(ErrorCode::kValidation, "p+ must lie in (0, 1)");
  if (!(h > 0.0) || !(delta > h)) fail(ErrorCode::kValidation, "need 0 < h < delta");
  LimitScheme s;
  s.h = h;
  s.params = params;
  const double beta = s.skew_beta();
  const auto up = static_cast<long long>(std::ceil(delta / (h * std::sqrt(params.D_plus(0, 0))) - 1e-9));
  const auto down = static_cast<long long>(std::ceil(delta / (h * std::sqrt(params.D_minus(0, 0))) - 1e-9));
  RunningStats stats;
  for (long long i = 0; i < n; ++i) {
    PathRng rng(derive_seed(seed, Stream::kSkewExit, static_cast<std::uint64_t>(i)));
    long long z = 0;
    std::uint64_t bits = 0;
    int left = 0;
    while (z < up && z > -down) {
      if (z == 0) {
        z += rng.uniform() < beta ? 1 : -1;
        continue;
      }
      if (left == 0) {
        bits = rng.bits();
        left = 64;
      }
      z += (bits & 1U) ? 1 : -1;
      bits >>= 1U;
      --left;
    }
    stats.add(z > 0 ? 1.0 : 0.0);
  }
  return PathEstimate::from("skew_exit_plus", stats, seed);
}

double GluingTestFunction::operator()(const Vec& x) const {
  const bool plus = x[0] > 0.0;
  const Eigen::VectorXd& g = plus ? grad_plus : grad_minus;
  const Eigen::MatrixXd& a = plus ? hess_plus : hess_minus;
  double v = c;
  for (int i = 0; i < dim; ++i) {
    v += g[i] * x[i];
    for (int j = 0; j < dim; ++j) v += 0.5 * a(i, j) * x[i] * x[j];
  }
  return v;
}

double GluingTestFunction::generator_plus(const InterfaceParams& p) const {
  return 0.5 * (p.D_plus.cwiseProduct(hess_plus)).sum();
}

double GluingTestFunction::generator_minus(const InterfaceParams& p) const {
  return 0.5 * (p.D_minus.cwiseProduct(hess_minus)).sum();
}

namespace {

void check_spec(const QuadraticSpec& spec) {
  if (spec.dim < 1 || spec.dim > kMaxDim) fail(ErrorCode::kInvalidInput, "test function dimension out of range");
  if (spec.hess.rows() != spec.dim || spec.hess.cols() != spec.dim) {
    fail(ErrorCode::kDimensionMismatch, "Hessian does not match the dimension");
  }
  if ((spec.hess - spec.hess.transpose()).norm() > 1e-14) fail(ErrorCode::kInvalidInput, "Hessian must be symmetric");
}

}  // namespace

GluingTestFunction make_piecewise_quadratic(const QuadraticSpec& spec, double slope_plus,
                                            const Eigen::VectorXd& mixed_plus) {
  check_spec(spec);
  const int d = spec.dim;
  if (mixed_plus.size() != d) fail(ErrorCode::kDimensionMismatch, "mixed coefficient vector has wrong size");
  GluingTestFunction f;
  f.dim = d;
  f.c = spec.c;
  f.grad_minus = Eigen::VectorXd::Zero(d);
  for (int i = 0; i < d; ++i) f.grad_minus[i] = spec.grad[i];
  f.grad_plus = f.grad_minus;
  f.grad_plus[0] = slope_plus;
  f.hess_minus = spec.hess;
  f.hess_plus = spec.hess;
  f.hess_plus(0, 0) = spec.a11_plus;
  for (int k = 1; k < d; ++k) {
    f.hess_plus(0, k) = mixed_plus[k];
    f.hess_plus(k, 0) = mixed_plus[k];
  }
  return f;
}

GluingTestFunction make_gluing_test_function(const InterfaceParams& params, const QuadraticSpec& spec) {
  check_spec(spec);
  if (spec.dim != params.dim) fail(ErrorCode::kDimensionMismatch, "test function and parameter dimensions differ");
  const double pp = params.p_plus;
  const double pm = params.p_minus;
  if (!(pp > 0.0) || !(pp < 1.0)) fail(ErrorCode::kValidation, "p+ must lie strictly inside (0, 1)");
  const int d = spec.dim;
  double tang = 0.0;
  for (int j = 1; j < d; ++j) tang += params.alpha[j] * spec.grad[j];
  const double slope = (pm * spec.grad[0] - tang) / pp;
  Eigen::VectorXd mixed = Eigen::VectorXd::Zero(d);
  for (int k = 1; k < d; ++k) {
    double s = 0.0;
    for (int j = 1; j < d; ++j) s += params.alpha[j] * spec.hess(j, k);
    mixed[k] = (pm * spec.hess(0, k) - s) / pp;
  }
  GluingTestFunction f = make_piecewise_quadratic(spec, slope, mixed);
  if (gluing_residual(f, params) > kGluingTolerance) {
    fail(ErrorCode::kDomain, "gluing solve did not satisfy the interface condition");
  }
  return f;
}

double gluing_residual(const GluingTestFunction& f, const InterfaceParams& params, double* constant) {
  const int d = f.dim;
  // Affine function of the tangential coordinates: r0 + sum_k r_k x_k.
  double r0 = params.p_plus * f.grad_plus[0] - params.p_minus * f.grad_minus[0];
  for (int j = 1; j < d; ++j) r0 += params.alpha[j] * f.grad_minus[j];
  double worst = std::abs(r0);
  for (int k = 1; k < d; ++k) {
    double rk = params.p_plus * f.hess_plus(0, k) - params.p_minus * f.hess_minus(0, k);
    for (int j = 1; j < d; ++j) rk += params.alpha[j] * f.hess_minus(j, k);
    worst = std::max(worst, std::abs(rk));
  }
  if (constant != nullptr) *constant = r0;
  return worst;
}

double continuity_defect(const GluingTestFunction& f) {
  double worst = 0.0;
  for (int j = 1; j < f.dim; ++j) {
    worst = std::max(worst, std::abs(f.grad_plus[j] - f.grad_minus[j]));
    for (int k = 1; k < f.dim; ++k) worst = std::max(worst, std::abs(f.hess_plus(j, k) - f.hess_minus(j, k)));
  }
  return worst;
}

PathEstimate verify_martingale_problem(const std::vector<LimitEndpoint>& paths, const GluingTestFunction& f,
                                       const InterfaceParams& params, bool negative_control) {
  if (f.dim != params.dim) fail(ErrorCode::kDimensionMismatch, "test function and parameter dimensions differ");
  if (continuity_defect(f) > kGluingTolerance) fail(ErrorCode::kDomain, "test function is discontinuous at x1 = 0");
  const double r = gluing_residual(f, params);
  if (!negative_control && r > kGluingTolerance) {
    fail(ErrorCode::kDomain, "test function violates the gluing condition (residual " + format_number(r) + ")");
  }
  if (paths.empty()) fail(ErrorCode::kInvalidInput, "no limit paths supplied");
  const double gp = f.generator_plus(params);
  const double gm = f.generator_minus(params);
  RunningStats stats;
  for (const auto& p : paths) stats.add(f(p.x) - f(p.x0) - p.time_plus * gp - p.time_minus * gm);
  return PathEstimate::from(negative_control ? "martingale_defect_control" : "martingale_defect", stats, 0);
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) fail(ErrorCode::kInvalidInput, "KS statistic needs nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_critical(double alpha, std::size_t n, std::size_t m) {
  const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  const double nn = static_cast<double>(n);
  const double mm = static_cast<double>(m);
  return c * std::sqrt((nn + mm) / (nn * mm));
}

LawComparison compare_laws(const std::vector<Vec>& micro, const std::vector<Vec>& limit, int dim, double alpha) {
  if (micro.size() != limit.size()) fail(ErrorCode::kInvalidInput, "sample sets differ in size");
  if (micro.size() < 1000) fail(ErrorCode::kInvalidInput, "need at least 1000 samples per set");
  if (dim < 1 || dim > kMaxDim) fail(ErrorCode::kInvalidInput, "dimension out of range");
  LawComparison out;
  for (int i = 0; i < dim; ++i) {
    std::vector<double> a;
    std::vector<double> b;
    a.reserve(micro.size());
    b.reserve(limit.size());
    for (const auto& v : micro) a.push_back(v[i]);
    for (const auto& v : limit) b.push_back(v[i]);
    out.ks.push_back(ks_statistic(std::move(a), std::move(b)));
    out.max_ks = std::max(out.max_ks, out.ks.back());
  }
  out.threshold = ks_critical(alpha / dim, micro.size(), limit.size());
  out.pass = out.max_ks < out.threshold;
  return out;
}

std::vector<Vec> sample_limit(const InterfaceParams& params, double h, double t, const Vec& x0, long long n,
                              std::uint64_t seed) {
  LimitScheme s;
  s.h = h;
  s.params = params;
  s.horizon = t;
  const auto ends = simulate_limit_endpoints(s, x0, n, seed, Stream::kLimitSamples);
  std::vector<Vec> out;
  out.reserve(ends.size());
  for (const auto& e : ends) out.push_back(e.x);
  return out;
}

}  // namespace ihom

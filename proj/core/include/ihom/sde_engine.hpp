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

#include "ihom/drift_field.hpp"
#include "ihom/estimate.hpp"
#include "ihom/rng.hpp"
#include "ihom/types.hpp"

namespace ihom {

/// Monte Carlo settings. Times and lengths in `dt` are microscopic.
struct SimConfig {
  double epsilon = 0.1;
  /// delta = epsilon^a.
  double a = 0.75;
  double dt = 1e-4;
  /// Horizon as a multiple of the zero-drift expected exit time.
  double horizon_factor = 50.0;
  std::uint64_t seed = 1;
  long long paths = 1000;
  /// Brownian-bridge test for crossings between grid times.
  bool bridge = true;

  double delta() const;
  /// Microscopic half-width delta / epsilon of the exit slab.
  double micro_level() const { return delta() / epsilon; }
  /// Throws kValidation; with `hitting` also enforces dt <= min(delta^2 / 100, 1e-3).
  void validate(bool hitting) const;
};

/// Largest admissible dt for delta-level hitting times.
double max_hitting_dt(double epsilon, double a);

struct Path {
  int dim = 1;
  std::vector<double> t;
  std::vector<Vec> x;
};

/// Euler-Maruyama step x += b(x) dt + sqrt(dt) xi.
class EulerStepper {
 public:
  EulerStepper(const InterfaceDriftField& b, double dt) : b_(&b), dt_(dt), sqdt_(std::sqrt(dt)), dim_(b.dim()) {}

  void step(Vec& x, PathRng& rng) const {
    const Vec v = (*b_)(x);
    for (int i = 0; i < dim_; ++i) x[i] += v[i] * dt_ + sqdt_ * rng.gaussian();
  }
  /// Same step, also returning the drift used.
  Vec step_with_drift(Vec& x, PathRng& rng) const {
    const Vec v = (*b_)(x);
    for (int i = 0; i < dim_; ++i) x[i] += v[i] * dt_ + sqdt_ * rng.gaussian();
    return v;
  }
  double dt() const { return dt_; }
  int dim() const { return dim_; }

 private:
  const InterfaceDriftField* b_;
  double dt_;
  double sqdt_;
  int dim_;
};

/// Stores every step up to time T (the last step is shortened to land on T).
Path simulate_path(const InterfaceDriftField& b, const Vec& x0, double dt, double T, PathRng& rng);

/// epsilon * X(t / epsilon^2), linearly interpolated between stored steps.
Vec rescaled_state(const Path& path, double epsilon, double t);

struct HitResult {
  double tau = 0.0;
  Vec state{};
  /// +1 or -1 for the exit side, 0 when censored.
  int side = 0;
  bool censored = false;
};

/// First time |X_1| >= level (microscopic units), with linear interpolation at
/// the crossing and an optional Brownian-bridge crossing test between steps.
HitResult hitting_time(const InterfaceDriftField& b, const Vec& x0, double level, double dt, double horizon,
                       PathRng& rng, bool bridge = true);

/// Five witness points across the interface: x1 = -eta + eta i / 2, x_j = i / 5.
std::vector<Vec> interface_start_points(const InterfaceDriftField& b);

struct ExitEstimate {
  PathEstimate plus;
  PathEstimate minus;
  std::vector<PathEstimate> per_point;
  /// max - min of the per-point exit probabilities.
  double spread = 0.0;
  long long censored = 0;
};

/// P[X^eps(tau^delta) > 0] pooled over the witness points (paths split evenly).
ExitEstimate estimate_exit_probs(const InterfaceDriftField& b, const SimConfig& config,
                                 const std::vector<Vec>& starts = {});

/// E[X_j(tau) - X_j(0)] * epsilon / delta for j = 2..d (index j-1 in the result; entry 0 unused).
std::vector<PathEstimate> estimate_tangential_drift(const InterfaceDriftField& b, const SimConfig& config,
                                                    const std::vector<Vec>& starts = {});

/// (1/k) E int_0^{tau_k} b_j(X_s) ds for j = 2..d with tau_k the exit time of |X_1| < k.
std::vector<PathEstimate> estimate_alpha_longrun(const InterfaceDriftField& b, double k, const Vec& x0,
                                                 const SimConfig& config);

/// E_0 int_0^{tau_k} 1_{[-1,1]}(B_s) ds for standard Brownian motion, sampled
/// exactly through the walk embedded at hitting times of the lattice h Z.
PathEstimate brownian_occupation(double k, long long paths, std::uint64_t seed, double h = 0.1);

struct OccupationStats {
  /// epsilon^2 * (micro time in |x1| <= eta) over a window of rescaled length delta, divided by sqrt(delta).
  PathEstimate occupation;
  /// Entries into the slab after leaving to |x1| >= 2 eta, per window.
  PathEstimate excursions;
  /// excursions / (sqrt(delta) / epsilon).
  double excursion_constant = 0.0;
};

OccupationStats interface_occupation_stats(const InterfaceDriftField& b, const SimConfig& config);

/// Samples of X^eps(t) = eps X(t / eps^2) started from x0 (microscopic).
std::vector<Vec> sample_rescaled(const InterfaceDriftField& b, double t, const Vec& x0, const SimConfig& config);

}  // namespace ihom

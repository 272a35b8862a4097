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

#include "ihom/sde_engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ihom/error.hpp"

namespace ihom {

double SimConfig::delta() const { return std::pow(epsilon, a); }

double max_hitting_dt(double epsilon, double a) {
  const double delta = std::pow(epsilon, a);
  return std::min(delta * delta / 100.0, 1e-3);
}

void SimConfig::validate(bool hitting) const {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) fail(ErrorCode::kValidation, "epsilon must lie in (0, 1]");
  if (!(a > 0.5 && a < 1.0)) fail(ErrorCode::kValidation, "delta exponent a must lie in (1/2, 1)");
  if (!(dt > 0.0) || !std::isfinite(dt)) fail(ErrorCode::kValidation, "dt must be positive");
  if (!(horizon_factor > 0.0)) fail(ErrorCode::kValidation, "horizon_factor must be positive");
  if (paths < 100) fail(ErrorCode::kValidation, "path count must be at least 100");
  if (hitting && dt > max_hitting_dt(epsilon, a) * (1.0 + 1e-12)) {
    fail(ErrorCode::kValidation, "dt = " + format_number(dt) + " exceeds the hitting-time bound " +
                                     format_number(max_hitting_dt(epsilon, a)));
  }
}

Path simulate_path(const InterfaceDriftField& b, const Vec& x0, double dt, double T, PathRng& rng) {
  if (!(dt > 0.0)) fail(ErrorCode::kInvalidInput, "dt must be positive");
  if (!(T >= dt)) fail(ErrorCode::kInvalidInput, "horizon T must be at least dt");
  if (!all_finite(x0, b.dim())) fail(ErrorCode::kInvalidInput, "non-finite starting point");
  const int d = b.dim();
  const auto steps = static_cast<long long>(std::ceil(T / dt - 1e-9));
  Path p;
  p.dim = d;
  p.t.reserve(static_cast<std::size_t>(steps + 1));
  p.x.reserve(static_cast<std::size_t>(steps + 1));
  p.t.push_back(0.0);
  p.x.push_back(x0);
  Vec x = x0;
  double t = 0.0;
  for (long long k = 0; k < steps; ++k) {
    const double h = std::min(dt, T - t);
    const Vec v = b(x);
    const double s = std::sqrt(h);
    for (int i = 0; i < d; ++i) x[i] += v[i] * h + s * rng.gaussian();
    if (!all_finite(x, d)) fail(ErrorCode::kPathAborted, "path state became non-finite at step " + std::to_string(k));
    t = (k + 1 == steps) ? T : t + h;
    p.t.push_back(t);
    p.x.push_back(x);
  }
  return p;
}

Vec rescaled_state(const Path& path, double epsilon, double t) {
  if (path.t.empty()) fail(ErrorCode::kInvalidInput, "empty path");
  const double s = t / (epsilon * epsilon);
  if (s < 0.0 || s > path.t.back() * (1.0 + 1e-12)) {
    fail(ErrorCode::kHorizon, "rescaled time lies beyond the stored path");
  }
  const auto it = std::upper_bound(path.t.begin(), path.t.end(), s);
  Vec out{};
  if (it == path.t.end()) {
    out = path.x.back();
  } else if (it == path.t.begin()) {
    out = path.x.front();
  } else {
    const auto k = static_cast<std::size_t>(it - path.t.begin());
    const double t0 = path.t[k - 1];
    const double t1 = path.t[k];
    const double w = (s - t0) / (t1 - t0);
    for (int i = 0; i < path.dim; ++i) out[i] = (1.0 - w) * path.x[k - 1][i] + w * path.x[k][i];
  }
  for (int i = 0; i < path.dim; ++i) out[i] *= epsilon;
  return out;
}

HitResult hitting_time(const InterfaceDriftField& b, const Vec& x0, double level, double dt, double horizon,
                       PathRng& rng, bool bridge) {
  const int d = b.dim();
  HitResult r;
  if (std::abs(x0[0]) >= level) {
    r.tau = 0.0;
    r.state = x0;
    r.side = x0[0] >= 0.0 ? 1 : -1;
    return r;
  }
  const EulerStepper stepper(b, dt);
  const double bridge_window = 20.0 * dt;
  Vec x = x0;
  double t = 0.0;
  while (t < horizon) {
    Vec y = x;
    stepper.step(y, rng);
    if (!all_finite(y, d)) fail(ErrorCode::kPathAborted, "path state became non-finite");
    if (std::abs(y[0]) >= level) {
      const double target = y[0] > 0.0 ? level : -level;
      const double theta = (target - x[0]) / (y[0] - x[0]);
      r.tau = t + theta * dt;
      for (int i = 0; i < d; ++i) r.state[i] = x[i] + theta * (y[i] - x[i]);
      r.state[0] = target;
      r.side = y[0] > 0.0 ? 1 : -1;
      return r;
    }
    if (bridge) {
      const double up = (level - x[0]) * (level - y[0]);
      const double dn = (level + x[0]) * (level + y[0]);
      const double near = std::min(up, dn);
      if (near < bridge_window) {
        const double p_up = std::exp(-2.0 * up / dt);
        const double p_dn = std::exp(-2.0 * dn / dt);
        const double u = rng.uniform();
        if (u < p_up + p_dn) {
          r.side = u < p_up ? 1 : -1;
          r.tau = t + 0.5 * dt;
          for (int i = 0; i < d; ++i) r.state[i] = 0.5 * (x[i] + y[i]);
          r.state[0] = r.side * level;
          return r;
        }
      }
    }
    x = y;
    t += dt;
  }
  r.censored = true;
  r.tau = horizon;
  r.state = x;
  return r;
}

std::vector<Vec> interface_start_points(const InterfaceDriftField& b) {
  std::vector<Vec> pts;
  for (int i = 0; i < 5; ++i) {
    Vec x{};
    x[0] = -b.eta() + b.eta() * i / 2.0;
    for (int j = 1; j < b.dim(); ++j) x[j] = i / 5.0;
    pts.push_back(x);
  }
  return pts;
}

namespace {

void check_censoring(long long censored, long long total, const char* what) {
  if (static_cast<double>(censored) > 0.01 * static_cast<double>(total)) {
    fail(ErrorCode::kHorizon, std::string(what) + ": " + std::to_string(censored) + " of " + std::to_string(total) +
                                  " paths censored (above 1%); increase horizon_factor");
  }
}

// Runs config.paths delta-level exits split evenly over the start points.
template <class Visit>
long long run_delta_exits(const InterfaceDriftField& b, const SimConfig& config, const std::vector<Vec>& starts,
                          Stream stream, Visit&& visit) {
  config.validate(true);
  const double level = config.micro_level();
  const double horizon = config.horizon_factor * level * level;
  const auto np = static_cast<long long>(starts.size());
  const long long per = std::max<long long>(1, config.paths / np);
  long long censored = 0;
  for (long long s = 0; s < np; ++s) {
    if (std::abs(starts[s][0]) > level) fail(ErrorCode::kInvalidInput, "start point lies outside the exit slab");
    for (long long k = 0; k < per; ++k) {
      const auto index = static_cast<std::uint64_t>(s * per + k);
      PathRng rng(derive_seed(config.seed, stream, index));
      const HitResult hit = hitting_time(b, starts[s], level, config.dt, horizon, rng, config.bridge);
      if (hit.censored) {
        ++censored;
        continue;
      }
      visit(static_cast<std::size_t>(s), starts[s], hit);
    }
  }
  check_censoring(censored, per * np, "exit estimate");
  return censored;
}

}  // namespace

ExitEstimate estimate_exit_probs(const InterfaceDriftField& b, const SimConfig& config,
                                 const std::vector<Vec>& starts_in) {
  const auto starts = starts_in.empty() ? interface_start_points(b) : starts_in;
  RunningStats pooled;
  std::vector<RunningStats> point(starts.size());
  const long long censored =
      run_delta_exits(b, config, starts, Stream::kExitProbs, [&](std::size_t s, const Vec&, const HitResult& hit) {
        const double v = hit.side > 0 ? 1.0 : 0.0;
        pooled.add(v);
        point[s].add(v);
      });
  ExitEstimate out;
  out.plus = PathEstimate::from("exit_prob_plus", pooled, config.seed, censored);
  out.minus = out.plus;
  out.minus.name = "exit_prob_minus";
  out.minus.value = 1.0 - out.plus.value;
  out.censored = censored;
  double lo = 1.0;
  double hi = 0.0;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    out.per_point.push_back(PathEstimate::from("exit_prob_plus_start" + std::to_string(s), point[s], config.seed));
    lo = std::min(lo, point[s].mean());
    hi = std::max(hi, point[s].mean());
  }
  out.spread = hi - lo;
  return out;
}

std::vector<PathEstimate> estimate_tangential_drift(const InterfaceDriftField& b, const SimConfig& config,
                                                    const std::vector<Vec>& starts_in) {
  const auto starts = starts_in.empty() ? interface_start_points(b) : starts_in;
  const int d = b.dim();
  const double scale = config.epsilon / config.delta();
  std::vector<RunningStats> stats(static_cast<std::size_t>(d));
  const long long censored =
      run_delta_exits(b, config, starts, Stream::kTangential, [&](std::size_t, const Vec& x0, const HitResult& hit) {
        for (int j = 1; j < d; ++j) stats[j].add((hit.state[j] - x0[j]) * scale);
      });
  std::vector<PathEstimate> out(static_cast<std::size_t>(d));
  for (int j = 1; j < d; ++j) {
    out[j] = PathEstimate::from("tangential_drift_" + std::to_string(j + 1), stats[j], config.seed, censored);
  }
  return out;
}

std::vector<PathEstimate> estimate_alpha_longrun(const InterfaceDriftField& b, double k, const Vec& x0,
                                                 const SimConfig& config) {
  if (!(k >= 4.0)) fail(ErrorCode::kInvalidInput, "long-run level k must be at least 4");
  if (!(config.dt > 0.0 && config.dt <= 1e-3)) fail(ErrorCode::kValidation, "long-run dt must lie in (0, 1e-3]");
  if (config.paths < 100) fail(ErrorCode::kValidation, "path count must be at least 100");
  if (std::abs(x0[0]) >= k) fail(ErrorCode::kInvalidInput, "start point lies outside (-k, k)");
  const int d = b.dim();
  const double horizon = config.horizon_factor * k * k;
  const EulerStepper stepper(b, config.dt);
  std::vector<RunningStats> stats(static_cast<std::size_t>(d));
  long long censored = 0;
  for (long long p = 0; p < config.paths; ++p) {
    PathRng rng(derive_seed(config.seed, Stream::kLongrun, static_cast<std::uint64_t>(p)));
    Vec x = x0;
    Vec integral{};
    double t = 0.0;
    while (std::abs(x[0]) < k && t < horizon) {
      const Vec v = stepper.step_with_drift(x, rng);
      for (int j = 1; j < d; ++j) integral[j] += v[j] * config.dt;
      t += config.dt;
    }
    if (!all_finite(x, d)) fail(ErrorCode::kPathAborted, "path state became non-finite");
    if (std::abs(x[0]) < k) {
      ++censored;
      continue;
    }
    for (int j = 1; j < d; ++j) stats[j].add(integral[j] / k);
  }
  check_censoring(censored, config.paths, "long-run alpha");
  std::vector<PathEstimate> out(static_cast<std::size_t>(d));
  for (int j = 1; j < d; ++j) {
    out[j] = PathEstimate::from("alpha_longrun_" + std::to_string(j + 1), stats[j], config.seed, censored);
  }
  return out;
}

PathEstimate brownian_occupation(double k, long long paths, std::uint64_t seed, double h) {
  const long long sites = std::llround(k / h);
  const long long unit = std::llround(1.0 / h);
  if (!(h > 0.0) || std::abs(sites * h - k) > 1e-9 || std::abs(unit * h - 1.0) > 1e-9) {
    fail(ErrorCode::kInvalidInput, "k and 1 must be multiples of the lattice step h");
  }
  if (!(k >= 1.0)) fail(ErrorCode::kInvalidInput, "occupation level k must be at least 1");
  if (paths < 1) fail(ErrorCode::kInvalidInput, "need at least one path");
  const double w_in = h * h;
  RunningStats stats;
  for (long long p = 0; p < paths; ++p) {
    PathRng rng(derive_seed(seed, Stream::kOccupation, static_cast<std::uint64_t>(p)));
    long long z = 0;
    long long visits_in = 0;
    long long visits_edge = 0;
    std::uint64_t bits = 0;
    int left = 0;
    while (z > -sites && z < sites) {
      const long long az = z < 0 ? -z : z;
      if (az < unit) {
        ++visits_in;
      } else if (az == unit) {
        ++visits_edge;
      }
      if (left == 0) {
        bits = rng.bits();
        left = 64;
      }
      z += (bits & 1U) ? 1 : -1;
      bits >>= 1U;
      --left;
    }
    stats.add(w_in * (static_cast<double>(visits_in) + 0.5 * static_cast<double>(visits_edge)));
  }
  return PathEstimate::from("brownian_occupation_k" + std::to_string(sites * h).substr(0, 6), stats, seed);
}

OccupationStats interface_occupation_stats(const InterfaceDriftField& b, const SimConfig& config) {
  config.validate(false);
  const double eps = config.epsilon;
  const double delta = config.delta();
  const double window = delta / (eps * eps);
  const auto steps = static_cast<long long>(std::ceil(window / config.dt));
  const double eta = b.eta();
  const EulerStepper stepper(b, config.dt);
  const int d = b.dim();
  RunningStats occ;
  RunningStats exc;
  for (long long p = 0; p < config.paths; ++p) {
    PathRng rng(derive_seed(config.seed, Stream::kInterfaceOccupation, static_cast<std::uint64_t>(p)));
    Vec x{};
    long long inside_steps = 0;
    long long count = 0;
    bool away = false;
    for (long long s = 0; s < steps; ++s) {
      const double ax = std::abs(x[0]);
      if (ax <= eta) {
        ++inside_steps;
        if (away) {
          ++count;
          away = false;
        }
      } else if (ax >= 2.0 * eta) {
        away = true;
      }
      stepper.step(x, rng);
    }
    if (!all_finite(x, d)) fail(ErrorCode::kPathAborted, "path state became non-finite");
    occ.add(eps * eps * static_cast<double>(inside_steps) * config.dt / std::sqrt(delta));
    exc.add(static_cast<double>(count));
  }
  OccupationStats out;
  out.occupation = PathEstimate::from("interface_occupation", occ, config.seed);
  out.excursions = PathEstimate::from("interface_excursions", exc, config.seed);
  out.excursion_constant = out.excursions.value / (std::sqrt(delta) / eps);
  return out;
}

std::vector<Vec> sample_rescaled(const InterfaceDriftField& b, double t, const Vec& x0, const SimConfig& config) {
  config.validate(false);
  const double eps = config.epsilon;
  const double horizon = t / (eps * eps);
  const auto steps = static_cast<long long>(std::ceil(horizon / config.dt - 1e-9));
  const double dt = horizon / static_cast<double>(steps);
  const EulerStepper stepper(b, dt);
  const int d = b.dim();
  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(config.paths));
  for (long long p = 0; p < config.paths; ++p) {
    PathRng rng(derive_seed(config.seed, Stream::kMicroSamples, static_cast<std::uint64_t>(p)));
    Vec x = x0;
    for (long long s = 0; s < steps; ++s) stepper.step(x, rng);
    if (!all_finite(x, d)) fail(ErrorCode::kPathAborted, "path state became non-finite");
    for (int i = 0; i < d; ++i) x[i] *= eps;
    out.push_back(x);
  }
  return out;
}

}  // namespace ihom

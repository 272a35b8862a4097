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

#include "ihom/estimate.hpp"

#include <cmath>
#include <limits>

namespace ihom {

void RunningStats::add(double x) {
  ++n_;
  const double d = x - mean_;
  mean_ += d / static_cast<double>(n_);
  m2_ += d * (x - mean_);
}

void RunningStats::merge(const RunningStats& o) {
  if (o.n_ == 0) return;
  if (n_ == 0) {
    *this = o;
    return;
  }
  const double n = static_cast<double>(n_ + o.n_);
  const double d = o.mean_ - mean_;
  mean_ += d * static_cast<double>(o.n_) / n;
  m2_ += o.m2_ + d * d * static_cast<double>(n_) * static_cast<double>(o.n_) / n;
  n_ += o.n_;
}

double RunningStats::variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }

double RunningStats::stderr_mean() const {
  return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
}

PathEstimate PathEstimate::from(std::string name, const RunningStats& s, std::uint64_t seed, long long censored) {
  PathEstimate e;
  e.name = std::move(name);
  e.value = s.mean();
  e.std_error = s.stderr_mean();
  e.n = s.count();
  e.seed = seed;
  e.censored = censored;
  return e;
}

double z_score(double a, double se_a, double b, double se_b) {
  const double se = std::sqrt(se_a * se_a + se_b * se_b);
  const double d = std::abs(a - b);
  if (se == 0.0) return d == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return d / se;
}

PathEstimate ratio(const PathEstimate& a, const PathEstimate& b, std::string name) {
  PathEstimate r;
  r.name = std::move(name);
  r.value = a.value / b.value;
  const double ra = a.std_error / a.value;
  const double rb = b.std_error / b.value;
  r.std_error = std::abs(r.value) * std::sqrt(ra * ra + rb * rb);
  r.n = a.n < b.n ? a.n : b.n;
  r.seed = a.seed;
  return r;
}

}  // namespace ihom

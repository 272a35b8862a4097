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
#include <string>

namespace ihom {

/// Welford accumulator.
class RunningStats {
 public:
  void add(double x);
  void merge(const RunningStats& other);

  long long count() const { return n_; }
  double mean() const { return mean_; }
  /// Unbiased sample variance; zero below two samples.
  double variance() const;
  double stderr_mean() const;

 private:
  long long n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// Monte Carlo estimate with its provenance.
struct PathEstimate {
  std::string name;
  double value = 0.0;
  double std_error = 0.0;
  long long n = 0;
  std::uint64_t seed = 0;
  /// Paths that hit the horizon; they are excluded from `n`.
  long long censored = 0;

  static PathEstimate from(std::string name, const RunningStats& s, std::uint64_t seed, long long censored = 0);
};

/// |a - b| in units of the combined standard error; infinite when both errors vanish and a != b.
double z_score(double a, double se_a, double b, double se_b);
inline double z_score(const PathEstimate& e, double target) { return z_score(e.value, e.std_error, target, 0.0); }
inline double z_score(const PathEstimate& a, const PathEstimate& b) {
  return z_score(a.value, a.std_error, b.value, b.std_error);
}

/// Delta-method ratio a / b of independent estimates.
PathEstimate ratio(const PathEstimate& a, const PathEstimate& b, std::string name);

}  // namespace ihom

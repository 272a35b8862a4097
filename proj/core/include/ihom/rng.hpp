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
#include <random>

namespace ihom {

/// One splitmix64 step; advances `state`.
std::uint64_t splitmix64(std::uint64_t& state);

/// Seed of path `path` in stream `stream` under a global seed. Each argument
/// is folded through splitmix64 so nearby inputs give unrelated seeds.
std::uint64_t derive_seed(std::uint64_t global, std::uint64_t stream, std::uint64_t path);

/// Stream identifiers used by the pipeline stages.
enum class Stream : std::uint64_t {
  kExitProbs = 1,
  kTangential = 2,
  kLongrun = 3,
  kOccupation = 4,
  kInterfaceOccupation = 5,
  kMicroSamples = 6,
  kLimitPaths = 7,
  kLimitSamples = 8,
  kPathExport = 9,
  kSkewExit = 10,
  kUser = 100,
};

inline std::uint64_t derive_seed(std::uint64_t global, Stream stream, std::uint64_t path) {
  return derive_seed(global, static_cast<std::uint64_t>(stream), path);
}

/// Generator owned by one path.
class PathRng {
 public:
  explicit PathRng(std::uint64_t seed) : engine_(seed) {}

  double gaussian() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  bool bernoulli(double p) { return uniform() < p; }
  /// Raw 64 random bits.
  std::uint64_t bits() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace ihom

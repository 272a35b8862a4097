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

#include "ihom/grid.hpp"

#include <string>

#include "ihom/error.hpp"

namespace ihom {

namespace {

std::size_t int_pow(int base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= static_cast<std::size_t>(base);
  return r;
}

}  // namespace

std::size_t GridSpec::torus_nodes() const { return int_pow(n, dim); }

std::size_t GridSpec::tangential_nodes() const { return int_pow(n, dim - 1); }

double GridSpec::cell_volume() const { return std::pow(h(), dim); }

void GridSpec::validate() const {
  if (dim < 1 || dim > kMaxDim) {
    fail(ErrorCode::kInvalidInput,
         "grid dimension " + std::to_string(dim) + " outside [1, " + std::to_string(kMaxDim) + "]");
  }
  if (n < 8) {
    fail(ErrorCode::kInvalidInput, "grid resolution " + std::to_string(n) + " is below the minimum of 8");
  }
}

void GridSpec::validate_strip() const {
  validate();
  if (k_trunc < 4) {
    fail(ErrorCode::kInvalidInput,
         "strip truncation k_trunc = " + std::to_string(k_trunc) + " must be at least 4 cells per side");
  }
}

double GridFunction::integral() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s * grid.cell_volume();
}

double GridFunction::integral_against(const GridFunction& weight) const {
  if (weight.values.size() != values.size()) {
    fail(ErrorCode::kGridMismatch, "grid functions have different sizes");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) s += values[i] * weight.values[i];
  return s * grid.cell_volume();
}

TorusIndexer::TorusIndexer(const GridSpec& grid)
    : n_(grid.n), dim_(grid.dim), size_(grid.torus_nodes()) {
  std::size_t s = 1;
  for (int a = dim_ - 1; a >= 0; --a) {
    stride_[a] = s;
    s *= static_cast<std::size_t>(n_);
  }
}

std::array<int, kMaxDim> TorusIndexer::unflatten(std::size_t index) const {
  std::array<int, kMaxDim> m{};
  for (int a = 0; a < dim_; ++a) {
    m[a] = static_cast<int>((index / stride_[a]) % static_cast<std::size_t>(n_));
  }
  return m;
}

std::size_t TorusIndexer::flatten(const std::array<int, kMaxDim>& multi) const {
  std::size_t index = 0;
  for (int a = 0; a < dim_; ++a) {
    int i = multi[a] % n_;
    if (i < 0) i += n_;
    index += static_cast<std::size_t>(i) * stride_[a];
  }
  return index;
}

std::size_t TorusIndexer::shifted(std::size_t index, int axis, int offset) const {
  const int i = static_cast<int>((index / stride_[axis]) % static_cast<std::size_t>(n_));
  int j = (i + offset) % n_;
  if (j < 0) j += n_;
  return index + (static_cast<std::size_t>(j) - static_cast<std::size_t>(i)) * stride_[axis];
}

Vec TorusIndexer::coordinates(std::size_t index) const {
  Vec x{};
  const auto m = unflatten(index);
  for (int a = 0; a < dim_; ++a) x[a] = static_cast<double>(m[a]) / n_;
  return x;
}

}  // namespace ihom

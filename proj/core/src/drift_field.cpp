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

#include "ihom/drift_field.hpp"

#include <algorithm>
#include <complex>
#include <string>

#include "ihom/error.hpp"

namespace ihom {

namespace {

using Complex = std::complex<double>;

// exp(2 pi i m x_a) for |m| <= max_wave[a].
struct PhaseTable {
  std::array<std::array<Complex, kMaxWave + 1>, kMaxDim> pow;

  void fill(const Vec& x, int dim, const std::array<int, kMaxDim>& max_wave) {
    for (int a = 0; a < dim; ++a) {
      const double frac = x[a] - std::floor(x[a]);
      const double theta = kTwoPi * frac;
      const Complex z(std::cos(theta), std::sin(theta));
      pow[a][0] = Complex(1.0, 0.0);
      for (int m = 1; m <= max_wave[a]; ++m) pow[a][m] = pow[a][m - 1] * z;
    }
  }

  Complex term(const std::array<int, kMaxDim>& k, int dim) const {
    Complex e(1.0, 0.0);
    for (int a = 0; a < dim; ++a) {
      if (k[a] > 0) {
        e *= pow[a][k[a]];
      } else if (k[a] < 0) {
        e *= std::conj(pow[a][-k[a]]);
      }
    }
    return e;
  }
};

void check_dim(int dim) {
  if (dim < 1 || dim > kMaxDim) {
    fail(ErrorCode::kInvalidInput, "field dimension " + std::to_string(dim) + " outside [1, " +
                                       std::to_string(kMaxDim) + "]");
  }
}

}  // namespace

FourierSeries::FourierSeries(int dim, std::vector<FourierTerm> terms) : dim_(dim), terms_(std::move(terms)) {
  check_dim(dim);
  for (const auto& t : terms_) {
    for (int a = 0; a < kMaxDim; ++a) {
      if (a >= dim && t.wave[a] != 0) {
        fail(ErrorCode::kInvalidInput, "wave vector has entries beyond the field dimension");
      }
      if (std::abs(t.wave[a]) > kMaxWave) {
        fail(ErrorCode::kInvalidInput, "wave number exceeds " + std::to_string(kMaxWave));
      }
    }
    if (!std::isfinite(t.cos_coef) || !std::isfinite(t.sin_coef)) {
      fail(ErrorCode::kInvalidInput, "non-finite Fourier coefficient");
    }
  }
}

double FourierSeries::operator()(const Vec& x) const {
  double v = 0.0;
  for (const auto& t : terms_) {
    double phase = 0.0;
    for (int a = 0; a < dim_; ++a) phase += t.wave[a] * (x[a] - std::floor(x[a]));
    phase *= kTwoPi;
    v += t.cos_coef * std::cos(phase) + t.sin_coef * std::sin(phase);
  }
  return v;
}

FourierSeries FourierSeries::derivative(int axis) const {
  std::vector<FourierTerm> out;
  for (const auto& t : terms_) {
    if (t.wave[axis] == 0) continue;
    const double w = kTwoPi * t.wave[axis];
    // d/dx [a cos + b sin] = w (-a sin + b cos)
    out.push_back(FourierTerm{t.wave, w * t.sin_coef, -w * t.cos_coef});
  }
  return FourierSeries(dim_, std::move(out));
}

FourierSeries FourierSeries::scaled(double factor) const {
  auto out = terms_;
  for (auto& t : out) {
    t.cos_coef *= factor;
    t.sin_coef *= factor;
  }
  return FourierSeries(dim_, std::move(out));
}

double FourierSeries::amplitude_sum() const {
  double s = 0.0;
  for (const auto& t : terms_) s += std::hypot(t.cos_coef, t.sin_coef);
  return s;
}

TorusField::TorusField(int dim, std::vector<FourierSeries> components)
    : dim_(dim), components_(std::move(components)) {
  check_dim(dim);
  if (static_cast<int>(components_.size()) != dim) {
    fail(ErrorCode::kDimensionMismatch, "torus field of dimension " + std::to_string(dim) + " needs " +
                                            std::to_string(dim) + " components, got " +
                                            std::to_string(components_.size()));
  }
  for (auto& c : components_) {
    if (c.dim() == 0) c = FourierSeries(dim, {});
    if (c.dim() != dim) fail(ErrorCode::kDimensionMismatch, "component dimension differs from field dimension");
  }
  flatten();
}

void TorusField::flatten() {
  flat_.clear();
  max_wave_.fill(0);
  for (int i = 0; i < dim_; ++i) {
    for (const auto& t : components_[i].terms()) {
      flat_.push_back(FlatTerm{i, t.wave, t.cos_coef, t.sin_coef});
      for (int a = 0; a < dim_; ++a) max_wave_[a] = std::max(max_wave_[a], std::abs(t.wave[a]));
    }
  }
}

TorusField TorusField::zero(int dim) {
  return TorusField(dim, std::vector<FourierSeries>(static_cast<std::size_t>(dim), FourierSeries(dim, {})));
}

TorusField TorusField::constant(const Vec& value, int dim) {
  std::vector<FourierSeries> comps;
  for (int i = 0; i < dim; ++i) {
    std::vector<FourierTerm> terms;
    if (value[i] != 0.0) terms.push_back(FourierTerm{{}, value[i], 0.0});
    comps.emplace_back(dim, std::move(terms));
  }
  return TorusField(dim, std::move(comps));
}

TorusField TorusField::gradient_flow(const FourierSeries& potential) {
  std::vector<FourierSeries> comps;
  for (int i = 0; i < potential.dim(); ++i) comps.push_back(potential.derivative(i).scaled(-1.0));
  return TorusField(potential.dim(), std::move(comps));
}

TorusField TorusField::stream_flow(const FourierSeries& stream) {
  if (stream.dim() != 2) fail(ErrorCode::kInvalidInput, "stream_flow requires a two-dimensional stream function");
  return TorusField(2, {stream.derivative(1), stream.derivative(0).scaled(-1.0)});
}

bool TorusField::is_zero() const {
  return std::all_of(flat_.begin(), flat_.end(),
                     [](const FlatTerm& t) { return t.cos_coef == 0.0 && t.sin_coef == 0.0; });
}

Vec TorusField::operator()(const Vec& x) const {
  Vec out{};
  if (flat_.empty()) return out;
  PhaseTable table;
  table.fill(x, dim_, max_wave_);
  for (const auto& t : flat_) {
    const Complex e = table.term(t.wave, dim_);
    out[t.component] += t.cos_coef * e.real() + t.sin_coef * e.imag();
  }
  return out;
}

TorusField TorusField::reflected() const {
  std::vector<FourierSeries> comps;
  for (int i = 0; i < dim_; ++i) {
    std::vector<FourierTerm> terms = components_[i].terms();
    const double sign = (i == 0) ? -1.0 : 1.0;
    for (auto& t : terms) {
      t.wave[0] = -t.wave[0];
      t.cos_coef *= sign;
      t.sin_coef *= sign;
    }
    comps.emplace_back(dim_, std::move(terms));
  }
  return TorusField(dim_, std::move(comps));
}

TorusField TorusField::odd_partner() const {
  std::vector<FourierSeries> comps;
  for (int i = 0; i < dim_; ++i) {
    std::vector<FourierTerm> terms = components_[i].terms();
    for (auto& t : terms) {
      t.wave[0] = -t.wave[0];
      t.cos_coef = -t.cos_coef;
      t.sin_coef = -t.sin_coef;
    }
    comps.emplace_back(dim_, std::move(terms));
  }
  return TorusField(dim_, std::move(comps));
}

double interface_blend(double s) {
  if (s <= -1.0) return 0.0;
  if (s >= 1.0) return 1.0;
  const double t = 0.5 * (s + 1.0);
  const double a = std::exp(-1.0 / t);
  const double b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

double interface_bump(double s) {
  if (s <= -1.0 || s >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

Vec InterfaceDriftField::operator()(const Vec& x) const {
  if (x[0] > eta_) return plus_(x);
  if (x[0] < -eta_) return minus_(x);
  const double s = x[0] / eta_;
  const double c = interface_blend(s);
  const Vec bp = plus_(x);
  const Vec bm = minus_(x);
  Vec out{};
  const int d = dim();
  for (int i = 0; i < d; ++i) out[i] = (1.0 - c) * bm[i] + c * bp[i];
  if (perturbation_) {
    const double w = interface_bump(s);
    if (w != 0.0) {
      const Vec p = (*perturbation_)(x);
      for (int i = 0; i < d; ++i) out[i] += w * p[i];
    }
  }
  return out;
}

double InterfaceDriftField::component_bound(int i) const {
  double s = plus_.component_bound(i) + minus_.component_bound(i);
  if (perturbation_) s += perturbation_->component_bound(i);
  return s;
}

double InterfaceDriftField::sup_norm_bound() const {
  double s = 0.0;
  for (int i = 0; i < dim(); ++i) s += component_bound(i) * component_bound(i);
  return std::sqrt(s);
}

InterfaceDriftField make_interface_field(TorusField plus, TorusField minus, double eta,
                                         std::optional<TorusField> perturbation) {
  if (plus.dim() != minus.dim()) {
    fail(ErrorCode::kDimensionMismatch, "plus field has dimension " + std::to_string(plus.dim()) +
                                            " but minus field has " + std::to_string(minus.dim()));
  }
  if (plus.dim() == 0) fail(ErrorCode::kInvalidInput, "interface field needs dimension >= 1");
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    fail(ErrorCode::kInvalidInput, "interface half-width eta must be positive and finite");
  }
  if (perturbation && perturbation->dim() != plus.dim()) {
    fail(ErrorCode::kDimensionMismatch, "perturbation dimension differs from the side fields");
  }
  InterfaceDriftField f;
  f.plus_ = std::move(plus);
  f.minus_ = std::move(minus);
  f.eta_ = eta;
  if (perturbation && !perturbation->is_zero()) f.perturbation_ = std::move(perturbation);
  return f;
}

Vec eval_drift(const InterfaceDriftField& field, const Vec& x) {
  if (!all_finite(x, field.dim())) fail(ErrorCode::kInvalidInput, "drift evaluated at a non-finite point");
  return field(x);
}

std::vector<std::vector<double>> sample_on_grid(const TorusField& b, const GridSpec& grid) {
  if (b.dim() != grid.dim) fail(ErrorCode::kGridMismatch, "field and grid dimensions differ");
  const TorusIndexer idx(grid);
  std::vector<std::vector<double>> out(static_cast<std::size_t>(grid.dim), std::vector<double>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const Vec v = b(idx.coordinates(k));
    for (int i = 0; i < grid.dim; ++i) {
      if (!std::isfinite(v[i])) fail(ErrorCode::kInvalidInput, "non-finite drift sample on the grid");
      out[i][k] = v[i];
    }
  }
  return out;
}

Vec check_centering(const TorusField& b, const GridFunction& mu) {
  if (b.dim() != mu.grid.dim || mu.values.size() != mu.grid.torus_nodes()) {
    fail(ErrorCode::kGridMismatch, "density grid does not match the drift sampling grid");
  }
  const TorusIndexer idx(mu.grid);
  Vec r{};
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const Vec v = b(idx.coordinates(k));
    for (int i = 0; i < b.dim(); ++i) r[i] += v[i] * mu.values[k];
  }
  const double w = mu.grid.cell_volume();
  for (int i = 0; i < b.dim(); ++i) r[i] *= w;
  return r;
}

}  // namespace ihom

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

#include <optional>
#include <vector>

#include "ihom/grid.hpp"
#include "ihom/types.hpp"

namespace ihom {

/// Largest |k_i| accepted in a wave vector.
inline constexpr int kMaxWave = 16;

/// One term a*cos(2 pi k.x) + b*sin(2 pi k.x) of a trigonometric polynomial.
struct FourierTerm {
  std::array<int, kMaxDim> wave{};
  double cos_coef = 0.0;
  double sin_coef = 0.0;
};

/// Scalar trigonometric polynomial with unit period in every coordinate.
class FourierSeries {
 public:
  FourierSeries() = default;
  FourierSeries(int dim, std::vector<FourierTerm> terms);

  int dim() const { return dim_; }
  const std::vector<FourierTerm>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  double operator()(const Vec& x) const;

  /// Exact partial derivative along `axis`.
  FourierSeries derivative(int axis) const;
  FourierSeries scaled(double factor) const;

  /// Sum of term amplitudes; bounds the sup norm.
  double amplitude_sum() const;

 private:
  int dim_ = 0;
  std::vector<FourierTerm> terms_;
};

/// Smooth vector field on T^d given componentwise by Fourier sums.
///
/// Evaluation builds the table exp(2 pi i m x_a) once per point and forms
/// every term by products, so a field with many terms costs d sincos calls
/// plus a few complex multiplies per term.
class TorusField {
 public:
  TorusField() = default;
  TorusField(int dim, std::vector<FourierSeries> components);

  static TorusField zero(int dim);
  static TorusField constant(const Vec& value, int dim);
  /// b = -grad V.
  static TorusField gradient_flow(const FourierSeries& potential);
  /// d = 2 only: b = (d2 H, -d1 H), divergence free.
  static TorusField stream_flow(const FourierSeries& stream);

  int dim() const { return dim_; }
  const FourierSeries& component(int i) const { return components_[i]; }
  bool is_zero() const;

  Vec operator()(const Vec& x) const;

  /// x -> R b(R x) with R the reflection x1 -> -x1.
  TorusField reflected() const;
  /// x -> -b(-x1, x2, ..., xd).
  TorusField odd_partner() const;

  double component_bound(int i) const { return components_[i].amplitude_sum(); }

 private:
  struct FlatTerm {
    int component;
    std::array<int, kMaxDim> wave;
    double cos_coef;
    double sin_coef;
  };

  void flatten();

  int dim_ = 0;
  std::vector<FourierSeries> components_;
  std::vector<FlatTerm> flat_;
  std::array<int, kMaxDim> max_wave_{};
};

/// Smooth step chi with chi(s) = 0 for s <= -1, 1 for s >= 1, chi(-s) = 1 - chi(s).
double interface_blend(double s);
/// Bump exp(1 - 1/(1 - s^2)) on |s| < 1, zero elsewhere; peak value 1 at s = 0.
double interface_bump(double s);

/// Drift on R x T^{d-1}: b+ for x1 > eta, b- for x1 < -eta, and
/// (1 - chi(x1/eta)) b- + chi(x1/eta) b+ + bump(x1/eta) P(x) in between.
class InterfaceDriftField {
 public:
  int dim() const { return plus_.dim(); }
  double eta() const { return eta_; }
  const TorusField& plus() const { return plus_; }
  const TorusField& minus() const { return minus_; }
  const std::optional<TorusField>& perturbation() const { return perturbation_; }

  /// Unchecked evaluation for hot loops.
  Vec operator()(const Vec& x) const;

  /// Per-component bound |b_i| <= |b+_i| + |b-_i| + |P_i| from the coefficients.
  double component_bound(int i) const;
  /// Euclidean norm of the component bounds.
  double sup_norm_bound() const;

 private:
  friend InterfaceDriftField make_interface_field(TorusField plus, TorusField minus, double eta,
                                                  std::optional<TorusField> perturbation);
  TorusField plus_;
  TorusField minus_;
  std::optional<TorusField> perturbation_;
  double eta_ = 0.5;
};

inline constexpr double kDefaultEta = 0.5;

InterfaceDriftField make_interface_field(TorusField plus, TorusField minus, double eta = kDefaultEta,
                                         std::optional<TorusField> perturbation = std::nullopt);

/// Validated evaluation; throws kInvalidInput on non-finite coordinates.
Vec eval_drift(const InterfaceDriftField& field, const Vec& x);

/// Quadrature of int b dmu over the torus grid, per component.
Vec check_centering(const TorusField& b, const GridFunction& mu);

/// Samples of each drift component at the torus grid nodes.
std::vector<std::vector<double>> sample_on_grid(const TorusField& b, const GridSpec& grid);

}  // namespace ihom

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

#include <cmath>

#include <gtest/gtest.h>

#include "ihom/drift_field.hpp"
#include "ihom/error.hpp"
#include "oracles.hpp"

namespace ihom {
namespace {

FourierSeries series2(std::vector<FourierTerm> terms) { return FourierSeries(2, std::move(terms)); }

TorusField sample_plus() {
  return TorusField::gradient_flow(
      series2({FourierTerm{{1, 0}, 0.3, 0.2}, FourierTerm{{1, 2}, 0.0, 0.1}, FourierTerm{{0, 1}, 0.25, 0.0}}));
}

TorusField sample_minus() {
  return TorusField(2, {series2({FourierTerm{{0, 1}, 0.4, 0.0}}), series2({FourierTerm{{2, 1}, 0.1, -0.3}})});
}

TEST(FourierSeries, EvaluatesTermsDirectly) {
  const FourierSeries s(2, {FourierTerm{{1, 2}, 0.5, -0.25}, FourierTerm{{0, 0}, 0.125, 0.0}});
  const Vec x{0.17, 0.61, 0, 0};
  const double phase = oracle::kTwoPi * (0.17 + 2 * 0.61);
  EXPECT_NEAR(s(x), 0.5 * std::cos(phase) - 0.25 * std::sin(phase) + 0.125, 1e-14);
}

TEST(FourierSeries, DerivativeMatchesFiniteDifference) {
  const FourierSeries s(2, {FourierTerm{{1, 2}, 0.5, -0.25}, FourierTerm{{3, 0}, 0.0, 0.2}});
  const Vec x{0.31, 0.77, 0, 0};
  for (int axis = 0; axis < 2; ++axis) {
    Vec xp = x;
    Vec xm = x;
    const double h = 1e-5;
    xp[axis] += h;
    xm[axis] -= h;
    EXPECT_NEAR(s.derivative(axis)(x), (s(xp) - s(xm)) / (2 * h), 1e-7);
  }
}

TEST(TorusField, PeriodicInEveryDirection) {
  const auto b = sample_plus();
  for (double u : {0.0, 0.13, 0.5, 0.91}) {
    const Vec x{u, 1.0 - u, 0, 0};
    const Vec bx = b(x);
    for (int axis = 0; axis < 2; ++axis) {
      Vec y = x;
      y[axis] += 1.0;
      const Vec by = b(y);
      for (int i = 0; i < 2; ++i) EXPECT_NEAR(bx[i], by[i], 1e-13);
    }
  }
}

TEST(TorusField, StreamFlowIsDivergenceFree) {
  const auto b = TorusField::stream_flow(series2({FourierTerm{{1, 1}, 0.3, 0.1}, FourierTerm{{2, 0}, 0.0, 0.4}}));
  const double h = 1e-5;
  for (double u : {0.1, 0.4, 0.8}) {
    const Vec x{u, 0.3 + u * u, 0, 0};
    double div = 0.0;
    for (int i = 0; i < 2; ++i) {
      Vec xp = x;
      Vec xm = x;
      xp[i] += h;
      xm[i] -= h;
      div += (b(xp)[i] - b(xm)[i]) / (2 * h);
    }
    EXPECT_NEAR(div, 0.0, 1e-7);
  }
}

TEST(TorusField, StreamFlowNeedsTwoDimensions) {
  EXPECT_THROW(TorusField::stream_flow(FourierSeries(1, {FourierTerm{{1}, 1.0, 0.0}})), Error);
}

TEST(Blend, SmoothPartitionOfUnity) {
  EXPECT_EQ(interface_blend(-1.0), 0.0);
  EXPECT_EQ(interface_blend(-3.0), 0.0);
  EXPECT_EQ(interface_blend(1.0), 1.0);
  EXPECT_NEAR(interface_blend(0.0), 0.5, 1e-15);
  double prev = 0.0;
  for (double s = -1.0; s <= 1.0; s += 0.01) {
    const double c = interface_blend(s);
    EXPECT_GE(c, prev);
    EXPECT_NEAR(c + interface_blend(-s), 1.0, 1e-14);
    prev = c;
  }
  EXPECT_EQ(interface_bump(1.0), 0.0);
  EXPECT_NEAR(interface_bump(0.0), 1.0, 1e-15);
}

TEST(EvalDrift, ZeroFieldsGiveZero) {
  const auto f = make_interface_field(TorusField::zero(2), TorusField::zero(2));
  for (double x1 : {-3.0, -0.2, 0.0, 0.4, 7.0}) {
    const Vec v = eval_drift(f, Vec{x1, 0.3, 0, 0});
    EXPECT_EQ(v[0], 0.0);
    EXPECT_EQ(v[1], 0.0);
  }
}

TEST(EvalDrift, ExactAgreementOutsideStrip) {
  const auto plus = sample_plus();
  const auto minus = sample_minus();
  const auto f = make_interface_field(plus, minus, 0.5);
  const Vec xp{0.9, 0.3, 0, 0};
  const Vec xm{-0.9, 0.3, 0, 0};
  EXPECT_EQ(eval_drift(f, xp), plus(xp));
  EXPECT_EQ(eval_drift(f, xm), minus(xm));
  for (double x1 : {0.5000001, 1.7, 12.25}) EXPECT_EQ(eval_drift(f, Vec{x1, 0.8, 0, 0}), plus(Vec{x1, 0.8, 0, 0}));
  for (double x1 : {-0.5000001, -2.3}) EXPECT_EQ(eval_drift(f, Vec{x1, 0.8, 0, 0}), minus(Vec{x1, 0.8, 0, 0}));
}

TEST(EvalDrift, TangentiallyPeriodic) {
  const auto pert = TorusField(2, {series2({FourierTerm{{0, 1}, 0.7, 0.0}}), series2({FourierTerm{{0, 0}, 1.0, 0.0}})});
  const auto f = make_interface_field(sample_plus(), sample_minus(), 0.5, pert);
  for (double x1 : {-0.7, -0.25, 0.0, 0.1, 0.45, 2.0}) {
    const Vec a = eval_drift(f, Vec{x1, 0.37, 0, 0});
    const Vec b = eval_drift(f, Vec{x1, 1.37, 0, 0});
    for (int i = 0; i < 2; ++i) EXPECT_NEAR(a[i], b[i], 1e-12 * (1.0 + std::abs(a[i])));
  }
}

TEST(EvalDrift, DegenerateInterfaceIsGlobal) {
  const auto b = sample_plus();
  const auto f = make_interface_field(b, b, 0.5);
  for (double x1 : {-0.4, -0.1, 0.0, 0.33}) {
    const Vec x{x1, 0.21, 0, 0};
    const Vec u = eval_drift(f, x);
    const Vec v = b(x);
    for (int i = 0; i < 2; ++i) EXPECT_NEAR(u[i], v[i], 1e-15);
  }
}

TEST(EvalDrift, OneDimensionalDerivativeFields) {
  const FourierSeries vp(1, {FourierTerm{{1}, 0.0, 0.4}});
  const FourierSeries vm(1, {FourierTerm{{1}, 0.1, 0.0}});
  const auto f = make_interface_field(TorusField::gradient_flow(vp), TorusField::gradient_flow(vm), 0.25);
  for (double x : {0.3, 0.77, 1.6}) {
    EXPECT_NEAR(eval_drift(f, Vec{x})[0], -0.4 * oracle::kTwoPi * std::cos(oracle::kTwoPi * x), 1e-13);
    EXPECT_NEAR(eval_drift(f, Vec{-x})[0], -0.1 * oracle::kTwoPi * std::sin(oracle::kTwoPi * x), 1e-13);
  }
}

TEST(EvalDrift, MirrorPairIsOdd) {
  const auto plus = sample_plus();
  const auto f = make_interface_field(plus, plus.odd_partner(), 0.5);
  for (double x1 = -1.5; x1 <= 1.5; x1 += 0.125) {
    for (double x2 : {0.0, 0.3, 0.75}) {
      const Vec a = eval_drift(f, Vec{x1, x2, 0, 0});
      const Vec b = eval_drift(f, Vec{-x1, x2, 0, 0});
      EXPECT_NEAR(a[0], -b[0], 1e-13);
      EXPECT_NEAR(a[1], -b[1], 1e-13);
    }
  }
}

TEST(EvalDrift, BoundedByCoefficientSums) {
  const auto pert = TorusField(2, {series2({FourierTerm{{1, 1}, 0.7, 0.2}}), series2({FourierTerm{{0, 0}, 1.0, 0.0}})});
  const auto f = make_interface_field(sample_plus(), sample_minus(), 0.5, pert);
  for (int i = 0; i <= 200; ++i) {
    for (int j = 0; j < 16; ++j) {
      const Vec v = eval_drift(f, Vec{-1.0 + 0.01 * i, j / 16.0, 0, 0});
      for (int c = 0; c < 2; ++c) {
        ASSERT_TRUE(std::isfinite(v[c]));
        EXPECT_LE(std::abs(v[c]), f.component_bound(c) + 1e-12);
      }
    }
  }
  EXPECT_GT(f.sup_norm_bound(), 0.0);
}

TEST(EvalDrift, RejectsNonFiniteInput) {
  const auto f = make_interface_field(TorusField::zero(2), TorusField::zero(2));
  EXPECT_THROW(eval_drift(f, Vec{std::nan(""), 0.0, 0, 0}), Error);
  EXPECT_THROW(eval_drift(f, Vec{0.0, INFINITY, 0, 0}), Error);
}

TEST(MakeInterfaceField, ValidatesInputs) {
  EXPECT_THROW(make_interface_field(TorusField::zero(2), TorusField::zero(1)), Error);
  EXPECT_THROW(make_interface_field(TorusField::zero(2), TorusField::zero(2), 0.0), Error);
  EXPECT_THROW(make_interface_field(TorusField::zero(2), TorusField::zero(2), -1.0), Error);
  EXPECT_THROW(make_interface_field(TorusField::zero(2), TorusField::zero(2), 0.5, TorusField::zero(1)), Error);
}

TEST(CheckCentering, ZeroDriftHasZeroResidual) {
  const GridSpec g{16, 2, 8};
  const GridFunction mu(g, 1.0);
  const Vec r = check_centering(TorusField::zero(2), mu);
  EXPECT_EQ(r[0], 0.0);
  EXPECT_EQ(r[1], 0.0);
}

TEST(CheckCentering, GradientFieldAgainstClosedFormDensity) {
  // b = -V', mu = e^{-2V} / Z with V = sin(2 pi x).
  const GridSpec g{256, 1, 8};
  oracle::Periodic1D o{[](double x) { return std::sin(oracle::kTwoPi * x); }};
  GridFunction mu(g);
  for (int i = 0; i < g.n; ++i) mu.values[i] = o.mu(i * g.h());
  const auto b = TorusField::gradient_flow(FourierSeries(1, {FourierTerm{{1}, 0.0, 1.0}}));
  EXPECT_LT(std::abs(check_centering(b, mu)[0]), 1e-10);
}

TEST(CheckCentering, ConstantDriftAgainstUniformDensity) {
  const GridSpec g{32, 2, 8};
  const GridFunction mu(g, 1.0);
  const Vec r = check_centering(TorusField::constant(Vec{0.3, -1.25, 0, 0}, 2), mu);
  EXPECT_NEAR(r[0], 0.3, 1e-14);
  EXPECT_NEAR(r[1], -1.25, 1e-14);
}

TEST(CheckCentering, GridMismatchThrows) {
  const GridSpec g{32, 1, 8};
  const GridFunction mu(g, 1.0);
  EXPECT_THROW(check_centering(TorusField::zero(2), mu), Error);
}

TEST(GridSpec, Validation) {
  EXPECT_THROW((GridSpec{4, 2, 8}.validate()), Error);
  EXPECT_THROW((GridSpec{16, 0, 8}.validate()), Error);
  EXPECT_THROW((GridSpec{16, 2, 3}.validate_strip()), Error);
  EXPECT_NO_THROW((GridSpec{8, 1, 4}.validate_strip()));
  EXPECT_DOUBLE_EQ((GridSpec{16, 2, 8}.cell_volume()), 1.0 / 256.0);
}

}  // namespace
}  // namespace ihom

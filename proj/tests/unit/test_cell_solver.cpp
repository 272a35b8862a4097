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

#include "ihom/cell_solver.hpp"
#include "ihom/error.hpp"
#include "oracles.hpp"

namespace ihom {
namespace {

TorusField sine_potential(double amplitude = 1.0) {
  return TorusField::gradient_flow(FourierSeries(1, {FourierTerm{{1}, 0.0, amplitude}}));
}

oracle::Periodic1D sine_oracle(double amplitude = 1.0) {
  return {[amplitude](double x) { return amplitude * std::sin(oracle::kTwoPi * x); }};
}

TorusField shear(double beta) {
  return TorusField(2, {FourierSeries(2, {}), FourierSeries(2, {FourierTerm{{1, 0}, 0.0, beta}})});
}

GridFunction sampled(const GridSpec& g, double (*f)(double, double)) {
  GridFunction out(g);
  const TorusIndexer idx(g);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const Vec x = idx.coordinates(k);
    out.values[k] = f(x[0], x[1]);
  }
  return out;
}

class GeneratorRowSums : public ::testing::TestWithParam<StencilKind> {};

TEST_P(GeneratorRowSums, ConstantsAreAnnihilated) {
  const GridSpec g{16, 2, 8};
  const auto b = TorusField::gradient_flow(
      FourierSeries(2, {FourierTerm{{1, 1}, 0.8, 0.1}, FourierTerm{{0, 2}, 0.0, 0.5}}));
  const auto L = discretize_generator(b, g, GetParam());
  const std::vector<double> ones(g.torus_nodes(), 1.0);
  for (double v : L.apply(ones)) EXPECT_NEAR(v, 0.0, 1e-12);
}

INSTANTIATE_TEST_SUITE_P(Stencils, GeneratorRowSums,
                         ::testing::Values(StencilKind::kCentral2, StencilKind::kCentral4, StencilKind::kUpwind));

TEST(Generator, ZeroDriftEigenfunction) {
  for (auto kind : {StencilKind::kCentral2, StencilKind::kCentral4}) {
    double prev = 0.0;
    for (int n : {16, 32}) {
      const GridSpec g{n, 2, 8};
      const auto L = discretize_generator(TorusField::zero(2), g, kind);
      const auto f = sampled(g, [](double x, double) { return std::sin(oracle::kTwoPi * x); });
      const auto Lf = L.apply(f.values);
      double err = 0.0;
      for (std::size_t k = 0; k < Lf.size(); ++k) {
        err = std::max(err, std::abs(Lf[k] + 0.5 * oracle::kTwoPi * oracle::kTwoPi * f.values[k]));
      }
      EXPECT_LT(err, kind == StencilKind::kCentral2 ? 2.0 : 0.05);
      if (prev > 0.0) EXPECT_GT(prev / err, kind == StencilKind::kCentral2 ? 3.5 : 14.0);
      prev = err;
    }
  }
}

TEST(Generator, RejectsCoarseGrid) {
  EXPECT_THROW(discretize_generator(TorusField::zero(1), GridSpec{4, 1, 8}), Error);
}

TEST(InvariantDensity, UniformForZeroDrift) {
  const GridSpec g{16, 2, 8};
  const auto mu = solve_invariant_density(discretize_generator(TorusField::zero(2), g));
  for (double v : mu.density.values) EXPECT_NEAR(v, 1.0, 1e-10);
}

TEST(InvariantDensity, UniformForDivergenceFreeDrift) {
  const GridSpec g{32, 2, 8};
  const auto b = TorusField::stream_flow(FourierSeries(2, {FourierTerm{{1, 1}, 0.4, 0.1}, FourierTerm{{0, 1}, 0.3, 0.0}}));
  const auto mu = solve_invariant_density(discretize_generator(b, g));
  for (double v : mu.density.values) EXPECT_NEAR(v, 1.0, 1e-9);
}

TEST(InvariantDensity, OneDimensionalClosedForm) {
  const GridSpec g{256, 1, 8};
  const auto mu = solve_invariant_density(discretize_generator(sine_potential(), g));
  const auto o = sine_oracle();
  const double z = o.z_minus();
  double err = 0.0;
  for (int i = 0; i < g.n; ++i) {
    const double exact = std::exp(-2.0 * std::sin(oracle::kTwoPi * i * g.h())) / z;
    err = std::max(err, std::abs(mu.density.values[i] / exact - 1.0));
  }
  EXPECT_LT(err, 1e-6);
  EXPECT_NEAR(mu.density.integral(), 1.0, 1e-12);
}

TEST(InvariantDensity, DiscreteDuality) {
  const GridSpec g{24, 2, 8};
  const auto b = TorusField(2, {FourierSeries(2, {FourierTerm{{1, 1}, 0.5, 0.2}}),
                                FourierSeries(2, {FourierTerm{{1, 0}, 0.0, 0.7}, FourierTerm{{0, 0}, 0.3, 0.0}})});
  const auto L = discretize_generator(b, g);
  const auto mu = solve_invariant_density(L);
  const auto f = sampled(g, [](double x, double y) { return std::cos(oracle::kTwoPi * (x + 2 * y)) + x * x; });
  const auto Lf = L.apply(f.values);
  double pairing = 0.0;
  double scale = 0.0;
  for (std::size_t k = 0; k < Lf.size(); ++k) {
    pairing += Lf[k] * mu.density.values[k];
    scale += std::abs(Lf[k] * mu.density.values[k]);
  }
  EXPECT_LT(std::abs(pairing), 1e-10 * scale);
  for (double v : mu.density.values) EXPECT_GE(v, 0.0);
}

TEST(Corrector, ZeroDriftGivesZero) {
  const GridSpec g{16, 2, 8};
  const auto L = discretize_generator(TorusField::zero(2), g);
  const auto mu = solve_invariant_density(L);
  const auto c = solve_corrector(L, TorusField::zero(2), mu.density);
  for (const auto& gi : c.correctors) {
    for (double v : gi.values) EXPECT_EQ(v, 0.0);
  }
}

TEST(Corrector, OneDimensionalSlope) {
  const GridSpec g{256, 1, 8};
  const auto b = sine_potential();
  const auto L = discretize_generator(b, g);
  const auto mu = solve_invariant_density(L);
  const auto c = solve_corrector(L, b, mu.density);
  const auto dg = grid_derivative(c.correctors[0], 0, StencilKind::kCentral4);
  const auto o = sine_oracle();
  const double zp = o.z_plus();
  double err = 0.0;
  for (int i = 0; i < g.n; ++i) {
    const double x = i * g.h();
    err = std::max(err, std::abs(dg.values[i] - (std::exp(2.0 * std::sin(oracle::kTwoPi * x)) / zp - 1.0)));
  }
  EXPECT_LT(err, 1e-4);
  EXPECT_NEAR(c.correctors[0].integral_against(mu.density), 0.0, 1e-10);
}

TEST(Corrector, SeparableTwoDimensionalField) {
  const GridSpec g1{64, 1, 8};
  const GridSpec g2{64, 2, 8};
  const auto b1 = sine_potential(0.5);
  const auto b2 = TorusField::gradient_flow(FourierSeries(2, {FourierTerm{{1, 0}, 0.0, 0.5}}));
  const auto L1 = discretize_generator(b1, g1);
  const auto L2 = discretize_generator(b2, g2);
  const auto c1 = solve_corrector(L1, b1, solve_invariant_density(L1).density);
  const auto c2 = solve_corrector(L2, b2, solve_invariant_density(L2).density);
  const TorusIndexer idx(g2);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const auto m = idx.unflatten(k);
    EXPECT_NEAR(c2.correctors[0].values[k], c1.correctors[0].values[m[0]], 1e-9);
    EXPECT_NEAR(c2.correctors[1].values[k], 0.0, 1e-10);
  }
}

TEST(Corrector, CenteringViolationIsNoSolution) {
  const GridSpec g{16, 1, 8};
  const auto b = TorusField::constant(Vec{0.5}, 1);
  const auto L = discretize_generator(TorusField::zero(1), g);
  const auto mu = solve_invariant_density(L);
  try {
    solve_corrector(L, b, mu.density);
    FAIL() << "expected a no-solution error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoSolution);
  }
}

TEST(EffectiveTensor, ZeroDriftIsIdentity) {
  const auto cell = solve_cell(Side::kPlus, TorusField::zero(2), GridSpec{16, 2, 8});
  EXPECT_LT((cell.D - Eigen::MatrixXd::Identity(2, 2)).norm(), 1e-12);
}

TEST(EffectiveTensor, OneDimensionalHarmonicMean) {
  const auto cell = solve_cell(Side::kPlus, sine_potential(), GridSpec{256, 1, 8});
  const double bessel = 1.0 / std::pow(oracle::bessel_i0(2.0), 2);
  const double quadrature = sine_oracle().D();
  EXPECT_NEAR(bessel, quadrature, 1e-12);
  EXPECT_LT(std::abs(cell.D(0, 0) / quadrature - 1.0), 1e-4);
}

TEST(EffectiveTensor, ShearEnhancement) {
  // b = (0, beta sin 2 pi x1): uniform density, g2 solves 1/2 g'' = -beta sin,
  // D22 = 1 + 2 beta^2 / (2 pi)^2.
  const double beta = 0.8;
  const auto cell = solve_cell(Side::kPlus, shear(beta), GridSpec{64, 2, 8});
  EXPECT_NEAR(cell.D(0, 0), 1.0, 1e-8);
  EXPECT_NEAR(cell.D(0, 1), 0.0, 1e-8);
  EXPECT_NEAR(cell.D(1, 1), 1.0 + 2.0 * beta * beta / (oracle::kTwoPi * oracle::kTwoPi), 1e-6);
}

TEST(EffectiveTensor, DivergenceFreeEnhancesDiffusivity) {
  const auto b = TorusField::stream_flow(FourierSeries(2, {FourierTerm{{1, 1}, 0.2, 0.1}, FourierTerm{{1, 0}, 0.0, 0.15}}));
  const auto cell = solve_cell(Side::kPlus, b, GridSpec{32, 2, 8});
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cell.D);
  EXPECT_GE(eig.eigenvalues().minCoeff(), 1.0 - 1e-8);
}

TEST(SolveCell, InvariantsHold) {
  const auto b = TorusField::gradient_flow(
      FourierSeries(2, {FourierTerm{{1, 0}, 0.0, 0.15}, FourierTerm{{0, 1}, 0.1, 0.0}, FourierTerm{{1, 1}, 0.05, 0.05}}));
  const auto cell = solve_cell(Side::kMinus, b, GridSpec{32, 2, 8});
  EXPECT_EQ(cell.side, Side::kMinus);
  EXPECT_NEAR(cell.mu.integral(), 1.0, 1e-12);
  for (double v : cell.mu.values) EXPECT_GE(v, 0.0);
  for (const auto& g : cell.correctors) EXPECT_NEAR(g.integral_against(cell.mu), 0.0, 1e-10);
  EXPECT_NEAR(cell.D(0, 1), cell.D(1, 0), 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cell.D);
  EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
  EXPECT_LT(cell.residuals.density, 1e-10);
}

TEST(SolveCell, SecondOrderSelfConvergence) {
  // Richardson: |D_n - D_2n| / |D_2n - D_4n| ~ 2^p.
  const auto b = sine_potential(0.5);
  CellOptions opt;
  opt.stencil = StencilKind::kCentral2;
  double d[3];
  int i = 0;
  for (int n : {32, 64, 128}) d[i++] = solve_cell(Side::kPlus, b, GridSpec{n, 1, 8}, opt).D(0, 0);
  const double order = std::log2(std::abs(d[0] - d[1]) / std::abs(d[1] - d[2]));
  EXPECT_GE(order, 1.8);
  const double exact = sine_oracle(0.5).D();
  EXPECT_LT(std::abs(d[2] - exact), std::abs(d[0] - exact));
}

TEST(SolveCell, FourthOrderDefaultConvergesAtFourthOrder) {
  const auto b = sine_potential(0.5);
  const double exact = sine_oracle(0.5).D();
  CellOptions second;
  second.stencil = StencilKind::kCentral2;
  double e4[2];
  int i = 0;
  for (int n : {32, 64}) e4[i++] = std::abs(solve_cell(Side::kPlus, b, GridSpec{n, 1, 8}).D(0, 0) - exact);
  EXPECT_GE(std::log2(e4[0] / e4[1]), 3.8);
  const double e2 = std::abs(solve_cell(Side::kPlus, b, GridSpec{64, 1, 8}, second).D(0, 0) - exact);
  EXPECT_LT(e4[1], 0.1 * e2);
}

TEST(SolveCell, UpwindStencilConverges) {
  CellOptions opt;
  opt.stencil = StencilKind::kUpwind;
  const double exact = sine_oracle(0.5).D();
  const double d = solve_cell(Side::kPlus, sine_potential(0.5), GridSpec{512, 1, 8}, opt).D(0, 0);
  EXPECT_LT(std::abs(d / exact - 1.0), 1e-2);
}

}  // namespace
}  // namespace ihom

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
#include <vector>

#include <gtest/gtest.h>

#include "ihom/cell_solver.hpp"
#include "ihom/error.hpp"
#include "ihom/strip_solver.hpp"
#include "oracles.hpp"

namespace ihom {
namespace {

// d = 1: V+ = 0.4 sin, V- = 0.1 cos, constant push 0.6 inside |x1| <= 1/4.
InterfaceDriftField gradient_1d() {
  return make_interface_field(TorusField::gradient_flow(FourierSeries(1, {FourierTerm{{1}, 0.0, 0.4}})),
                              TorusField::gradient_flow(FourierSeries(1, {FourierTerm{{1}, 0.1, 0.0}})), 0.25,
                              TorusField::constant(Vec{0.6}, 1));
}

struct Solved {
  CellSolution plus;
  CellSolution minus;
  StripMeasure strip;
};

Solved solve(const InterfaceDriftField& f, const GridSpec& g, StripOptions opt = {}) {
  Solved s{solve_cell(Side::kPlus, f.plus(), g), solve_cell(Side::kMinus, f.minus(), g), {}};
  s.strip = solve_strip_measure(f, s.plus, s.minus, g, opt);
  return s;
}

TorusField potential_2d() {
  return TorusField::gradient_flow(FourierSeries(
      2, {FourierTerm{{1, 0}, 0.0, 0.15}, FourierTerm{{0, 1}, 0.1, 0.0}, FourierTerm{{1, 1}, 0.05, 0.05}}));
}

TEST(ExtractQ, EqualMassesAreBelowFloor) {
  const std::vector<double> m(8, 0.5);
  const auto q = extract_q(m, m);
  EXPECT_DOUBLE_EQ(q.q_plus, 0.5);
  EXPECT_DOUBLE_EQ(q.q_minus, 0.5);
  EXPECT_TRUE(q.below_floor_plus);
  EXPECT_TRUE(q.below_floor_minus);
  EXPECT_EQ(q.fit_points_plus, 0);
}

TEST(ExtractQ, SyntheticGeometricSequence) {
  std::vector<double> mp;
  std::vector<double> mm;
  for (int j = 0; j < 12; ++j) {
    mp.push_back(0.6 + 0.1 * std::pow(2.0, -j));
    mm.push_back(0.4 - 0.1 * std::pow(2.0, -j));
  }
  const auto q = extract_q(mp, mm);
  EXPECT_NEAR(q.q_plus + q.q_minus, 1.0, 1e-15);
  EXPECT_LE(std::abs(q.q_plus - 0.6), q.tail_bound());
  EXPECT_LT(q.tail_bound(), 1e-3);
  EXPECT_NEAR(q.rate_plus, std::log(2.0), 1e-9);
  EXPECT_NEAR(q.rate_minus, std::log(2.0), 1e-9);
  EXPECT_GT(q.r2_plus, 0.999999);
  EXPECT_FALSE(q.below_floor_plus);
}

TEST(ExtractQ, LongSequenceConvergesToLimit) {
  std::vector<double> mp;
  std::vector<double> mm;
  for (int j = 0; j < 40; ++j) {
    mp.push_back(0.6 + 0.1 * std::pow(2.0, -j));
    mm.push_back(0.4 - 0.1 * std::pow(2.0, -j));
  }
  const auto q = extract_q(mp, mm);
  EXPECT_NEAR(q.q_plus, 0.6, 1e-12);
}

TEST(ExtractQ, ScaleInvariant) {
  std::vector<double> mp;
  std::vector<double> mm;
  for (int j = 0; j < 10; ++j) {
    mp.push_back(0.7 + 0.2 * std::exp(-1.3 * j));
    mm.push_back(0.3 - 0.1 * std::exp(-0.9 * j));
  }
  const auto a = extract_q(mp, mm);
  for (double& v : mp) v *= 37.5;
  for (double& v : mm) v *= 37.5;
  const auto b = extract_q(mp, mm);
  EXPECT_NEAR(a.q_plus, b.q_plus, 1e-15);
  EXPECT_NEAR(a.rate_plus, b.rate_plus, 1e-12);
  EXPECT_NEAR(a.rate_minus, b.rate_minus, 1e-12);
}

TEST(ExtractQ, GrowingResidualsRequestLargerTruncation) {
  std::vector<double> mp;
  std::vector<double> mm(8, 0.5);
  for (int j = 0; j < 8; ++j) mp.push_back(0.5 + 1e-6 * std::pow(2.0, j));
  try {
    extract_q(mp, mm);
    FAIL() << "expected a truncation error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTruncation);
  }
}

TEST(ExtractQ, RejectsShortOrInvalidInput) {
  const std::vector<double> three(3, 0.5);
  EXPECT_THROW(extract_q(three, three), Error);
  std::vector<double> bad(6, 0.5);
  bad[2] = -1.0;
  EXPECT_THROW(extract_q(bad, std::vector<double>(6, 0.5)), Error);
}

TEST(StripMeasure, ZeroFieldIsUniform) {
  const auto f = make_interface_field(TorusField::zero(2), TorusField::zero(2));
  const auto s = solve(f, GridSpec{16, 2, 6});
  EXPECT_NEAR(s.strip.q.q_plus, 0.5, 1e-9);
  for (double v : s.strip.density) EXPECT_NEAR(v, 0.5, 1e-9);
}

TEST(StripMeasure, MirrorSymmetricFieldHasEqualMasses) {
  const auto plus = potential_2d();
  const auto f = make_interface_field(plus, plus.reflected(), 0.5);
  const auto s = solve(f, GridSpec{32, 2, 8});
  EXPECT_NEAR(s.strip.q.q_plus, 0.5, 1e-8);
  EXPECT_NEAR(s.strip.q.q_minus, 0.5, 1e-8);
}

TEST(StripMeasure, OneDimensionalQuadratureOracle) {
  const auto f = gradient_1d();
  const auto [qp, qm] = oracle::two_sided_q([&f](double x) { return eval_drift(f, Vec{x})[0]; });
  const auto s = solve(f, GridSpec{256, 1, 8});
  EXPECT_NEAR(s.strip.q.q_plus, qp, 1e-6);
  EXPECT_NEAR(s.strip.q.q_minus, qm, 1e-6);
  EXPECT_NEAR(s.strip.q.q_plus + s.strip.q.q_minus, 1.0, 1e-15);
}

TEST(StripMeasure, FarCellsMatchScaledCellDensity) {
  const auto f = make_interface_field(potential_2d(), potential_2d().reflected(), 0.5,
                                      TorusField(2, {FourierSeries(2, {FourierTerm{{0, 1}, 0.5, 0.0}}),
                                                     FourierSeries(2, {FourierTerm{{0, 0}, 0.4, 0.0}})}));
  const auto s = solve(f, GridSpec{32, 2, 8});
  for (const auto* cell : {&s.plus, &s.minus}) {
    const double near = cell_profile_error(s.strip, *cell, 1);
    const double far = cell_profile_error(s.strip, *cell, 6);
    EXPECT_LT(far, near);
    EXPECT_LT(far, 1e-6);
  }
  for (double v : s.strip.density) EXPECT_GE(v, 0.0);
}

TEST(StripMeasure, DoublingTruncationStaysWithinTailBound) {
  const auto f = gradient_1d();
  StripOptions opt;
  opt.auto_refine = false;
  const auto a = solve(f, GridSpec{128, 1, 8}, opt);
  const auto b = solve(f, GridSpec{128, 1, 16}, opt);
  EXPECT_LE(std::abs(a.strip.q.q_plus - b.strip.q.q_plus), a.strip.q.tail_bound());
}

TEST(StripMeasure, RequiresConsistentGrid) {
  const auto f = gradient_1d();
  const auto plus = solve_cell(Side::kPlus, f.plus(), GridSpec{64, 1, 8});
  const auto minus = solve_cell(Side::kMinus, f.minus(), GridSpec{64, 1, 8});
  EXPECT_THROW(solve_strip_measure(f, plus, minus, GridSpec{32, 1, 8}), Error);
  EXPECT_THROW(solve_strip_measure(f, minus, plus, GridSpec{64, 1, 8}), Error);
  EXPECT_THROW(solve_strip_measure(f, plus, minus, GridSpec{64, 1, 3}), Error);
}

TEST(ComputeP, Examples) {
  auto [a, b] = compute_p(0.5, 0.5, 1.3, 1.3);
  EXPECT_DOUBLE_EQ(a, 0.5);
  EXPECT_DOUBLE_EQ(b, 0.5);
  std::tie(a, b) = compute_p(0.5, 0.5, 2.0, 1.0);
  EXPECT_NEAR(a, 2.0 / 3.0, 1e-15);
  EXPECT_EQ(a + b, 1.0);
  EXPECT_THROW(compute_p(0.5, 0.5, 0.0, 1.0), Error);
  EXPECT_THROW(compute_p(0.5, 0.5, 1.0, -2.0), Error);
  EXPECT_THROW(compute_p(0.7, 0.5, 1.0, 1.0), Error);
}

TEST(ComputeAlpha, NoTangentialDriftGivesZero) {
  const auto f = make_interface_field(TorusField::gradient_flow(FourierSeries(2, {FourierTerm{{1, 0}, 0.0, 0.2}})),
                                      TorusField::zero(2), 0.5);
  const auto s = solve(f, GridSpec{16, 2, 8});
  const auto [pp, pm] = compute_p(s.strip.q.q_plus, s.strip.q.q_minus, s.plus.D(0, 0), s.minus.D(0, 0));
  const auto a = compute_alpha(s.strip, f, pp, pm, s.plus.D, s.minus.D, &s.plus, &s.minus);
  EXPECT_EQ(a.alpha[1], 0.0);
}

TEST(ComputeAlpha, OddTangentialDriftGivesZero) {
  // b2 = sin(2 pi x1) bump(x1 / eta): divergence free, uniform mu, odd in x1.
  const auto pert = TorusField(2, {FourierSeries(2, {}), FourierSeries(2, {FourierTerm{{1, 0}, 0.0, 1.5}})});
  const auto f = make_interface_field(TorusField::zero(2), TorusField::zero(2), 0.5, pert);
  const auto s = solve(f, GridSpec{32, 2, 8});
  const auto a = compute_alpha(s.strip, f, 0.5, 0.5, s.plus.D, s.minus.D, &s.plus, &s.minus);
  EXPECT_NEAR(a.alpha[1], 0.0, 1e-8);
}

TEST(ComputeAlpha, UniformMeasureBumpIntegral) {
  // b2 = beta bump(x1 / eta), b1 = 0: mu = 1/2 on the strip, so alpha2 = beta eta int bump.
  const double beta = 0.7;
  const double eta = 0.5;
  const auto pert = TorusField(2, {FourierSeries(2, {}), FourierSeries(2, {FourierTerm{{0, 0}, beta, 0.0}})});
  const auto f = make_interface_field(TorusField::zero(2), TorusField::zero(2), eta, pert);
  const auto s = solve(f, GridSpec{64, 2, 6});
  const auto a = compute_alpha(s.strip, f, 0.5, 0.5, s.plus.D, s.minus.D, &s.plus, &s.minus);
  const double bump = oracle::integrate([](double u) { return u * u < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - u * u)) : 0.0; },
                                        -1.0, 1.0, 2000);
  EXPECT_NEAR(a.alpha[1], beta * eta * bump, 1e-6);
}

TEST(AssembleParams, IdentityCase) {
  const auto p = make_interface_params(0.5, Vec{}, Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 2));
  EXPECT_LT((p.M_plus - Eigen::MatrixXd::Identity(2, 2)).norm(), 1e-15);
  EXPECT_LT((p.M_minus - Eigen::MatrixXd::Identity(2, 2)).norm(), 1e-15);
  EXPECT_EQ(p.K.norm(), 0.0);
  EXPECT_DOUBLE_EQ(p.q_plus, 0.5);
}

TEST(AssembleParams, AnisotropicDiffusivityShiftsK1) {
  CellSolution plus;
  CellSolution minus;
  plus.D = Eigen::MatrixXd::Identity(2, 2);
  plus.D(0, 0) = 2.0;
  minus.D = Eigen::MatrixXd::Identity(2, 2);
  plus.grid = minus.grid = GridSpec{16, 2, 8};
  minus.side = Side::kMinus;
  QEstimate q;
  const auto p = assemble_interface_params(plus, minus, q, AlphaResult{});
  EXPECT_NEAR(p.p_plus, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(p.K[0], 1.0 / 3.0, 1e-15);
  EXPECT_EQ(p.K[1], 0.0);
  EXPECT_LT(p.factor_error, 1e-12);
}

TEST(AssembleParams, FactorizationIdentityAndErrors) {
  Eigen::MatrixXd dp(3, 3);
  dp << 2.0, 0.3, -0.1, 0.3, 1.2, 0.2, -0.1, 0.2, 0.9;
  Eigen::MatrixXd dm(3, 3);
  dm << 0.7, -0.1, 0.0, -0.1, 1.5, 0.4, 0.0, 0.4, 1.1;
  const auto p = make_interface_params(0.6, Vec{0, 0.4, -0.2, 0}, dp, dm);
  EXPECT_LT((p.M_plus * p.M_plus.transpose() - dp).norm(), 1e-12);
  EXPECT_LT((p.M_minus * p.M_minus.transpose() - dm).norm(), 1e-12);
  EXPECT_EQ(p.M_plus(0, 1), 0.0);
  EXPECT_NEAR(p.K[0], 0.2, 1e-15);
  EXPECT_EQ(p.K[1], 0.4);
  EXPECT_EQ(p.K[2], -0.2);
  Eigen::MatrixXd bad = dp;
  bad(0, 0) = -1.0;
  EXPECT_THROW(make_interface_params(0.6, Vec{}, bad, dm), Error);
  EXPECT_THROW(make_interface_params(1.0, Vec{}, dp, dm), Error);
}

}  // namespace
}  // namespace ihom

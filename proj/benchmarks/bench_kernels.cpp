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

#include <benchmark/benchmark.h>

#include "ihom/cell_solver.hpp"
#include "ihom/drift_field.hpp"
#include "ihom/limit_process.hpp"
#include "ihom/sde_engine.hpp"
#include "ihom/strip_solver.hpp"

namespace {

using namespace ihom;

InterfaceDriftField bench_field() {
  FourierSeries v(2, {FourierTerm{{1, 0}, 0.0, 0.15}, FourierTerm{{0, 1}, 0.1, 0.0}, FourierTerm{{1, 1}, 0.05, 0.05}});
  FourierSeries w(2, {FourierTerm{{1, 0}, 0.2, 0.0}, FourierTerm{{1, 1}, 0.0, 0.1}});
  FourierSeries bump(2, {FourierTerm{{0, 0}, 0.6, 0.0}, FourierTerm{{0, 1}, 0.0, 0.3}});
  TorusField pert(2, {FourierSeries(2, {}), bump});
  return make_interface_field(TorusField::gradient_flow(v), TorusField::gradient_flow(w), 0.5, pert);
}

void BM_DriftEval(benchmark::State& state) {
  const auto field = bench_field();
  Vec x{0.1, 0.3, 0, 0};
  for (auto _ : state) {
    x[0] += 1e-3;
    if (x[0] > 2.0) x[0] = -2.0;
    benchmark::DoNotOptimize(field(x));
  }
}
BENCHMARK(BM_DriftEval);

void BM_EulerStep(benchmark::State& state) {
  const auto field = bench_field();
  const EulerStepper stepper(field, 1e-3);
  PathRng rng(7);
  Vec x{};
  for (auto _ : state) {
    stepper.step(x, rng);
    if (std::abs(x[0]) > 10.0) x = Vec{};
    benchmark::DoNotOptimize(x);
  }
}
BENCHMARK(BM_EulerStep);

void BM_CellSolve(benchmark::State& state) {
  const auto field = bench_field();
  GridSpec grid{static_cast<int>(state.range(0)), 2, 8};
  for (auto _ : state) benchmark::DoNotOptimize(solve_cell(Side::kPlus, field.plus(), grid).D);
}
BENCHMARK(BM_CellSolve)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_StripSolve(benchmark::State& state) {
  const auto field = bench_field();
  GridSpec grid{static_cast<int>(state.range(0)), 2, 8};
  const auto plus = solve_cell(Side::kPlus, field.plus(), grid);
  const auto minus = solve_cell(Side::kMinus, field.minus(), grid);
  for (auto _ : state) benchmark::DoNotOptimize(solve_strip_measure(field, plus, minus, grid).q.q_plus);
}
BENCHMARK(BM_StripSolve)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_LimitPath(benchmark::State& state) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Identity(2, 2);
  LimitScheme scheme;
  scheme.h = 0.01;
  scheme.params = make_interface_params(0.6, Vec{0.0, 0.4, 0, 0}, d, d);
  PathRng rng(11);
  for (auto _ : state) benchmark::DoNotOptimize(simulate_limit_endpoint(scheme, Vec{}, rng).local_time);
  state.SetItemsProcessed(state.iterations() * scheme.steps());
}
BENCHMARK(BM_LimitPath)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();

/*
 Copyright 2026 The smoothmpc Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/


#include <benchmark/benchmark.h>

#include <memory>

#include "smoothmpc/barrier_mpc.hpp"
#include "smoothmpc/explicit_mpc.hpp"
#include "smoothmpc/mlp.hpp"
#include "smoothmpc/smoothing.hpp"

namespace smoothmpc {
namespace {

std::shared_ptr<const CondensedQP> double_integrator_qp() {
  const LinearSystem sys{(Matrix(2, 2) << 1, 1, 0, 1).finished(),
                         (Matrix(2, 1) << 0, 1).finished()};
  const auto cost = StageCost::constant(Matrix::Identity(2, 2), Matrix::Constant(1, 1, 0.01), 10);
  const auto cons = BoxlikeConstraints::box(Vector::Constant(2, 10.0), Vector::Constant(1, 1.0));
  return std::make_shared<const CondensedQP>(build_condensed(sys, cost, cons));
}

const Vector& probe_state() {
  static const Vector x = (Vector(2) << 5.0, 1.0).finished();
  return x;
}

void BM_SolveQP(benchmark::State& state) {
  const auto qp = double_integrator_qp();
  for (auto _ : state) benchmark::DoNotOptimize(solve_qp(*qp, probe_state()));
}
BENCHMARK(BM_SolveQP);

void BM_ExplicitLawAct(benchmark::State& state) {
  const auto law = std::make_shared<ExplicitLaw>(double_integrator_qp());
  int hint = -1;
  law->act(probe_state(), &hint);
  for (auto _ : state) benchmark::DoNotOptimize(law->act(probe_state(), &hint));
}
BENCHMARK(BM_ExplicitLawAct);

void BM_SolveBarrier(benchmark::State& state) {
  const BarrierProblem bp =
      make_barrier_problem(double_integrator_qp(), static_cast<double>(state.range(0)) * 1e-3);
  for (auto _ : state) benchmark::DoNotOptimize(solve_barrier(bp, probe_state()));
}
BENCHMARK(BM_SolveBarrier)->Arg(1)->Arg(100)->Arg(10000);

void BM_PiRs(benchmark::State& state) {
  const auto qp = double_integrator_qp();
  const auto law = std::make_shared<const ExplicitLaw>(qp);
  const FeasibleStateProjector proj(qp);
  const Policy base = explicit_policy(law);
  const SmoothingConfig cfg{0.3, NoiseDistribution::kUniformBall, static_cast<int>(state.range(0)), 1};
  const Matrix draws = noise_draws(cfg, 2);
  for (auto _ : state) benchmark::DoNotOptimize(pi_rs(base, cfg, probe_state(), &proj, &draws));
}
BENCHMARK(BM_PiRs)->Arg(64)->Arg(256);

void BM_MlpForward(benchmark::State& state) {
  const MLP net(2, 1, 64, 4, 1);
  const Matrix X = Matrix::Random(2, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(X));
}
BENCHMARK(BM_MlpForward)->Arg(1)->Arg(64);

}  // namespace
}  // namespace smoothmpc

BENCHMARK_MAIN();

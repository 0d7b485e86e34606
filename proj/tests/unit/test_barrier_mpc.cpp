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


#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "smoothmpc/barrier_mpc.hpp"

namespace smoothmpc {
namespace {

using testing::double_integrator;
using testing::double_integrator_qp;
using testing::small_qp;
using testing::toy1d_qp;

// Scalar input, T = 1, no state rows, box lo <= u <= hi, H = 2, F = 0.
std::shared_ptr<const CondensedQP> interval_qp(double lo, double hi) {
  BoxlikeConstraints cons;
  cons.Ax = Matrix(0, 1);
  cons.bx = Vector(0);
  cons.Au = (Matrix(2, 1) << 1, -1).finished();
  cons.bu = (Vector(2) << hi, -lo).finished();
  const LinearSystem sys{Matrix::Constant(1, 1, 0.5), Matrix::Ones(1, 1)};
  const auto cost = StageCost::constant(Matrix::Identity(1, 1), Matrix::Identity(1, 1), 1);
  return std::make_shared<const CondensedQP>(build_condensed(sys, cost, cons));
}

TEST(Recentering, SymmetricBoxGivesZero) {
  const auto qp = double_integrator_qp();
  EXPECT_LE(recentering_vector(*qp).norm(), 1e-12);
  const BarrierProblem bp = make_barrier_problem(qp, 1.0);
  EXPECT_NEAR(bp.nu, 1200.0, 1e-9);
}

TEST(Recentering, AsymmetricInterval) {
  const auto qp = interval_qp(-1.0, 2.0);
  EXPECT_NEAR(recentering_vector(*qp)(0), 0.5, 1e-12);
}

TEST(Recentering, BadEtaRejected) {
  EXPECT_THROW(make_barrier_problem(double_integrator_qp(), 0.0), InvalidArgument);
  EXPECT_THROW(make_barrier_problem(double_integrator_qp(), -1.0), InvalidArgument);
}

TEST(SolveBarrier, OriginMapsToZero) {
  for (const auto& qp : {double_integrator_qp(), interval_qp(-1.0, 2.0)}) {
    for (double eta : {1e-4, 1e-2, 1.0, 100.0}) {
      const Vector u = solve_barrier(make_barrier_problem(qp, eta), Vector::Zero(qp->nx)).u_eta;
      EXPECT_LE(u.norm(), 1e-9) << "eta " << eta;
    }
  }
}

TEST(SolveBarrier, SmallEtaApproachesQP) {
  const auto qp = double_integrator_qp();
  Vector x0(2);
  x0 << 5, 2;
  const Vector u = solve_barrier(make_barrier_problem(qp, 1e-6), x0).u_eta;
  EXPECT_LE((u - solve_qp(*qp, x0).u_star).norm(), 1e-2);
}

TEST(SolveBarrier, IntervalLiesBetweenOptimumAndCenter) {
  // x+ = 0.5 x + u; unconstrained minimizer inside the box gets pulled
  // toward the barrier center at 0.
  const auto qp = interval_qp(-1.0, 1.0);
  const Vector x0 = Vector::Constant(1, 1.0);
  const double v = (qp->K0 * x0)(0);
  ASSERT_LT(std::abs(v), 1.0);
  for (double eta : {1e-3, 1e-1, 10.0}) {
    const double u = solve_barrier(make_barrier_problem(qp, eta), x0).u_eta(0);
    EXPECT_GE(u, std::min(v, 0.0) - 1e-12);
    EXPECT_LE(u, std::max(v, 0.0) + 1e-12);
  }
}

TEST(SolveBarrier, ResidualsStayPositiveAndNewtonConverges) {
  const auto qp = double_integrator_qp();
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    Vector x0(2);
    x0 << 8 * U(rng), 2 * U(rng);
    try {
      if (feasible_radii(*qp, x0).r < 1e-3) continue;
    } catch (const InfeasibleError&) {
      continue;
    }
    const BarrierSolution sol = solve_barrier(make_barrier_problem(qp, 0.05), x0);
    EXPECT_GT(sol.phi.minCoeff(), 0.0);
    ASSERT_GE(sol.decrements.size(), 2u);
    // Quadratic convergence phase: the last decrement is tiny.
    EXPECT_LE(sol.decrements.back(), 1e-6);
  }
}

TEST(SolveBarrier, InfeasibleStateThrows) {
  Vector x0(2);
  x0 << 9.9, 5.0;
  EXPECT_THROW(solve_barrier(make_barrier_problem(double_integrator_qp(), 1.0), x0), InfeasibleError);
}

TEST(BarrierJacobian, ClosedFormStableAtLargeEta) {
  const auto qp = small_qp(3);
  const BarrierProblem bp = make_barrier_problem(qp, 1e6);
  const BarrierSolution sol = solve_barrier(bp, Vector::Zero(2));
  const Matrix Ji = barrier_jacobian_implicit(bp, sol);
  EXPECT_LE((sol.jacobian - Ji).cwiseAbs().maxCoeff(), 1e-9 * (1.0 + Ji.cwiseAbs().maxCoeff()));
}

TEST(BarrierJacobian, SmallEtaInteriorGivesUnconstrainedGain) {
  const auto qp = double_integrator_qp();
  Vector x0(2);
  x0 << 0.05, -0.02;
  const BarrierSolution sol = solve_barrier(make_barrier_problem(qp, 1e-8), x0);
  EXPECT_LE((sol.jacobian - qp->K0).cwiseAbs().maxCoeff(), 1e-4);
}

TEST(BarrierJacobian, ClosedFormMatchesImplicitAndFiniteDifferences) {
  const auto qp = double_integrator_qp();
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::uniform_real_distribution<double> logeta(-3.0, 1.0);
  int checked = 0;
  while (checked < 20) {
    Vector x0(2);
    x0 << 8 * U(rng), 2.5 * U(rng);
    try {
      if (feasible_radii(*qp, x0).r < 1e-2) continue;
    } catch (const InfeasibleError&) {
      continue;
    }
    const BarrierProblem bp = make_barrier_problem(qp, std::pow(10.0, logeta(rng)));
    const BarrierSolution sol = solve_barrier(bp, x0);
    const Matrix Ji = barrier_jacobian_implicit(bp, sol);
    EXPECT_LE((sol.jacobian - Ji).norm(), 1e-9 * sol.jacobian.norm());
    BarrierOptions o;
    o.compute_jacobian = false;
    o.warm_start = &sol.u_eta;
    const double h = 1e-3 * std::min(1.0, sol.phi.minCoeff());
    Matrix fd(qp->n(), 2);
    for (int j = 0; j < 2; ++j) {
      Vector xp = x0, xm = x0;
      xp(j) += h;
      xm(j) -= h;
      fd.col(j) = (solve_barrier(bp, xp, o).u_eta - solve_barrier(bp, xm, o).u_eta) / (2 * h);
    }
    EXPECT_LE((sol.jacobian - fd).norm(), 1e-5 * sol.jacobian.norm());
    ++checked;
  }
}

TEST(ConvexCombination, IntervalHasFourTerms) {
  const auto qp = interval_qp(-1.0, 1.0);
  const BarrierProblem bp = make_barrier_problem(qp, 0.1);
  const BarrierSolution sol = solve_barrier(bp, Vector::Constant(1, 1.5));
  const ConvexCombination cc = convex_combination(bp, sol);
  // Both-active is singular for a scalar input: 3 regular sets, 1 singular.
  EXPECT_EQ(cc.weights.size() + static_cast<size_t>(cc.singular_sets), 4u);
  EXPECT_LE((cc.reconstructed - sol.jacobian).cwiseAbs().maxCoeff(), 1e-10);
  double total = 0.0;
  for (const auto& [sigma, w] : cc.weights) {
    EXPECT_GE(w, 0.0);
    total += w;
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(ConvexCombination, SmallEtaConcentratesOnActiveSet) {
  const auto qp = interval_qp(-1.0, 1.0);
  const Vector x0 = Vector::Constant(1, 5.0);  // K0 x0 = -1.25, so u* = -1
  const BarrierProblem bp = make_barrier_problem(qp, 1e-6);
  const BarrierSolution sol = solve_barrier(bp, x0);
  const ConvexCombination cc = convex_combination(bp, sol);
  const ActiveSet expected = solve_qp(*qp, x0).sigma;
  double w_expected = 0.0;
  for (const auto& [sigma, w] : cc.weights) {
    if (sigma == expected) w_expected = w;
  }
  EXPECT_GT(w_expected, 0.99);
}

TEST(ConvexCombination, MatchesJacobianOnSmallInstance) {
  const auto qp = small_qp(2);
  ASSERT_EQ(qp->m, 12);
  Vector x0(2);
  x0 << 6, 1.5;
  const BarrierProblem bp = make_barrier_problem(qp, 0.05);
  const BarrierSolution sol = solve_barrier(bp, x0);
  const ConvexCombination cc = convex_combination(bp, sol);
  EXPECT_LE((cc.reconstructed - sol.jacobian).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(ConvexCombination, RefusesLargeInstances) {
  const auto qp = double_integrator_qp();
  const BarrierProblem bp = make_barrier_problem(qp, 1.0);
  const BarrierSolution sol = solve_barrier(bp, Vector::Zero(2));
  EXPECT_THROW(convex_combination(bp, sol), EnumerationRefused);
}

TEST(BarrierHessian, AnalyticMatchesFiniteDifferences) {
  const auto qp = double_integrator_qp();
  Vector x0(2);
  x0 << 5, 1;
  for (double eta : {0.01, 1.0}) {
    const BarrierProblem bp = make_barrier_problem(qp, eta);
    const BarrierSolution sol = solve_barrier(bp, x0);
    const HessianTensor fd = barrier_hessian(bp, x0, &sol);
    const HessianTensor an = barrier_hessian_analytic(bp, sol);
    ASSERT_EQ(fd.slices.size(), an.slices.size());
    double scale = 0.0;
    for (const Matrix& s : an.slices) scale = std::max(scale, s.cwiseAbs().maxCoeff());
    for (size_t j = 0; j < an.slices.size(); ++j) {
      EXPECT_LE((fd.slices[j] - an.slices[j]).cwiseAbs().maxCoeff(), 1e-4 * (1.0 + scale));
    }
    EXPECT_LE(an.asymmetry, 1e-8);
    EXPECT_NEAR(fd.norm, an.norm, 1e-3 * (1.0 + an.norm));
  }
}

TEST(BarrierHessian, UnconstrainedDirectionsGiveZero) {
  // Far from every constraint and with a tiny eta the law is nearly linear.
  const auto qp = double_integrator_qp();
  const BarrierProblem bp = make_barrier_problem(qp, 1e-6);
  const BarrierSolution sol = solve_barrier(bp, Vector::Zero(2));
  EXPECT_LE(barrier_hessian_analytic(bp, sol).norm, 1e-3);
}

TEST(UnfoldedNorm, MatchesSingularValue) {
  std::vector<Matrix> slices{(Matrix(2, 2) << 1, 0, 0, 2).finished(),
                             (Matrix(2, 2) << 0, 0, 0, 0).finished()};
  // Unfolding is [[1, 0, 0, 0], [0, 2, 0, 0]].
  EXPECT_NEAR(unfolded_norm(slices), 2.0, 1e-10);
}

TEST(PiBarrier, Stabilizes) {
  const auto qp = double_integrator_qp();
  const LinearSystem sys = double_integrator();
  for (double eta : {0.01, 1.0, 100.0}) {
    const BarrierProblem bp = make_barrier_problem(qp, eta);
    Vector x(2);
    x << 5, 2;
    for (int k = 0; k < 50; ++k) x = sys.A * x + sys.B * pi_barrier(bp, x);
    EXPECT_LE(x.norm(), 0.1) << "eta " << eta;
  }
}

TEST(PiBarrier, InteriorDeviationShrinksWithEta) {
  const auto qp = double_integrator_qp();
  Vector x0(2);
  x0 << 5, 2;
  const Vector u_star = solve_qp(*qp, x0).u_star;
  double prev = 0.0;
  for (double eta : {1e-4, 1e-3, 1e-2, 1e-1, 1.0}) {
    const double dev = (solve_barrier(make_barrier_problem(qp, eta), x0).u_eta - u_star).norm();
    EXPECT_GE(dev, prev);
    prev = dev;
  }
}

}  // namespace
}  // namespace smoothmpc

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
#include <limits>
#include <random>

#include "fixtures.hpp"
#include "smoothmpc/explicit_mpc.hpp"

namespace smoothmpc {
namespace {

using testing::double_integrator;
using testing::double_integrator_qp;
using testing::toy1d_qp;

// Independent oracle: accelerated projected gradient on the dual
// max_{y >= 0} -1/2 y'Sy + y'c, u = H^-1 (F'x0 - G'y).
Vector dual_projected_gradient(const CondensedQP& qp, const Vector& x0, int iters) {
  const Matrix& S = qp.GHinvGt;
  const Vector c = qp.GHinvFt_minus_P * x0 - qp.w;
  const double Lip = Eigen::SelfAdjointEigenSolver<Matrix>(S).eigenvalues().maxCoeff();
  Vector y = Vector::Zero(qp.m);
  Vector z = y;
  double t = 1.0;
  for (int k = 0; k < iters; ++k) {
    const Vector y_next = (z - (S * z - c) / Lip).cwiseMax(0.0);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    z = y_next + ((t - 1.0) / t_next) * (y_next - y);
    y = y_next;
    t = t_next;
  }
  return qp.Hinv * (qp.F.transpose() * x0 - qp.G.transpose() * y);
}

TEST(SolveQP, InteriorMatchesUnconstrainedGain) {
  const auto qp = double_integrator_qp();
  Vector x0(2);
  x0 << 0.05, -0.02;
  const QPSolution sol = solve_qp(*qp, x0);
  EXPECT_LE((sol.u_star - qp->K0 * x0).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_EQ(sol.sigma.popcount(), 0);
}

TEST(SolveQP, ScalarClip) {
  const auto qp = toy1d_qp();
  const QPSolution sol = solve_qp(*qp, Vector::Constant(1, 3.0));
  EXPECT_NEAR(sol.u_star(0), -1.0, 1e-12);
  EXPECT_EQ(sol.sigma.popcount(), 1);
}

TEST(SolveQP, DoubleIntegratorSaturates) {
  const auto qp = double_integrator_qp();
  Vector x0(2);
  x0 << 5, 2;
  const QPSolution sol = solve_qp(*qp, x0);
  EXPECT_NEAR(sol.u_star(0), -1.0, 1e-9);
}

TEST(SolveQP, AgreesWithDualGradientOracle) {
  const auto qp = double_integrator_qp();
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  int checked = 0;
  while (checked < 5) {
    Vector x0(2);
    x0 << 9 * U(rng), 2.5 * U(rng);
    QPSolution sol;
    try {
      sol = solve_qp(*qp, x0);
    } catch (const InfeasibleError&) {
      continue;
    }
    const Vector u = dual_projected_gradient(*qp, x0, 200000);
    EXPECT_LE((sol.u_star - u).cwiseAbs().maxCoeff(), 1e-6) << x0.transpose();
    ++checked;
  }
}

TEST(SolveQP, KKTAndComplementarity) {
  const auto qp = double_integrator_qp();
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    Vector x0(2);
    x0 << 9 * U(rng), 2.5 * U(rng);
    QPSolution sol;
    try {
      sol = solve_qp(*qp, x0);
    } catch (const InfeasibleError&) {
      continue;
    }
    const Vector phi = residuals(*qp, x0, sol.u_star);
    const Vector& y = sol.multipliers;
    EXPECT_GE(phi.minCoeff(), -1e-8);
    EXPECT_GE(y.minCoeff(), -1e-9);
    EXPECT_LE(std::abs(y.dot(phi)), 1e-7);
    const Vector stat = qp->H * sol.u_star - qp->F.transpose() * x0 + qp->G.transpose() * y;
    EXPECT_LE(stat.cwiseAbs().maxCoeff(), 1e-7);
  }
}

TEST(SolveQP, InfeasibleCarriesCertificate) {
  const auto qp = double_integrator_qp();
  Vector x0(2);
  x0 << 9.9, 5.0;
  try {
    solve_qp(*qp, x0);
    FAIL() << "expected InfeasibleError";
  } catch (const InfeasibleError& e) {
    const Vector& y = e.certificate();
    ASSERT_EQ(y.size(), qp->m);
    EXPECT_GE(y.minCoeff(), 0.0);
    EXPECT_LE((qp->G.transpose() * y).cwiseAbs().maxCoeff(), 1e-9 * (1 + y.sum()));
    EXPECT_LT(y.dot(qp->w + qp->P * x0), 0.0);
  }
}

TEST(GainForSigma, EmptySetIsUnconstrainedGain) {
  const auto qp = double_integrator_qp();
  const AffinePiece p = gain_for_sigma(*qp, ActiveSet(qp->m));
  EXPECT_LE((p.K - qp->K0).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE(p.k.cwiseAbs().maxCoeff(), 1e-15);
}

TEST(GainForSigma, ReproducesSolverOnItsRegion) {
  const auto qp = double_integrator_qp();
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    Vector x0(2);
    x0 << 9 * U(rng), 2.5 * U(rng);
    QPSolution sol;
    try {
      sol = solve_qp(*qp, x0);
    } catch (const InfeasibleError&) {
      continue;
    }
    const AffinePiece p = gain_for_sigma(*qp, sol.working_set);
    EXPECT_LE((p.evaluate(x0) - sol.u_star).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(GainForSigma, OversizedSetIsDegenerate) {
  const auto qp = testing::small_qp(2);
  ActiveSet all(qp->m);
  for (int i = 0; i < qp->m; ++i) all.set(i, true);
  EXPECT_THROW(gain_for_sigma(*qp, all), DegenerateActiveSetError);
}

TEST(ActiveSetType, StringRoundTrip) {
  const ActiveSet s = ActiveSet::from_string("0110");
  EXPECT_EQ(s.popcount(), 2);
  EXPECT_EQ(s.to_string(), "0110");
  EXPECT_EQ(s.indices(), (std::vector<int>{1, 2}));
  EXPECT_EQ(ActiveSet::from_indices(4, {1, 2}), s);
}

TEST(PiMpc, OriginMapsToZero) {
  const auto qp = double_integrator_qp();
  EXPECT_LE(pi_mpc(*qp, Vector::Zero(2)).norm(), 1e-12);
}

TEST(PiMpc, LinearOnARegion) {
  const auto qp = double_integrator_qp();
  Vector x0(2);
  x0 << 0.2, 0.1;
  for (double lam : {0.5, 1.0, 2.0}) {
    EXPECT_LE((pi_mpc(*qp, lam * x0) - lam * pi_mpc(*qp, x0)).norm(), 1e-10);
  }
}

TEST(PiMpc, DoubleIntegratorStabilizes) {
  const auto qp = double_integrator_qp();
  const LinearSystem sys = double_integrator();
  Vector x(2);
  x << 5, 2;
  for (int k = 0; k < 50; ++k) {
    x = sys.A * x + sys.B * pi_mpc(*qp, x);
  }
  EXPECT_LE(x.norm(), 0.1);
}

TEST(Discovery, ToyHasThreePieces) {
  const auto qp = toy1d_qp();
  const StateGrid grid = StateGrid::uniform(Vector::Constant(1, -5.5), Vector::Constant(1, 5.5), 400);
  const DiscoveryResult res = discover_pieces(*qp, grid);
  EXPECT_EQ(res.distinct_sigma, 3);
  EXPECT_EQ(res.distinct_gain, 3);
}

TEST(Discovery, UnconstrainedHasOnePiece) {
  const auto cost = StageCost::constant(Matrix::Identity(2, 2), Matrix::Constant(1, 1, 0.01), 5);
  const Vector inf = Vector::Constant(2, std::numeric_limits<double>::infinity());
  const auto cons = BoxlikeConstraints::box(inf, Vector::Constant(1, inf(0)));
  const CondensedQP qp = build_condensed(double_integrator(), cost, cons);
  const StateGrid grid = StateGrid::uniform(Vector::Constant(2, -5), Vector::Constant(2, 5), 21);
  const DiscoveryResult res = discover_pieces(qp, grid);
  EXPECT_EQ(res.distinct_gain, 1);
}

TEST(Discovery, PiecesAreConsistent) {
  const auto qp = double_integrator_qp();
  const StateGrid grid = StateGrid::uniform(Vector::Constant(2, -10), Vector::Constant(2, 10), 41);
  const DiscoveryResult res = discover_pieces(*qp, grid);
  EXPECT_GT(res.distinct_sigma, 1);
  EXPECT_EQ(res.feasible_points + res.infeasible_points, grid.size());
  for (long f = 0; f < grid.size(); ++f) {
    const Vector x = grid.point(f);
    QPSolution sol;
    try {
      sol = solve_qp(*qp, x);
    } catch (const InfeasibleError&) {
      continue;
    }
    bool found = false;
    for (const AffinePiece& p : res.pieces) {
      if (p.sigma == sol.working_set) {
        EXPECT_LE((p.evaluate(x) - sol.u_star).cwiseAbs().maxCoeff(), 1e-8);
        found = true;
      }
    }
    EXPECT_TRUE(found);
  }
}

TEST(Discovery, JobsDoNotChangeResult) {
  const auto qp = double_integrator_qp();
  const StateGrid grid = StateGrid::uniform(Vector::Constant(2, -10), Vector::Constant(2, 10), 31);
  const DiscoveryResult a = discover_pieces(*qp, grid, 1);
  const DiscoveryResult b = discover_pieces(*qp, grid, 3);
  EXPECT_EQ(a.distinct_sigma, b.distinct_sigma);
  EXPECT_EQ(a.feasible_points, b.feasible_points);
}

TEST(ExplicitLawType, MatchesSolverAndIsLipschitz) {
  const auto qp = double_integrator_qp();
  ExplicitLaw law(qp);
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<Vector> xs;
  for (int trial = 0; trial < 300; ++trial) {
    Vector x0(2);
    x0 << 9 * U(rng), 2.5 * U(rng);
    QPSolution sol;
    try {
      sol = solve_qp(*qp, x0);
    } catch (const InfeasibleError&) {
      EXPECT_THROW(law.solve(x0), InfeasibleError);
      continue;
    }
    EXPECT_LE((law.solve(x0) - sol.u_star).cwiseAbs().maxCoeff(), 1e-8);
    xs.push_back(x0);
  }
  ASSERT_GT(law.piece_count(), 1);
  // Continuous piecewise-affine: chord slopes never exceed the largest gain
  // met along the chord.
  for (size_t i = 0; i + 1 < xs.size(); ++i) {
    double max_gain = 0.0;
    for (int j = 0; j <= 40; ++j) {
      const Vector x = xs[i] + (j / 40.0) * (xs[i + 1] - xs[i]);
      max_gain = std::max(max_gain, law.gain(x).operatorNorm());
    }
    const double num = (law.solve(xs[i]) - law.solve(xs[i + 1])).norm();
    EXPECT_LE(num, max_gain * (xs[i] - xs[i + 1]).norm() * (1 + 1e-8) + 1e-9);
  }
}

}  // namespace
}  // namespace smoothmpc

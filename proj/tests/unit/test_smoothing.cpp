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

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fixtures.hpp"
#include "smoothmpc/smoothing.hpp"

namespace smoothmpc {
namespace {

using testing::double_integrator_qp;

Policy clip_policy() {
  return function_policy(1, 1, [](const Vector& x) {
    return Vector::Constant(1, std::clamp(x(0), -1.0, 1.0));
  });
}

TEST(NoiseDraws, ShapesAndSupport) {
  for (auto dist : {NoiseDistribution::kUniformBall, NoiseDistribution::kUniformBox,
                    NoiseDistribution::kGaussian}) {
    const SmoothingConfig cfg{1.0, dist, 500, 3};
    const Matrix W = noise_draws(cfg, 3);
    ASSERT_EQ(W.rows(), 500);
    ASSERT_EQ(W.cols(), 3);
    if (dist == NoiseDistribution::kUniformBall) {
      EXPECT_LE(W.rowwise().norm().maxCoeff(), 1.0 + 1e-12);
    }
    if (dist == NoiseDistribution::kUniformBox) {
      EXPECT_LE(W.cwiseAbs().maxCoeff(), 1.0);
    }
    EXPECT_LE(W.colwise().mean().cwiseAbs().maxCoeff(), 0.2);
  }
}

TEST(NoiseDraws, RowsIndependentOfCount) {
  const Matrix a = noise_draws({1.0, NoiseDistribution::kGaussian, 10, 9}, 2);
  const Matrix b = noise_draws({1.0, NoiseDistribution::kGaussian, 20, 9}, 2);
  EXPECT_TRUE(a == b.topRows(10));
}

TEST(NoiseDraws, ParseNames) {
  EXPECT_EQ(parse_distribution("uniform-ball"), NoiseDistribution::kUniformBall);
  EXPECT_EQ(to_string(NoiseDistribution::kUniformBox), "uniform-box");
  EXPECT_THROW(parse_distribution("laplace"), InvalidArgument);
}

TEST(SmoothingConfigType, Validation) {
  EXPECT_THROW((SmoothingConfig{0.0, NoiseDistribution::kGaussian, 10, 0}.validate()),
               InvalidArgument);
  EXPECT_THROW((SmoothingConfig{1.0, NoiseDistribution::kGaussian, 0, 0}.validate()),
               InvalidArgument);
}

TEST(PiRs, LinearPolicyIsUnbiased) {
  const Matrix K = (Matrix(1, 2) << -0.7, 1.3).finished();
  const Policy lin = linear_policy(K);
  const Vector x = (Vector(2) << 0.4, -0.2).finished();
  for (auto dist : {NoiseDistribution::kUniformBall, NoiseDistribution::kGaussian}) {
    const SmoothedValue v = pi_rs(lin, {0.5, dist, 4000, 21}, x);
    EXPECT_LE(std::abs(v.mean(0) - (K * x)(0)), 3.0 * v.std_error(0) + 1e-12);
    EXPECT_GT(v.std_error(0), 0.0);
  }
}

TEST(PiRs, LinearJacobianIsExact) {
  const Matrix K = (Matrix(1, 2) << -0.7, 1.3).finished();
  const Matrix J = pi_rs_jacobian(linear_policy(K), {0.5, NoiseDistribution::kGaussian, 64, 2},
                                  Vector::Zero(2));
  EXPECT_LE((J - K).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(PiRs, ClipVanishesAtLargeSigma) {
  const SmoothingConfig cfg{100.0, NoiseDistribution::kUniformBall, 20000, 5};
  for (double x : {-1.0, 0.0, 0.5, 1.0}) {
    EXPECT_LE(std::abs(pi_rs(clip_policy(), cfg, Vector::Constant(1, x)).mean(0)), 0.05);
  }
}

TEST(PiRs, DeterministicForFixedSeed) {
  const SmoothingConfig cfg{0.3, NoiseDistribution::kUniformBall, 100, 77};
  const Vector x = Vector::Constant(1, 0.9);
  EXPECT_EQ(pi_rs(clip_policy(), cfg, x).mean(0), pi_rs(clip_policy(), cfg, x).mean(0));
}

TEST(PiRs, FailingPolicyRaises) {
  const Policy bad = function_policy(1, 1, [](const Vector&) -> Vector {
    throw InfeasibleError("always infeasible");
  });
  EXPECT_THROW(pi_rs(bad, {0.1, NoiseDistribution::kGaussian, 20, 0}, Vector::Zero(1)),
               SmoothingError);
}

TEST(PiRs, ProjectionRescuesBoundarySamples) {
  const auto qp = double_integrator_qp();
  const auto law = std::make_shared<const ExplicitLaw>(qp);
  const auto proj = std::make_shared<const FeasibleStateProjector>(qp);
  const Policy base = explicit_policy(law);
  const Vector x = (Vector(2) << 7.0, 1.5).finished();  // close to the edge
  const SmoothedValue v = pi_rs(base, {1.0, NoiseDistribution::kUniformBall, 200, 4}, x, proj.get());
  EXPECT_GT(v.projected_fraction, 0.0);
  EXPECT_EQ(v.failures, 0);
  EXPECT_TRUE(v.mean.allFinite());
}

TEST(Projector, ReturnsFeasibleStates) {
  const auto qp = double_integrator_qp();
  const FeasibleStateProjector proj(qp);
  for (const Vector& y : {(Vector(2) << 9.5, 4.0).finished(), (Vector(2) << -12.0, 0.0).finished(),
                          (Vector(2) << 0.0, 9.0).finished()}) {
    const Vector x = proj.project(y);
    EXPECT_NO_THROW(solve_qp(*qp, x)) << y.transpose();
    EXPECT_LT((x - y).norm(), y.norm());
  }
  const Vector inside = (Vector(2) << 1.0, 0.5).finished();
  EXPECT_LE((proj.project(inside) - inside).norm(), 1e-5);
}

TEST(Tradeoff, SoftAbsoluteValue) {
  // g = sqrt(x^2 + d^2) smooths |x|: eps = d, g'' max = 1 / d.
  const int n = 4001;
  const double delta = 0.05;
  const Vector xs = Vector::LinSpaced(n, -1.0, 1.0);
  const Vector f = xs.cwiseAbs();
  const Vector g = (xs.cwiseAbs2().array() + delta * delta).sqrt().matrix();
  const TradeoffAudit a = tradeoff_audit(xs, f, g, -1.0, 1.0);
  EXPECT_NEAR(a.epsilon, delta, 1e-12);
  EXPECT_NEAR(a.theoretical_floor, 4.0 / (144.0 * delta), 1e-9);
  EXPECT_NEAR(a.worst_grad_lipschitz, 1.0 / delta, 0.02 / delta);
  EXPECT_TRUE(a.satisfied);
}

TEST(Tradeoff, NoKinkMeansNoFloor) {
  const Vector xs = Vector::LinSpaced(101, -1.0, 1.0);
  const TradeoffAudit a = tradeoff_audit(xs, xs, xs + Vector::Constant(101, 0.01), 1.0, 1.0);
  EXPECT_DOUBLE_EQ(a.theoretical_floor, 0.0);
  EXPECT_TRUE(a.satisfied);
}

TEST(Tradeoff, CoarseGridRejected) {
  const Vector xs = Vector::LinSpaced(5, -1.0, 1.0);
  const Vector f = xs.cwiseAbs();
  EXPECT_THROW(tradeoff_audit(xs, f, f + Vector::Constant(5, 0.01), -1.0, 1.0), ResolutionError);
}

}  // namespace
}  // namespace smoothmpc

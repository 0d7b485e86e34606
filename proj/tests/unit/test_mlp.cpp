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
#include <numeric>
#include <random>

#include "smoothmpc/mlp.hpp"

namespace smoothmpc {
namespace {

// Dataset of a linear map u = K x on random states; one trajectory per row.
ImitationDataset linear_dataset(int rows, std::uint64_t seed, bool with_jacobians = false) {
  const Matrix K = (Matrix(1, 2) << 0.5, -0.25).finished();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  ImitationDataset ds;
  ds.N = rows;
  ds.K = 1;
  ds.states = Matrix(rows, 2);
  for (Eigen::Index i = 0; i < ds.states.size(); ++i) ds.states.data()[i] = U(rng);
  ds.inputs = ds.states * K.transpose();
  for (int i = 0; i < rows; ++i) ds.initial_states.push_back(ds.states.row(i).transpose());
  if (with_jacobians) ds.jacobians.assign(static_cast<size_t>(rows), K);
  return ds;
}

std::vector<int> all_rows(const ImitationDataset& ds) {
  std::vector<int> idx(static_cast<size_t>(ds.size()));
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

TEST(Mlp, ShapesAndParameterRoundTrip) {
  const MLP net(2, 1, 8, 3, 1);
  EXPECT_EQ(net.layers(), 3);
  EXPECT_EQ(net.parameter_count(), (2 * 8 + 8) + (8 * 8 + 8) + (8 * 1 + 1));
  MLP copy = net;
  const Vector theta = Vector::LinSpaced(net.parameter_count(), -1.0, 1.0);
  copy.set_parameters(theta);
  EXPECT_TRUE(copy.parameters() == theta);
  EXPECT_EQ(copy.forward(Matrix::Ones(2, 5)).cols(), 5);
}

TEST(Mlp, SeededInitIsDeterministic) {
  EXPECT_TRUE(MLP(2, 1, 8, 3, 42).parameters() == MLP(2, 1, 8, 3, 42).parameters());
  EXPECT_FALSE(MLP(2, 1, 8, 3, 42).parameters() == MLP(2, 1, 8, 3, 43).parameters());
}

TEST(Mlp, GradientMatchesFiniteDifferences) {
  const ImitationDataset ds = linear_dataset(16, 3);
  const MLP net(2, 1, 6, 3, 7, Vector::Constant(2, 2.0));
  const std::vector<int> idx = all_rows(ds);
  Vector grad = Vector::Zero(net.parameter_count());
  imitation_loss(net, ds, idx, 0.0, 1e-3, &grad);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  const Vector theta = net.parameters();
  for (int dir = 0; dir < 20; ++dir) {
    Vector v(theta.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = n01(rng);
    v.normalize();
    const double h = 1e-5;
    MLP p = net;
    MLP m = net;
    p.set_parameters(theta + h * v);
    m.set_parameters(theta - h * v);
    const double fd = (imitation_loss(p, ds, idx, 0.0, 1e-3, nullptr) -
                       imitation_loss(m, ds, idx, 0.0, 1e-3, nullptr)) / (2 * h);
    const double an = grad.dot(v);
    EXPECT_LE(std::abs(fd - an), 1e-4 * std::max(1.0, std::abs(an)));
  }
}

TEST(Mlp, JacobianTermGradient) {
  const ImitationDataset ds = linear_dataset(8, 4, true);
  const MLP net(2, 1, 6, 2, 9);
  const std::vector<int> idx = all_rows(ds);
  Vector grad = Vector::Zero(net.parameter_count());
  const double base = imitation_loss(net, ds, idx, 0.5, 1e-3, &grad);
  EXPECT_GT(base, imitation_loss(net, ds, idx, 0.0, 1e-3, nullptr));
  const Vector theta = net.parameters();
  Vector v = Vector::Ones(theta.size()).normalized();
  const double h = 1e-5;
  MLP p = net;
  MLP m = net;
  p.set_parameters(theta + h * v);
  m.set_parameters(theta - h * v);
  const double fd = (imitation_loss(p, ds, idx, 0.5, 1e-3, nullptr) -
                     imitation_loss(m, ds, idx, 0.5, 1e-3, nullptr)) / (2 * h);
  EXPECT_LE(std::abs(fd - grad.dot(v)), 1e-4 * std::max(1.0, std::abs(fd)));
}

TEST(Mlp, InputJacobianOfLinearNet) {
  MLP net(2, 1, 4, 1, 3, Vector::Constant(2, 2.0));
  Vector theta(3);
  theta << 1.0, -2.0, 0.5;  // W = [1, -2], b = 0.5 on scaled input x / 2
  net.set_parameters(theta);
  const Matrix J = net.input_jacobian(Vector::Zero(2));
  EXPECT_NEAR(J(0, 0), 0.5, 1e-9);
  EXPECT_NEAR(J(0, 1), -1.0, 1e-9);
}

TEST(AdamW, FirstStepAndDecay) {
  TrainConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.weight_decay = 0.5;
  Vector theta = Vector::Constant(1, 2.0);
  Vector m = Vector::Zero(1);
  Vector v = Vector::Zero(1);
  adamw_step(&theta, Vector::Constant(1, 3.0), &m, &v, 1, cfg);
  // m_hat / (sqrt(v_hat) + eps) = 3 / (3 + 1e-8); decay 0.5 * 2.
  EXPECT_NEAR(theta(0), 2.0 - 0.1 * (3.0 / (3.0 + 1e-8) + 1.0), 1e-12);
  // Zero gradient: pure decoupled decay contracts theta.
  Vector t2 = Vector::Constant(1, 1.0);
  Vector m2 = Vector::Zero(1);
  Vector v2 = Vector::Zero(1);
  adamw_step(&t2, Vector::Zero(1), &m2, &v2, 1, cfg);
  EXPECT_NEAR(t2(0), 1.0 - 0.1 * 0.5, 1e-15);
}

TEST(Training, ZeroStepsKeepsInit) {
  const ImitationDataset ds = linear_dataset(32, 1);
  TrainConfig cfg;
  cfg.steps = 0;
  cfg.width = 8;
  cfg.layers = 2;
  cfg.seed = 3;
  const TrainResult res = train_imitator(ds, cfg, Vector::Ones(2));
  EXPECT_TRUE(res.model.parameters() == MLP(2, 1, 8, 2, 3, Vector::Ones(2)).parameters());
}

TEST(Training, FitsLinearMap) {
  const ImitationDataset ds = linear_dataset(256, 2);
  TrainConfig cfg;
  cfg.steps = 5000;
  cfg.width = 32;
  cfg.layers = 2;
  cfg.learning_rate = 3e-3;
  cfg.weight_decay = 0.0;
  cfg.log_every = 1000;
  const TrainResult res = train_imitator(ds, cfg, Vector::Ones(2));
  ASSERT_FALSE(res.train_loss.empty());
  EXPECT_LE(res.train_loss.back(), 1e-4);
  EXPECT_LT(res.train_loss.back(), res.train_loss.front());
  EXPECT_LE(res.validation_loss.back(), 1e-3);
}

TEST(Training, BitwiseDeterministicAcrossJobs) {
  const ImitationDataset ds = linear_dataset(128, 6);
  TrainConfig cfg;
  cfg.steps = 50;
  cfg.width = 16;
  cfg.layers = 2;
  cfg.batch_size = 64;
  const Vector a = train_imitator(ds, cfg, Vector::Ones(2)).model.parameters();
  const Vector b = train_imitator(ds, cfg, Vector::Ones(2)).model.parameters();
  cfg.jobs = 3;
  const Vector c = train_imitator(ds, cfg, Vector::Ones(2)).model.parameters();
  EXPECT_TRUE(a == b);
  EXPECT_TRUE(a == c);
}

TEST(Training, JacobianWeightChangesResult) {
  const ImitationDataset ds = linear_dataset(64, 8, true);
  TrainConfig cfg;
  cfg.steps = 20;
  cfg.width = 8;
  cfg.layers = 2;
  const Vector a = train_imitator(ds, cfg, Vector::Ones(2)).model.parameters();
  cfg.jacobian_weight = 1.0;
  const Vector b = train_imitator(ds, cfg, Vector::Ones(2)).model.parameters();
  EXPECT_FALSE(a == b);
}

TEST(Training, NonFiniteLossRaises) {
  ImitationDataset ds = linear_dataset(16, 9);
  ds.inputs(0, 0) = std::numeric_limits<double>::quiet_NaN();
  TrainConfig cfg;
  cfg.steps = 5;
  cfg.width = 4;
  cfg.layers = 2;
  cfg.batch_size = 16;
  cfg.validation_fraction = 0.0;
  EXPECT_THROW(train_imitator(ds, cfg, Vector::Ones(2)), TrainingError);
}

TEST(Training, ConfigValidation) {
  TrainConfig cfg;
  cfg.learning_rate = -1.0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = TrainConfig();
  cfg.batch_size = 0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
}

TEST(LearnedPolicy, EvaluatesModel) {
  auto net = std::make_shared<const MLP>(2, 1, 8, 2, 1);
  const Policy p = learned_policy(net);
  const Vector x = (Vector(2) << 0.3, -0.1).finished();
  EXPECT_EQ(p.kind, PolicyKind::kLearned);
  EXPECT_TRUE(p(x) == (*net)(x));
  EXPECT_EQ(p.jacobian_at(x).cols(), 2);
}

}  // namespace
}  // namespace smoothmpc

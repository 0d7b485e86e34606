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

#include "smoothmpc/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "smoothmpc/parallel.hpp"

namespace smoothmpc {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                               Eigen::RowMajor>;

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double gelu(double z) { return 0.5 * z * (1.0 + std::erf(z * kInvSqrt2)); }

double gelu_prime(double z) {
  return 0.5 * (1.0 + std::erf(z * kInvSqrt2)) +
         z * kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

}  // namespace

MLP::MLP(int nx, int nu, int width, int layers, std::uint64_t seed,
         Vector input_scale)
    : nx_(nx), nu_(nu), input_scale_(std::move(input_scale)) {
  if (nx < 1 || nu < 1 || width < 1 || layers < 1) {
    throw InvalidArgument("MLP: dimensions must be positive");
  }
  if (input_scale_.size() == 0) input_scale_ = Vector::Ones(nx);
  if (input_scale_.size() != nx || !(input_scale_.array() > 0.0).all()) {
    throw InvalidArgument("MLP: input_scale must be positive, length nx");
  }
  std::vector<int> dims{nx};
  for (int l = 0; l + 1 < layers; ++l) dims.push_back(width);
  dims.push_back(nu);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (size_t l = 0; l + 1 < dims.size(); ++l) {
    Matrix W(dims[l + 1], dims[l]);
    const double sd = 1.0 / std::sqrt(static_cast<double>(dims[l]));
    for (Eigen::Index i = 0; i < W.rows(); ++i) {
      for (Eigen::Index j = 0; j < W.cols(); ++j) W(i, j) = sd * normal(rng);
    }
    weights_.push_back(std::move(W));
    biases_.push_back(Vector::Zero(dims[l + 1]));
  }
}

long MLP::parameter_count() const {
  long n = 0;
  for (size_t l = 0; l < weights_.size(); ++l) {
    n += static_cast<long>(weights_[l].size() + biases_[l].size());
  }
  return n;
}

Vector MLP::parameters() const {
  Vector theta(parameter_count());
  Eigen::Index at = 0;
  for (size_t l = 0; l < weights_.size(); ++l) {
    const Matrix& W = weights_[l];
    Eigen::Map<RowMajor>(theta.data() + at, W.rows(), W.cols()) = W;
    at += W.size();
    theta.segment(at, biases_[l].size()) = biases_[l];
    at += biases_[l].size();
  }
  return theta;
}

void MLP::set_parameters(const Vector& theta) {
  if (theta.size() != parameter_count()) {
    throw DimensionError("MLP::set_parameters: size mismatch");
  }
  Eigen::Index at = 0;
  for (size_t l = 0; l < weights_.size(); ++l) {
    Matrix& W = weights_[l];
    W = Eigen::Map<const RowMajor>(theta.data() + at, W.rows(), W.cols());
    at += W.size();
    biases_[l] = theta.segment(at, biases_[l].size());
    at += biases_[l].size();
  }
}

Matrix MLP::forward(const Matrix& X) const {
  if (X.rows() != nx_) throw DimensionError("MLP::forward: bad input rows");
  Matrix A = input_scale_.cwiseInverse().asDiagonal() * X;
  for (size_t l = 0; l < weights_.size(); ++l) {
    Matrix Z = weights_[l] * A;
    Z.colwise() += biases_[l];
    if (l + 1 < weights_.size()) Z = Z.unaryExpr(&gelu);
    A = std::move(Z);
  }
  return A;
}

Vector MLP::operator()(const Vector& x) const { return forward(x).col(0); }

void MLP::backward(const Matrix& X, const Matrix& dY, Vector* grad) const {
  if (grad->size() != parameter_count()) {
    throw DimensionError("MLP::backward: gradient size mismatch");
  }
  const size_t L = weights_.size();
  std::vector<Matrix> acts(L);   // input to layer l
  std::vector<Matrix> pre(L);    // pre-activation of layer l
  acts[0] = input_scale_.cwiseInverse().asDiagonal() * X;
  for (size_t l = 0; l < L; ++l) {
    pre[l] = weights_[l] * acts[l];
    pre[l].colwise() += biases_[l];
    if (l + 1 < L) acts[l + 1] = pre[l].unaryExpr(&gelu);
  }
  std::vector<Eigen::Index> offset(L);
  Eigen::Index at = 0;
  for (size_t l = 0; l < L; ++l) {
    offset[l] = at;
    at += weights_[l].size() + biases_[l].size();
  }
  Matrix dA = dY;
  for (size_t l = L; l-- > 0;) {
    Matrix dZ = dA;
    if (l + 1 < L) dZ = dZ.cwiseProduct(pre[l].unaryExpr(&gelu_prime));
    const Matrix& W = weights_[l];
    Eigen::Map<RowMajor>(grad->data() + offset[l], W.rows(), W.cols()) +=
        dZ * acts[l].transpose();
    grad->segment(offset[l] + W.size(), biases_[l].size()) +=
        dZ.rowwise().sum();
    if (l > 0) dA = W.transpose() * dZ;
  }
}

Matrix MLP::input_jacobian(const Vector& x, double h) const {
  Matrix J(nu_, nx_);
  for (int j = 0; j < nx_; ++j) {
    const double step = h * input_scale_(j);
    Vector xp = x;
    Vector xm = x;
    xp(j) += step;
    xm(j) -= step;
    J.col(j) = ((*this)(xp) - (*this)(xm)) / (2.0 * step);
  }
  return J;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !(weight_decay >= 0.0) || steps < 0 ||
      batch_size < 1 || !(jacobian_weight >= 0.0) || !(jacobian_step > 0.0) ||
      !(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) ||
      !(epsilon > 0.0) || !(validation_fraction >= 0.0 &&
                            validation_fraction < 1.0) ||
      log_every < 1 || width < 1 || layers < 1) {
    throw InvalidArgument("TrainConfig: invalid hyperparameters");
  }
}

namespace {

struct Partial {
  double loss = 0.0;
  Vector grad;
};

Partial chunk_loss(const MLP& model, const ImitationDataset& ds,
                   const std::vector<int>& idx, size_t lo, size_t hi,
                   double total, double lambda, double h, bool want_grad) {
  Partial out;
  if (want_grad) out.grad = Vector::Zero(model.parameter_count());
  const Eigen::Index B = static_cast<Eigen::Index>(hi - lo);
  if (B == 0) return out;
  Matrix X(model.nx(), B);
  Matrix U(model.nu(), B);
  for (Eigen::Index b = 0; b < B; ++b) {
    const int row = idx[lo + static_cast<size_t>(b)];
    X.col(b) = ds.states.row(row).transpose();
    U.col(b) = ds.inputs.row(row).transpose();
  }
  const Matrix diff = model.forward(X) - U;
  out.loss = diff.squaredNorm() / total;
  if (want_grad) model.backward(X, (2.0 / total) * diff, &out.grad);
  if (lambda > 0.0) {
    for (int j = 0; j < model.nx(); ++j) {
      const double step = h * model.input_scale()(j);
      Matrix Xp = X;
      Matrix Xm = X;
      Xp.row(j).array() += step;
      Xm.row(j).array() -= step;
      Matrix E = (model.forward(Xp) - model.forward(Xm)) / (2.0 * step);
      for (Eigen::Index b = 0; b < B; ++b) {
        const int row = idx[lo + static_cast<size_t>(b)];
        E.col(b) -= ds.jacobians[static_cast<size_t>(row)].col(j);
      }
      out.loss += lambda * E.squaredNorm() / total;
      if (want_grad) {
        const Matrix dY = (lambda / (total * step)) * E;
        model.backward(Xp, dY, &out.grad);
        model.backward(Xm, -dY, &out.grad);
      }
    }
  }
  return out;
}

// Pairwise reduction in a fixed tree order.
Partial reduce(std::vector<Partial>& parts, size_t lo, size_t hi) {
  if (hi - lo == 1) return std::move(parts[lo]);
  const size_t mid = lo + (hi - lo) / 2;
  Partial a = reduce(parts, lo, mid);
  Partial b = reduce(parts, mid, hi);
  a.loss += b.loss;
  if (a.grad.size() > 0) a.grad += b.grad;
  return a;
}

}  // namespace

double imitation_loss(const MLP& model, const ImitationDataset& ds,
                      const std::vector<int>& idx, double jacobian_weight,
                      double jacobian_step, Vector* grad, int jobs) {
  if (idx.empty()) {
    if (grad != nullptr) *grad = Vector::Zero(model.parameter_count());
    return 0.0;
  }
  if (jacobian_weight > 0.0 &&
      ds.jacobians.size() != static_cast<size_t>(ds.size())) {
    throw InvalidArgument("imitation_loss: dataset has no Jacobians");
  }
  const size_t chunks = std::min<size_t>(8, idx.size());
  std::vector<Partial> parts(chunks);
  const double total = static_cast<double>(idx.size());
  parallel_for(static_cast<long>(chunks), jobs, [&](long c) {
    const size_t lo = idx.size() * static_cast<size_t>(c) / chunks;
    const size_t hi = idx.size() * static_cast<size_t>(c + 1) / chunks;
    parts[static_cast<size_t>(c)] =
        chunk_loss(model, ds, idx, lo, hi, total, jacobian_weight,
                   jacobian_step, grad != nullptr);
  });
  Partial sum = reduce(parts, 0, chunks);
  if (grad != nullptr) *grad = std::move(sum.grad);
  return sum.loss;
}

void adamw_step(Vector* theta, const Vector& grad, Vector* m, Vector* v, int t,
                const TrainConfig& cfg) {
  *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * grad;
  *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  const Vector step =
      (*m / c1).array() / ((*v / c2).cwiseSqrt().array() + cfg.epsilon);
  *theta -= cfg.learning_rate * (step + cfg.weight_decay * *theta);
}

TrainResult train_imitator(const ImitationDataset& ds, const TrainConfig& cfg,
                           const Vector& input_scale) {
  cfg.validate();
  const int nx = static_cast<int>(ds.states.cols());
  const int nu = static_cast<int>(ds.inputs.cols());
  TrainResult res;
  res.model = MLP(nx, nu, cfg.width, cfg.layers, cfg.seed, input_scale);
  if (ds.size() == 0 || cfg.steps == 0) return res;

  int val_traj = static_cast<int>(std::floor(cfg.validation_fraction * ds.N));
  if (ds.N < 2) val_traj = 0;
  const int train_rows = (ds.N - val_traj) * ds.K;
  std::vector<int> train_idx(static_cast<size_t>(train_rows));
  for (int i = 0; i < train_rows; ++i) train_idx[static_cast<size_t>(i)] = i;
  std::vector<int> val_idx;
  for (int i = train_rows; i < ds.size(); ++i) val_idx.push_back(i);

  std::mt19937_64 rng(cfg.seed ^ 0x5DEECE66Dull);
  std::uniform_int_distribution<int> pick(0, train_rows - 1);
  Vector theta = res.model.parameters();
  Vector m = Vector::Zero(theta.size());
  Vector v = Vector::Zero(theta.size());
  std::vector<int> batch(static_cast<size_t>(std::min(cfg.batch_size, train_rows)));
  Vector grad;
  const auto log = [&](int step) {
    res.logged_steps.push_back(step);
    res.train_loss.push_back(imitation_loss(res.model, ds, train_idx,
                                            cfg.jacobian_weight,
                                            cfg.jacobian_step, nullptr,
                                            cfg.jobs));
    res.validation_loss.push_back(
        imitation_loss(res.model, ds, val_idx, cfg.jacobian_weight,
                       cfg.jacobian_step, nullptr, cfg.jobs));
    if (!std::isfinite(res.train_loss.back())) {
      throw TrainingError("train_imitator: non-finite loss at step " +
                          std::to_string(step));
    }
  };
  log(0);
  for (int step = 1; step <= cfg.steps; ++step) {
    for (int& b : batch) b = train_idx[static_cast<size_t>(pick(rng))];
    const double loss = imitation_loss(res.model, ds, batch,
                                       cfg.jacobian_weight, cfg.jacobian_step,
                                       &grad, cfg.jobs);
    if (!std::isfinite(loss) || !grad.allFinite()) {
      throw TrainingError("train_imitator: non-finite loss at step " +
                          std::to_string(step));
    }
    adamw_step(&theta, grad, &m, &v, step, cfg);
    res.model.set_parameters(theta);
    if (step % cfg.log_every == 0 || step == cfg.steps) log(step);
  }
  return res;
}

Policy learned_policy(std::shared_ptr<const MLP> model) {
  Policy p;
  p.kind = PolicyKind::kLearned;
  p.nx = model->nx();
  p.nu = model->nu();
  p.act = [model](const Vector& x) { return (*model)(x); };
  p.jacobian = [model](const Vector& x) { return model->input_jacobian(x); };
  return p;
}

}  // namespace smoothmpc

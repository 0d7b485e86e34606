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

#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "smoothmpc/policy.hpp"
#include "smoothmpc/simulation.hpp"

namespace smoothmpc {

/// Dense network nx -> width -> ... -> nu with GELU (erf form) on hidden
/// layers. Inputs are divided by `input_scale` before the first layer.
class MLP {
 public:
  MLP() = default;
  MLP(int nx, int nu, int width, int layers, std::uint64_t seed,
      Vector input_scale = Vector());

  int nx() const { return nx_; }
  int nu() const { return nu_; }
  int layers() const { return static_cast<int>(weights_.size()); }
  long parameter_count() const;

  /// Flat parameter vector: for each layer W (row-major) then b.
  Vector parameters() const;
  void set_parameters(const Vector& theta);

  /// Columns of X are raw states; returns nu x batch outputs.
  Matrix forward(const Matrix& X) const;
  Vector operator()(const Vector& x) const;

  /// Accumulates d(sum_b <dY_b, f(X_b)>)/d theta into `grad` (flat layout).
  void backward(const Matrix& X, const Matrix& dY, Vector* grad) const;

  /// Central-difference input Jacobian, step h * input_scale_j.
  Matrix input_jacobian(const Vector& x, double h = 1e-3) const;

  const Vector& input_scale() const { return input_scale_; }

 private:
  int nx_ = 0;
  int nu_ = 0;
  Vector input_scale_;
  std::vector<Matrix> weights_;
  std::vector<Vector> biases_;
};

struct TrainConfig {
  double learning_rate = 3e-4;
  double weight_decay = 1e-3;
  int steps = 3000;
  int batch_size = 64;
  std::uint64_t seed = 0;
  double jacobian_weight = 0.0;  // lambda_J
  double jacobian_step = 1e-3;   // relative to input_scale
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double validation_fraction = 0.2;
  int log_every = 50;
  int width = 64;
  int layers = 4;
  /// Gradient chunks summed pairwise in fixed order; results do not depend
  /// on `jobs`.
  int jobs = 1;

  void validate() const;
};

struct TrainResult {
  MLP model;
  std::vector<int> logged_steps;
  std::vector<double> train_loss;
  std::vector<double> validation_loss;
};

/// Loss on rows `idx` of the dataset: mean |f(x) - u|^2 plus
/// lambda_J mean |J_fd(x) - J|_F^2. Gradient written to `grad` when given.
double imitation_loss(const MLP& model, const ImitationDataset& ds,
                      const std::vector<int>& idx, double jacobian_weight,
                      double jacobian_step, Vector* grad, int jobs = 1);

/// AdamW on mini-batches; validation rows are the trailing fraction of whole
/// trajectories. Throws TrainingError on a non-finite loss.
TrainResult train_imitator(const ImitationDataset& ds, const TrainConfig& cfg,
                           const Vector& input_scale);

/// One decoupled-weight-decay Adam step; `t` is the 1-based step count.
void adamw_step(Vector* theta, const Vector& grad, Vector* m, Vector* v, int t,
                const TrainConfig& cfg);

Policy learned_policy(std::shared_ptr<const MLP> model);

}  // namespace smoothmpc

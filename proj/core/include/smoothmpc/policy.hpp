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

#include <functional>
#include <memory>
#include <string>

#include "smoothmpc/barrier_mpc.hpp"
#include "smoothmpc/explicit_mpc.hpp"

namespace smoothmpc {

enum class PolicyKind { kExplicit, kBarrier, kRandomized, kLearned, kLinear,
                        kFunction };

std::string to_string(PolicyKind kind);

/// State-feedback law x -> u0. `jacobian` may be empty, in which case
/// callers fall back to central differences. Evaluators must be reentrant.
struct Policy {
  PolicyKind kind = PolicyKind::kFunction;
  int nx = 0;
  int nu = 0;
  double parameter = 0.0;  // eta for barrier, sigma for randomized
  std::function<Vector(const Vector&)> act;
  std::function<Matrix(const Vector&)> jacobian;

  Vector operator()(const Vector& x) const { return act(x); }

  /// Analytic Jacobian when available, else central differences with step
  /// h (1 + |x|).
  Matrix jacobian_at(const Vector& x, double h = 1e-6) const;
};

Policy explicit_policy(std::shared_ptr<const ExplicitLaw> law);

/// u^eta(x) first block; Jacobian from the closed form.
Policy barrier_policy(const BarrierProblem& bp);

Policy linear_policy(const Matrix& K);

Policy function_policy(int nx, int nu, std::function<Vector(const Vector&)> f,
                       std::function<Matrix(const Vector&)> jac = nullptr);

/// Central-difference Jacobian of f at x with step h (1 + |x|).
Matrix finite_difference_jacobian(const std::function<Vector(const Vector&)>& f,
                                  const Vector& x, double h = 1e-6);

}  // namespace smoothmpc

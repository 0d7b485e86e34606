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

#include "smoothmpc/policy.hpp"

namespace smoothmpc {

std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kExplicit:
      return "explicit";
    case PolicyKind::kBarrier:
      return "barrier";
    case PolicyKind::kRandomized:
      return "randomized";
    case PolicyKind::kLearned:
      return "learned";
    case PolicyKind::kLinear:
      return "linear";
    case PolicyKind::kFunction:
      return "function";
  }
  return "unknown";
}

Matrix finite_difference_jacobian(const std::function<Vector(const Vector&)>& f,
                                  const Vector& x, double h) {
  const double step = h * (1.0 + x.norm());
  Matrix J;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Vector xp = x;
    Vector xm = x;
    xp(j) += step;
    xm(j) -= step;
    const Vector col = (f(xp) - f(xm)) / (2.0 * step);
    if (j == 0) J.resize(col.size(), x.size());
    J.col(j) = col;
  }
  return J;
}

Matrix Policy::jacobian_at(const Vector& x, double h) const {
  if (jacobian) return jacobian(x);
  return finite_difference_jacobian(act, x, h);
}

Policy explicit_policy(std::shared_ptr<const ExplicitLaw> law) {
  Policy p;
  p.kind = PolicyKind::kExplicit;
  p.nx = law->problem().nx;
  p.nu = law->problem().nu;
  p.act = [law](const Vector& x) {
    thread_local int hint = -1;
    return law->act(x, &hint);
  };
  p.jacobian = [law](const Vector& x) {
    thread_local int hint = -1;
    return Matrix(law->gain(x, &hint).topRows(law->problem().nu));
  };
  return p;
}

Policy barrier_policy(const BarrierProblem& bp) {
  Policy p;
  p.kind = PolicyKind::kBarrier;
  p.nx = bp.problem().nx;
  p.nu = bp.problem().nu;
  p.parameter = bp.eta;
  p.act = [bp](const Vector& x) { return pi_barrier(bp, x); };
  p.jacobian = [bp](const Vector& x) {
    const BarrierSolution s = solve_barrier(bp, x);
    return Matrix(s.jacobian.topRows(bp.problem().nu));
  };
  return p;
}

Policy linear_policy(const Matrix& K) {
  Policy p;
  p.kind = PolicyKind::kLinear;
  p.nx = static_cast<int>(K.cols());
  p.nu = static_cast<int>(K.rows());
  p.act = [K](const Vector& x) { return Vector(K * x); };
  p.jacobian = [K](const Vector&) { return K; };
  return p;
}

Policy function_policy(int nx, int nu, std::function<Vector(const Vector&)> f,
                       std::function<Matrix(const Vector&)> jac) {
  Policy p;
  p.kind = PolicyKind::kFunction;
  p.nx = nx;
  p.nu = nu;
  p.act = std::move(f);
  p.jacobian = std::move(jac);
  return p;
}

}  // namespace smoothmpc

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

#include <memory>

#include "smoothmpc/mpc_core.hpp"

namespace smoothmpc::testing {

inline LinearSystem double_integrator() {
  return {(Matrix(2, 2) << 1, 1, 0, 1).finished(),
          (Matrix(2, 1) << 0, 1).finished()};
}

/// Q = I, R = 0.01, T = 10, |x|_inf <= 10, |u| <= 1.
inline std::shared_ptr<const CondensedQP> double_integrator_qp(
    CostScaling scaling = CostScaling::kConsistent) {
  const auto cost = StageCost::constant(Matrix::Identity(2, 2),
                                        Matrix::Constant(1, 1, 0.01), 10);
  const auto cons = BoxlikeConstraints::box(Vector::Constant(2, 10.0),
                                            Vector::Constant(1, 1.0));
  return std::make_shared<const CondensedQP>(
      build_condensed(double_integrator(), cost, cons, scaling));
}

/// x+ = 2x + u, T = 1, |u| <= 1, |x| <= 10, Q = 1, R = r.
inline std::shared_ptr<const CondensedQP> toy1d_qp(double r = 1e-6) {
  const LinearSystem sys{Matrix::Constant(1, 1, 2.0), Matrix::Constant(1, 1, 1.0)};
  const auto cost = StageCost::constant(Matrix::Identity(1, 1),
                                        Matrix::Constant(1, 1, r), 1);
  const auto cons = BoxlikeConstraints::box(Vector::Constant(1, 10.0),
                                            Vector::Constant(1, 1.0));
  return std::make_shared<const CondensedQP>(build_condensed(sys, cost, cons));
}

/// Short-horizon double integrator with m = 2 T (input box only) + 4 T.
inline std::shared_ptr<const CondensedQP> small_qp(int T, double xb = 10.0) {
  const auto cost = StageCost::constant(Matrix::Identity(2, 2),
                                        Matrix::Constant(1, 1, 0.01), T);
  const auto cons = BoxlikeConstraints::box(Vector::Constant(2, xb),
                                            Vector::Constant(1, 1.0));
  return std::make_shared<const CondensedQP>(
      build_condensed(double_integrator(), cost, cons));
}

}  // namespace smoothmpc::testing

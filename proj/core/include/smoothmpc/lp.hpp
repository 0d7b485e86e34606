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

#include "smoothmpc/types.hpp"

namespace smoothmpc {

enum class LPStatus { kOptimal, kInfeasible, kUnbounded };

/// min c'x  s.t.  A x = b, x >= 0.
struct StandardLPResult {
  LPStatus status = LPStatus::kInfeasible;
  Vector x;
  Vector y;  // equality multipliers: A'y <= c at optimum
  double objective = 0.0;
  int pivots = 0;
};

/// Dense two-phase tableau simplex with Bland's rule.
StandardLPResult solve_standard_lp(const Matrix& A, const Vector& b,
                                   const Vector& c, double tol = 1e-10);

/// max c'z  s.t.  A z <= b, z free.
struct InequalityLPResult {
  LPStatus status = LPStatus::kInfeasible;
  Vector z;
  Vector lambda;       // lambda >= 0, A'lambda = c at optimum
  Vector certificate;  // infeasible: y >= 0, A'y = 0, b'y < 0
  double objective = 0.0;
};

InequalityLPResult solve_inequality_lp(const Matrix& A, const Vector& b,
                                       const Vector& c, double tol = 1e-10);

/// Returns y >= 0 with A'y = 0 and b'y = -1 if {z : Az <= b} is empty,
/// otherwise an empty vector.
Vector farkas_certificate(const Matrix& A, const Vector& b,
                          double tol = 1e-10);

}  // namespace smoothmpc

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

#include <vector>

#include "smoothmpc/types.hpp"

namespace smoothmpc {

/// x_{t+1} = A x_t + B u_t
struct LinearSystem {
  Matrix A;
  Matrix B;

  int nx() const { return static_cast<int>(A.rows()); }
  int nu() const { return static_cast<int>(B.cols()); }
  void validate() const;
};

/// Per-step weights. Q[t] weighs x_{t+1}, R[t] weighs u_t, t = 0..T-1.
struct StageCost {
  std::vector<Matrix> Q;
  std::vector<Matrix> R;
  int T = 0;

  static StageCost constant(const Matrix& Q, const Matrix& R, int T);
  void validate(int nx, int nu) const;
};

/// State polytope {x : A_x x <= b_x} and input polytope {u : A_u u <= b_u}.
struct BoxlikeConstraints {
  Matrix Ax;
  Vector bx;
  Matrix Au;
  Vector bu;

  /// |x_i| <= x_bound[i], |u_j| <= u_bound[j]. A non-positive or infinite
  /// bound drops that pair of rows.
  static BoxlikeConstraints box(const Vector& x_bound, const Vector& u_bound);

  int kx() const { return static_cast<int>(Ax.rows()); }
  int ku() const { return static_cast<int>(Au.rows()); }

  /// Checks shapes, finiteness, nonemptiness and that 0 is interior (b > 0).
  void validate(int nx, int nu) const;
};

struct StackedMaps {
  Matrix Ahat;  // (T nx) x nx
  Matrix Bhat;  // (T nx) x (T nu)
};

/// min 1/2 u'Hu - x0'Fu  s.t.  Gu <= w + P x0.
/// Rows of G are ordered: T blocks of input rows, then T blocks of state rows
/// (x_1 .. x_T).
struct CondensedQP {
  Matrix H;
  Matrix F;
  Matrix G;
  Vector w;
  Matrix P;
  int m = 0;
  int T = 0;
  int nx = 0;
  int nu = 0;
  double alpha1 = 0.0;
  double alpha2 = 0.0;

  // Derived quantities cached at construction.
  Matrix Hinv;
  Matrix GHinvGt;        // G H^-1 G'
  Matrix GHinvFt_minus_P;  // G H^-1 F' - P
  Matrix K0;             // H^-1 F'

  int n() const { return static_cast<int>(H.rows()); }

  /// Fills the cached fields and checks invariants.
  void finalize();
};

StackedMaps stacked_maps(const LinearSystem& sys, int T);

/// kConsistent: H = 2(Rbar + Bhat'Qbar Bhat), so 1/2 u'Hu - x0'Fu equals the
/// horizon cost up to an x0-only constant.
/// kHalfQuadratic: H = Rbar + Bhat'Qbar Bhat with the same F. The minimizer
/// then differs from the horizon-cost minimizer; kept for comparison only.
enum class CostScaling { kConsistent, kHalfQuadratic };

CondensedQP build_condensed(const LinearSystem& sys, const StageCost& cost,
                            const BoxlikeConstraints& cons,
                            CostScaling scaling = CostScaling::kConsistent);

/// phi = P x0 + w - G u.
Vector residuals(const CondensedQP& qp, const Vector& x0, const Vector& u);

/// Original horizon cost sum_{t=1..T} x_t'Q x_t + sum_{t=0..T-1} u_t'R u_t.
double original_cost(const LinearSystem& sys, const StageCost& cost,
                     const Vector& x0, const Vector& u);

/// Condensed objective 1/2 u'Hu - x0'Fu.
double condensed_cost(const CondensedQP& qp, const Vector& x0, const Vector& u);

/// States x_1..x_T stacked, by direct simulation.
Vector rollout_states(const LinearSystem& sys, const Vector& x0,
                      const Vector& u, int T);

struct FeasibleRadii {
  double r = 0.0;
  double R = 0.0;
  Vector center;
};

struct ChebyshevBall {
  Vector center;
  double r = 0.0;
};

/// Largest ball inside {z : A z <= b}. With a finite `r_cap` the radius is
/// capped, which keeps the LP bounded on unbounded polytopes.
/// Throws InfeasibleError (with Farkas certificate) if the polytope is empty
/// and UnboundedError if the radius is unbounded and no cap is given.
ChebyshevBall chebyshev_ball(const Matrix& A, const Vector& b,
                             double r_cap = -1.0);

/// Chebyshev radius r and an origin-centered enclosing radius R of the input
/// polytope {u : Gu <= w + P x0}.
/// Throws InfeasibleError (with Farkas certificate) or UnboundedError.
FeasibleRadii feasible_radii(const CondensedQP& qp, const Vector& x0);

/// Same computation for an arbitrary polytope {z : A z <= b}.
FeasibleRadii polytope_radii(const Matrix& A, const Vector& b);

}  // namespace smoothmpc

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
#include <map>
#include <string>
#include <vector>

#include "smoothmpc/barrier_mpc.hpp"

namespace smoothmpc {

/// lhs <= rhs check with relative slack 1e-10.
struct BoundReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool satisfied = true;
  bool applicable = true;
  std::map<std::string, double> context;

  static BoundReport make(std::string name, double lhs, double rhs);
};

/// 20 (m + R^2 |d|^2).
double sc_parameter(int m, double R, const Vector& d);

/// sqrt(2 eta nu / alpha1).
double error_upper(double eta, double nu, double alpha1);
double error_upper(const BarrierProblem& bp);

/// |v|_H = sqrt(v'Hv).
double h_norm(const Matrix& H, const Vector& v);

struct DirectionalBounds {
  bool applicable = false;  // false when u* = K0 x0
  Vector a;
  double s = 0.0;  // |u* - K0 x0|_H
  double lower = 0.0;
  double upper = 0.0;
};

/// Sandwich for a'(u^eta - u*) along a = H(u* - K0 x0)/|H(u* - K0 x0)|,
/// with the constraint count m in place of the barrier parameter.
/// r, R are the radii of the input polytope at x0.
DirectionalBounds directional_bounds(const CondensedQP& qp, double eta,
                                     const Vector& x0, const Vector& u_star,
                                     double r, double R);

/// (lmin/lmax)(r/R) min{ (sqrt(eta + s^2) - s)/sqrt(nu lmin), r/(2nu+4sqrt(nu)) }
/// with s = |u* - K0 x0|_H and nu from the barrier problem.
double residual_lower_bound(const BarrierProblem& bp, const Vector& x0,
                            const Vector& u_star, double r, double R);

/// min{eta/2, r eta^2 / (150 (nu eta^2 + R^2 (L^2 + 1)))}. Stated for unit
/// rows; callers compare it with phi_i / |g_i|.
double first_residual_lower_bound(double eta, double nu, double r, double R,
                                  double L);

/// Lipschitz constant of q(u) = 1/2 u'Hu - x0'Fu + eta d'u on |u| <= R.
double quadratic_lipschitz(const BarrierProblem& bp, const Vector& x0,
                           double R);

/// C = max over sigma of |2 H^-1 G' (G H^-1 G')_sigma^+| and
/// L = max over sigma of |K_sigma|.
struct PieceConstants {
  double C = 0.0;
  double L = 0.0;
  int sets = 0;
};

/// Enumerates every nonsingular sigma (m <= 20).
PieceConstants piece_constants_enumerated(const CondensedQP& qp);

/// Restricts the maximum to the supplied active sets.
PieceConstants piece_constants_over(const CondensedQP& qp,
                                    const std::vector<ActiveSet>& sets);

/// (C / res)(|P| + |G| L)^2.
double hessian_upper_bound(const CondensedQP& qp, double res, double C,
                           double L);

/// Generic strongly convex quadratic over a polytope:
/// x^eta = argmin 1/2 (x-v)'H(x-v) - eta sum log(b - Ax),
/// x*    = argmin over {Ax <= b} of the same quadratic.
struct QuadOptReport {
  BoundReport item_i;
  BoundReport item_ii_lower;  // 0 <= a'(x^eta - x*)
  BoundReport item_ii_upper;
  BoundReport item_iii;  // ball radius <= min distance to the boundary
  Vector x_eta;
  Vector x_star;
};

/// r, R are taken about the Chebyshev center of {Ax <= b}; nu = rows of A.
QuadOptReport quad_opt_bounds(const Matrix& A, const Vector& b,
                              const Matrix& H, const Vector& v, double eta);

/// Minimizer of 1/2 (x-v)'H(x-v) - eta sum log(b - Ax) by damped Newton.
Vector log_barrier_minimizer(const Matrix& A, const Vector& b,
                             const Matrix& H, const Vector& v, double eta);

/// 1-D self-concordant barrier on (0, r).
struct SelfConcordantBarrier1D {
  double r = 1.0;
  double nu = 2.0;
  std::function<double(double)> value;
  std::function<double(double)> derivative;

  /// -log x - log(r - x), nu = 2.
  static SelfConcordantBarrier1D log_interval(double r);
  /// -log x, restricted to (0, r), nu = 1.
  static SelfConcordantBarrier1D log_left(double r);
};

struct OneDGap {
  double x_eta = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool satisfied = false;
};

/// q(x) = curvature/2 (x - v)^2 with m = M = curvature unless given.
/// x^eta by golden-section search to 1e-12.
OneDGap one_d_gap_oracle(const SelfConcordantBarrier1D& barrier, double m,
                         double M, double v, double eta,
                         const std::function<double(double)>& q = nullptr);

/// Golden-section minimizer of f on (lo, hi).
double golden_section(const std::function<double(double)>& f, double lo,
                      double hi, double tol = 1e-12);

struct BarrierAxiomReport {
  int pairs = 0;
  double max_inner_product = 0.0;  // max grad'(y - x), must be <= nu
  double min_hessian_eig = 0.0;    // must be >= 1/(9 R^2)
  double nu = 0.0;
  double hessian_floor = 0.0;
  bool satisfied = false;
};

/// Log barrier on {Az <= b} with nu = rows. x drawn strictly inside, y on
/// the closure (random vertices of sampled segments). R is origin-centered.
BarrierAxiomReport barrier_axioms_check(const Matrix& A, const Vector& b,
                                        int pairs, unsigned seed);

}  // namespace smoothmpc

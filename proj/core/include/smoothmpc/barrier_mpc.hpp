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
#include <utility>
#include <vector>

#include "smoothmpc/explicit_mpc.hpp"
#include "smoothmpc/mpc_core.hpp"

namespace smoothmpc {

/// min_u 1/2 u'Hu - x0'Fu - eta [ 1'log(phi) - d'u ],  phi = P x0 + w - G u.
struct BarrierProblem {
  std::shared_ptr<const CondensedQP> qp;
  double eta = 1.0;
  Vector d;        // recentering vector
  double nu = 0.0;  // 20 (m + R^2 |d|^2)
  double r0 = 0.0;  // Chebyshev radius at x0 = 0
  double R0 = 0.0;  // enclosing radius at x0 = 0

  const CondensedQP& problem() const { return *qp; }
  BarrierProblem with_eta(double new_eta) const;
};

/// d = -G'(1/w). Throws OriginNotInteriorError if some w_i <= 0.
Vector recentering_vector(const CondensedQP& qp);

/// Computes d, the radii at x0 = 0 and nu. Throws InvalidArgument for
/// eta <= 0.
BarrierProblem make_barrier_problem(const CondensedQP& qp, double eta);
BarrierProblem make_barrier_problem(std::shared_ptr<const CondensedQP> qp,
                                    double eta);

struct BarrierOptions {
  int max_newton = 200;            // per continuation stage
  double armijo = 0.25;
  double shrink = 0.5;
  double eta_reduction = 0.2;      // continuation factor
  bool compute_jacobian = true;
  const Vector* warm_start = nullptr;  // strictly feasible guess
};

struct BarrierSolution {
  Vector u_eta;
  Vector phi;
  int newton_iters = 0;       // total over all stages
  int stages = 0;             // continuation stages
  double grad_norm = 0.0;
  std::vector<double> decrements;  // Newton decrements of the final stage
  Matrix jacobian;            // empty if not requested
  double jacobian_condition = 0.0;
  bool ill_conditioned = false;  // condition estimate above 1e14
};

/// Damped Newton with backtracking. Starts from the analytic center (or the
/// warm start) and follows a geometric eta schedule down to bp.eta.
/// Throws InfeasibleError if the polytope at x0 has empty interior and
/// ConvergenceError (with the last iterate) if Newton stalls.
BarrierSolution solve_barrier(const BarrierProblem& bp, const Vector& x0,
                              const BarrierOptions& opts = {});

/// H^-1 [F' - G'(G H^-1 G' + eta^-1 Phi^2)^-1 (G H^-1 F' - P)].
Matrix barrier_jacobian(const BarrierProblem& bp, const BarrierSolution& sol,
                        double* condition = nullptr);

/// (H + eta G' Phi^-2 G)^-1 (F' + eta G' Phi^-2 P), the implicit-function
/// form of the same derivative.
Matrix barrier_jacobian_implicit(const BarrierProblem& bp,
                                 const BarrierSolution& sol);

struct ConvexCombination {
  std::vector<std::pair<ActiveSet, double>> weights;  // normalized, S only
  Matrix reconstructed;
  double log_weight_sum = 0.0;  // log sum h_sigma
  int singular_sets = 0;        // members of the complement of S
};

/// Enumerates all 2^m active sets. Throws EnumerationRefused for m > 20.
ConvexCombination convex_combination(const BarrierProblem& bp,
                                     const BarrierSolution& sol);

/// Second derivative of u^eta w.r.t. x0: slices[j] = d(Jacobian)/d x0_j.
struct HessianTensor {
  std::vector<Matrix> slices;
  double norm = 0.0;          // spectral norm of the n x (nx nx) unfolding
  double asymmetry = 0.0;     // max |T[:, j, k] - T[:, k, j]| / (1 + max|T|)
  double step = 0.0;
};

/// Central differences of the closed-form Jacobian with step
/// 1e-5 (1 + |x0|), halved while x0 +- h leaves the interior.
HessianTensor barrier_hessian(const BarrierProblem& bp, const Vector& x0,
                              const BarrierSolution* at_x0 = nullptr);

/// Chain-rule form: dJ[y] = H^-1 G' M^-1 (2 eta^-1 Phi dPhi[y]) M^-1 N,
/// dphi[y] = (P - G J) y.
HessianTensor barrier_hessian_analytic(const BarrierProblem& bp,
                                       const BarrierSolution& sol);

/// Spectral norm of the n x (nx nx) unfolding, by power iteration.
double unfolded_norm(const std::vector<Matrix>& slices);

Vector pi_barrier(const BarrierProblem& bp, const Vector& x);

}  // namespace smoothmpc

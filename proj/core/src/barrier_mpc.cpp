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

#include "smoothmpc/barrier_mpc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "smoothmpc/barrier_bounds.hpp"
#include "smoothmpc/linalg.hpp"

namespace smoothmpc {

BarrierProblem BarrierProblem::with_eta(double new_eta) const {
  if (!(new_eta > 0.0)) throw InvalidArgument("BarrierProblem: eta must be > 0");
  BarrierProblem bp = *this;
  bp.eta = new_eta;
  return bp;
}

Vector recentering_vector(const CondensedQP& qp) {
  for (int i = 0; i < qp.m; ++i) {
    if (!(qp.w(i) > 0.0)) {
      throw OriginNotInteriorError("recentering_vector: w_i <= 0 at row " +
                                   std::to_string(i));
    }
  }
  return -(qp.G.transpose() * qp.w.cwiseInverse());
}

BarrierProblem make_barrier_problem(std::shared_ptr<const CondensedQP> qp,
                                    double eta) {
  if (!(eta > 0.0)) throw InvalidArgument("make_barrier_problem: eta <= 0");
  BarrierProblem bp;
  bp.qp = std::move(qp);
  bp.eta = eta;
  bp.d = recentering_vector(*bp.qp);
  const FeasibleRadii radii =
      feasible_radii(*bp.qp, Vector::Zero(bp.qp->nx));
  bp.r0 = radii.r;
  bp.R0 = radii.R;
  bp.nu = sc_parameter(bp.qp->m, bp.R0, bp.d);
  return bp;
}

BarrierProblem make_barrier_problem(const CondensedQP& qp, double eta) {
  return make_barrier_problem(std::make_shared<const CondensedQP>(qp), eta);
}

namespace {

struct NewtonState {
  Vector u;
  Vector phi;
  Vector grad;
};

class BarrierObjective {
 public:
  BarrierObjective(const BarrierProblem& bp, const Vector& x0)
      : qp_(bp.problem()),
        d_(bp.d),
        c_(qp_.F.transpose() * x0),
        b_(qp_.w + qp_.P * x0) {}

  const Vector& c() const { return c_; }
  const Vector& b() const { return b_; }

  Vector phi(const Vector& u) const { return b_ - qp_.G * u; }

  Vector grad(const Vector& u, const Vector& phi, double eta) const {
    return qp_.H * u - c_ + eta * (qp_.G.transpose() * phi.cwiseInverse() + d_);
  }

  // Gradient error from rounding in phi = b - G u: each phi_i carries an
  // absolute error near eps (|b_i| + |g_i||u|), amplified by eta / phi_i^2.
  double noise_floor(const Vector& u, const Vector& phi, double eta) const {
    constexpr double kEps = std::numeric_limits<double>::epsilon();
    const Vector scale = b_.cwiseAbs() + qp_.G.cwiseAbs() * u.cwiseAbs();
    const Vector amp = scale.cwiseQuotient(phi.cwiseAbs2());
    return 64.0 * kEps * eta * (qp_.G.cwiseAbs().transpose() * amp).norm();
  }

  Matrix hess(const Vector& phi, double eta) const {
    const Vector s = phi.cwiseInverse();
    const Matrix SG = s.asDiagonal() * qp_.G;
    return qp_.H + eta * SG.transpose() * SG;
  }

  // f(u + t p) - f(u), computed without cancellation in the log terms.
  double delta(const Vector& u, const Vector& phi, const Vector& p,
               const Vector& Gp, double t, double eta) const {
    double logs = 0.0;
    for (Eigen::Index i = 0; i < phi.size(); ++i) {
      logs += std::log1p(-t * Gp(i) / phi(i));
    }
    const double lin = (qp_.H * u - c_ + eta * d_).dot(p);
    return 0.5 * t * t * p.dot(qp_.H * p) + t * lin - eta * logs;
  }

 private:
  const CondensedQP& qp_;
  const Vector& d_;
  Vector c_;
  Vector b_;
};

// Runs damped Newton at fixed eta. `final_stage` selects the tight gradient
// test; otherwise the stage stops once the scaled decrement is small.
int newton_stage(const BarrierObjective& obj, const CondensedQP& qp,
                 double eta, bool final_stage, const BarrierOptions& opts,
                 NewtonState* st, std::vector<double>* decrements) {
  const double grad_tol = 1e-10 * (1.0 + obj.c().norm());
  int polish = 0;
  for (int it = 0; it < opts.max_newton; ++it) {
    st->phi = obj.phi(st->u);
    st->grad = obj.grad(st->u, st->phi, eta);
    const double gnorm = st->grad.norm();
    const double tol = std::max(grad_tol, obj.noise_floor(st->u, st->phi, eta));
    if (final_stage && gnorm <= tol) {
      // Two extra full steps tighten the iterate for finite-difference use.
      if (polish >= 2) return it;
      ++polish;
    }
    const Matrix Hs = obj.hess(st->phi, eta);
    Eigen::LLT<Matrix> llt(Hs);
    if (llt.info() != Eigen::Success) {
      throw ConvergenceError("solve_barrier: Hessian not positive definite",
                             st->u);
    }
    const Vector p = -llt.solve(st->grad);
    const double lam2 = std::max(-st->grad.dot(p), 0.0);
    if (decrements != nullptr) decrements->push_back(std::sqrt(lam2));
    const double scaled = lam2 / eta;
    if (!final_stage && scaled < 1e-8) return it;
    if (final_stage && scaled < 1e-28) return it;  // decrement floor

    const Vector Gp = qp.G * p;
    double t_max = 1.0;
    for (Eigen::Index i = 0; i < Gp.size(); ++i) {
      if (Gp(i) > 0.0) t_max = std::min(t_max, 0.99 * st->phi(i) / Gp(i));
    }
    double t = t_max;
    if (!(scaled < 0.1 && t_max >= 1.0)) {
      const double slope = st->grad.dot(p);
      int backtracks = 0;
      while (obj.delta(st->u, st->phi, p, Gp, t, eta) >
             opts.armijo * t * slope) {
        t *= opts.shrink;
        if (++backtracks > 60) break;
      }
      if (backtracks > 60) {
        if (final_stage && gnorm <= 1e3 * tol) return it;
        throw ConvergenceError("solve_barrier: line search failed", st->u);
      }
    }
    Vector u_new = st->u + t * p;
    if ((obj.phi(u_new).array() <= 0.0).any()) {
      throw ConvergenceError("solve_barrier: step left the interior", st->u);
    }
    st->u = std::move(u_new);
  }
  st->phi = obj.phi(st->u);
  st->grad = obj.grad(st->u, st->phi, eta);
  if (final_stage &&
      st->grad.norm() <=
          std::max(grad_tol, obj.noise_floor(st->u, st->phi, eta))) {
    return opts.max_newton;
  }
  throw ConvergenceError("solve_barrier: Newton did not converge in " +
                             std::to_string(opts.max_newton) + " iterations",
                         st->u);
}

}  // namespace

BarrierSolution solve_barrier(const BarrierProblem& bp, const Vector& x0,
                              const BarrierOptions& opts) {
  const CondensedQP& qp = bp.problem();
  if (x0.size() != qp.nx) throw DimensionError("solve_barrier: bad x0 size");
  if (!(bp.eta > 0.0)) throw InvalidArgument("solve_barrier: eta must be > 0");
  const BarrierObjective obj(bp, x0);

  NewtonState st;
  double eta_k = bp.eta;
  bool warm = false;
  if (opts.warm_start != nullptr && opts.warm_start->size() == qp.n()) {
    if ((obj.phi(*opts.warm_start).array() > 0.0).all()) {
      st.u = *opts.warm_start;
      warm = true;
    }
  }
  if (!warm) {
    const ChebyshevBall ball = chebyshev_ball(qp.G, obj.b(), 1.0);
    if (!(ball.r > 1e-12)) {
      throw InfeasibleError("solve_barrier: polytope has empty interior");
    }
    st.u = ball.center;
    // Start where the barrier dominates the quadratic, then shrink eta.
    const Vector phi = obj.phi(st.u);
    const Vector gq = qp.H * st.u - obj.c();
    // Rows with g_i = 0 depend on x0 only and carry no distance.
    const Vector gn = row_norms(qp.G);
    const double gmax = qp.m > 0 ? gn.maxCoeff() : 0.0;
    double reach = 0.0;
    for (int i = 0; i < qp.m; ++i) {
      if (gn(i) > 1e-12 * gmax) reach = std::max(reach, phi(i) / gn(i));
    }
    if (!(reach > 0.0)) reach = 1.0;
    eta_k = std::max(bp.eta, 10.0 * gq.norm() * reach + 1e-3);
  }

  BarrierSolution sol;
  for (;;) {
    const bool final_stage = eta_k <= bp.eta;
    std::vector<double>* dec = final_stage ? &sol.decrements : nullptr;
    sol.newton_iters += newton_stage(obj, qp, eta_k, final_stage, opts, &st, dec);
    ++sol.stages;
    if (final_stage) break;
    eta_k = std::max(bp.eta, eta_k * opts.eta_reduction);
  }
  sol.u_eta = st.u;
  sol.phi = obj.phi(st.u);
  sol.grad_norm = obj.grad(st.u, sol.phi, bp.eta).norm();
  if (opts.compute_jacobian) {
    sol.jacobian = barrier_jacobian(bp, sol, &sol.jacobian_condition);
    sol.ill_conditioned = sol.jacobian_condition > 1e14;
  }
  return sol;
}

Matrix barrier_jacobian(const BarrierProblem& bp, const BarrierSolution& sol,
                        double* condition) {
  const CondensedQP& qp = bp.problem();
  if ((sol.phi.array() <= 0.0).any()) {
    throw InvalidArgument("barrier_jacobian: solution not strictly feasible");
  }
  if (qp.m == 0) return qp.K0;
  Matrix M = qp.GHinvGt;
  M.diagonal() += sol.phi.cwiseAbs2() / bp.eta;
  Eigen::LDLT<Matrix> ldlt(M);
  if (condition != nullptr) {
    const Vector D = ldlt.vectorD().cwiseAbs();
    *condition = D.maxCoeff() / std::max(D.minCoeff(), 1e-300);
  }
  return qp.K0 - qp.Hinv * (qp.G.transpose() * ldlt.solve(qp.GHinvFt_minus_P));
}

Matrix barrier_jacobian_implicit(const BarrierProblem& bp,
                                 const BarrierSolution& sol) {
  const CondensedQP& qp = bp.problem();
  const Vector s2 = sol.phi.cwiseInverse().cwiseAbs2() * bp.eta;
  const Matrix GtS = qp.G.transpose() * s2.asDiagonal();
  const Matrix lhs = qp.H + GtS * qp.G;
  const Matrix rhs = qp.F.transpose() + GtS * qp.P;
  return lhs.llt().solve(rhs);
}

ConvexCombination convex_combination(const BarrierProblem& bp,
                                     const BarrierSolution& sol) {
  const CondensedQP& qp = bp.problem();
  if (qp.m > 20) {
    throw EnumerationRefused("convex_combination: m = " +
                             std::to_string(qp.m) + " exceeds 20");
  }
  const int m = qp.m;
  // log of eta^-1 phi_i^2 for every row.
  Vector logdiag(m);
  for (int i = 0; i < m; ++i) {
    logdiag(i) = 2.0 * std::log(sol.phi(i)) - std::log(bp.eta);
  }
  ConvexCombination out;
  std::vector<std::pair<ActiveSet, double>> logs;
  const unsigned long total = 1ul << m;
  for (unsigned long mask = 0; mask < total; ++mask) {
    ActiveSet sigma(m);
    std::vector<int> idx;
    double logw = 0.0;
    for (int i = 0; i < m; ++i) {
      if (mask & (1ul << i)) {
        sigma.set(i, true);
        idx.push_back(i);
      } else {
        logw += logdiag(i);
      }
    }
    if (static_cast<int>(idx.size()) > qp.n()) {
      ++out.singular_sets;
      continue;
    }
    if (!idx.empty()) {
      const Matrix S = qp.GHinvGt(idx, idx);
      if (is_singular_submatrix(S)) {
        ++out.singular_sets;
        continue;
      }
      const double det = S.partialPivLu().determinant();
      if (!(det > 0.0)) {
        ++out.singular_sets;
        continue;
      }
      logw += std::log(det);
    }
    logs.emplace_back(std::move(sigma), logw);
  }
  double mx = -std::numeric_limits<double>::infinity();
  for (const auto& [s, l] : logs) mx = std::max(mx, l);
  double total_w = 0.0;
  for (const auto& [s, l] : logs) total_w += std::exp(l - mx);
  out.log_weight_sum = mx + std::log(total_w);
  out.reconstructed = Matrix::Zero(qp.n(), qp.nx);
  for (auto& [s, l] : logs) {
    const double h = std::exp(l - mx) / total_w;
    out.reconstructed += h * gain_for_sigma(qp, s).K;
    out.weights.emplace_back(s, h);
  }
  return out;
}

double unfolded_norm(const std::vector<Matrix>& slices) {
  if (slices.empty()) return 0.0;
  const Eigen::Index n = slices[0].rows();
  const Eigen::Index nx = slices[0].cols();
  const Eigen::Index k = static_cast<Eigen::Index>(slices.size());
  Matrix U(n, nx * k);
  for (Eigen::Index j = 0; j < k; ++j) {
    U.block(0, j * nx, n, nx) = slices[static_cast<size_t>(j)];
  }
  const Matrix A = U.transpose() * U;
  if (A.norm() == 0.0) return 0.0;
  Vector v = Vector::Ones(A.rows()).normalized();
  double lambda = 0.0;
  for (int it = 0; it < 1000; ++it) {
    Vector Av = A * v;
    const double nv = Av.norm();
    if (nv == 0.0) return 0.0;
    const double next = v.dot(Av);
    v = Av / nv;
    if (std::abs(next - lambda) <= 1e-14 * std::abs(next)) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  // Power iteration can stall on a symmetric start; confirm with SVD.
  return std::max(std::sqrt(std::max(lambda, 0.0)), spectral_norm(U));
}

namespace {

double asymmetry_of(const std::vector<Matrix>& slices) {
  const int nx = static_cast<int>(slices.size());
  double worst = 0.0;
  double scale = 0.0;
  for (const Matrix& s : slices) scale = std::max(scale, s.cwiseAbs().maxCoeff());
  for (int j = 0; j < nx; ++j) {
    for (int k = j + 1; k < nx; ++k) {
      const double diff = (slices[static_cast<size_t>(j)].col(k) -
                           slices[static_cast<size_t>(k)].col(j))
                              .cwiseAbs()
                              .maxCoeff();
      worst = std::max(worst, diff);
    }
  }
  return worst / (1.0 + scale);
}

}  // namespace

HessianTensor barrier_hessian(const BarrierProblem& bp, const Vector& x0,
                              const BarrierSolution* at_x0) {
  const CondensedQP& qp = bp.problem();
  BarrierSolution center;
  if (at_x0 == nullptr) {
    center = solve_barrier(bp, x0);
    at_x0 = &center;
  }
  HessianTensor out;
  double h = 1e-5 * (1.0 + x0.norm());
  for (;;) {
    if (h < 1e-10) {
      throw ConvergenceError("barrier_hessian: step shrank below 1e-10");
    }
    try {
      out.slices.clear();
      for (int j = 0; j < qp.nx; ++j) {
        BarrierOptions o;
        o.warm_start = &at_x0->u_eta;
        Vector xp = x0, xm = x0;
        xp(j) += h;
        xm(j) -= h;
        const BarrierSolution sp = solve_barrier(bp, xp, o);
        const BarrierSolution sm = solve_barrier(bp, xm, o);
        out.slices.push_back((sp.jacobian - sm.jacobian) / (2.0 * h));
      }
      break;
    } catch (const InfeasibleError&) {
      h *= 0.5;
    } catch (const ConvergenceError&) {
      h *= 0.5;
    }
  }
  out.step = h;
  out.norm = unfolded_norm(out.slices);
  out.asymmetry = asymmetry_of(out.slices);
  return out;
}

HessianTensor barrier_hessian_analytic(const BarrierProblem& bp,
                                       const BarrierSolution& sol) {
  const CondensedQP& qp = bp.problem();
  HessianTensor out;
  Matrix J = sol.jacobian.size() ? sol.jacobian : barrier_jacobian(bp, sol);
  Matrix M = qp.GHinvGt;
  M.diagonal() += sol.phi.cwiseAbs2() / bp.eta;
  Eigen::LDLT<Matrix> ldlt(M);
  const Matrix MinvN = ldlt.solve(qp.GHinvFt_minus_P);
  const Matrix dphi = qp.P - qp.G * J;  // m x nx
  for (int j = 0; j < qp.nx; ++j) {
    const Vector dM = (2.0 / bp.eta) * sol.phi.cwiseProduct(dphi.col(j));
    const Matrix inner = ldlt.solve(dM.asDiagonal() * MinvN);
    out.slices.push_back(qp.Hinv * (qp.G.transpose() * inner));
  }
  out.norm = unfolded_norm(out.slices);
  out.asymmetry = asymmetry_of(out.slices);
  return out;
}

Vector pi_barrier(const BarrierProblem& bp, const Vector& x) {
  BarrierOptions o;
  o.compute_jacobian = false;
  return solve_barrier(bp, x, o).u_eta.head(bp.problem().nu);
}

}  // namespace smoothmpc

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

#include "smoothmpc/mpc_core.hpp"

#include <cmath>
#include <string>

#include "smoothmpc/linalg.hpp"
#include "smoothmpc/lp.hpp"

namespace smoothmpc {

void LinearSystem::validate() const {
  if (A.rows() == 0 || A.rows() != A.cols()) {
    throw DimensionError("LinearSystem: A must be square and nonempty");
  }
  if (B.rows() != A.rows() || B.cols() == 0) {
    throw DimensionError("LinearSystem: B must have nx rows and nu >= 1 cols");
  }
  if (!A.allFinite() || !B.allFinite()) {
    throw InvalidArgument("LinearSystem: non-finite entries");
  }
}

StageCost StageCost::constant(const Matrix& Q, const Matrix& R, int T) {
  StageCost c;
  c.T = T;
  c.Q.assign(static_cast<size_t>(std::max(T, 0)), Q);
  c.R.assign(static_cast<size_t>(std::max(T, 0)), R);
  return c;
}

void StageCost::validate(int nx, int nu) const {
  if (T < 1) throw InvalidArgument("StageCost: horizon T must be >= 1");
  if (static_cast<int>(Q.size()) != T || static_cast<int>(R.size()) != T) {
    throw DimensionError("StageCost: need T matrices Q and T matrices R");
  }
  for (int t = 0; t < T; ++t) {
    if (Q[t].rows() != nx || Q[t].cols() != nx) {
      throw DimensionError("StageCost: Q has wrong shape");
    }
    if (R[t].rows() != nu || R[t].cols() != nu) {
      throw DimensionError("StageCost: R has wrong shape");
    }
    if (!is_positive_definite(Q[t])) {
      throw InvalidArgument("StageCost: Q[" + std::to_string(t) +
                            "] not symmetric positive definite");
    }
    if (!is_positive_definite(R[t])) {
      throw InvalidArgument("StageCost: R[" + std::to_string(t) +
                            "] not symmetric positive definite");
    }
  }
}

namespace {

void append_box_rows(const Vector& bound, Matrix* A, Vector* b) {
  const int n = static_cast<int>(bound.size());
  int rows = 0;
  for (int i = 0; i < n; ++i) {
    if (bound(i) > 0 && std::isfinite(bound(i))) rows += 2;
  }
  A->setZero(rows, n);
  b->setZero(rows);
  int r = 0;
  for (int i = 0; i < n; ++i) {
    if (!(bound(i) > 0 && std::isfinite(bound(i)))) continue;
    (*A)(r, i) = 1.0;
    (*b)(r) = bound(i);
    (*A)(r + 1, i) = -1.0;
    (*b)(r + 1) = bound(i);
    r += 2;
  }
}

void validate_polytope(const Matrix& A, const Vector& b, int dim,
                       const char* name) {
  const std::string tag(name);
  if (A.cols() != dim && A.rows() > 0) {
    throw DimensionError(tag + ": wrong column count");
  }
  if (A.rows() != b.size()) throw DimensionError(tag + ": rows != len(b)");
  if (!A.allFinite() || !b.allFinite()) {
    throw InvalidArgument(tag + ": non-finite entries");
  }
  for (Eigen::Index i = 0; i < b.size(); ++i) {
    if (!(b(i) > 0)) {
      throw OriginNotInteriorError(tag + ": b must be > 0 (origin interior)");
    }
  }
}

}  // namespace

BoxlikeConstraints BoxlikeConstraints::box(const Vector& x_bound,
                                           const Vector& u_bound) {
  BoxlikeConstraints c;
  append_box_rows(x_bound, &c.Ax, &c.bx);
  append_box_rows(u_bound, &c.Au, &c.bu);
  if (c.Ax.rows() == 0) c.Ax.setZero(0, x_bound.size());
  if (c.Au.rows() == 0) c.Au.setZero(0, u_bound.size());
  return c;
}

void BoxlikeConstraints::validate(int nx, int nu) const {
  validate_polytope(Ax, bx, nx, "state constraints");
  validate_polytope(Au, bu, nu, "input constraints");
}

void CondensedQP::finalize() {
  if (!is_positive_definite(H)) {
    throw InvalidArgument("CondensedQP: H not symmetric positive definite");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(H, Eigen::EigenvaluesOnly);
  alpha1 = es.eigenvalues()(0);
  alpha2 = es.eigenvalues()(es.eigenvalues().size() - 1);
  Hinv = H.llt().solve(Matrix::Identity(H.rows(), H.cols()));
  Hinv = 0.5 * (Hinv + Hinv.transpose());
  const Matrix GHinv = G * Hinv;
  GHinvGt = GHinv * G.transpose();
  GHinvGt = 0.5 * (GHinvGt + GHinvGt.transpose());
  GHinvFt_minus_P = GHinv * F.transpose() - P;
  K0 = Hinv * F.transpose();
}

StackedMaps stacked_maps(const LinearSystem& sys, int T) {
  sys.validate();
  if (T < 1) throw InvalidArgument("stacked_maps: T must be >= 1");
  const int nx = sys.nx();
  const int nu = sys.nu();
  StackedMaps s;
  s.Ahat.setZero(T * nx, nx);
  s.Bhat.setZero(T * nx, T * nu);
  // powers[k] = A^k
  std::vector<Matrix> powers(static_cast<size_t>(T) + 1);
  powers[0] = Matrix::Identity(nx, nx);
  for (int k = 1; k <= T; ++k) powers[k] = sys.A * powers[k - 1];
  for (int i = 0; i < T; ++i) {
    s.Ahat.block(i * nx, 0, nx, nx) = powers[i + 1];
    for (int j = 0; j <= i; ++j) {
      s.Bhat.block(i * nx, j * nu, nx, nu) = powers[i - j] * sys.B;
    }
  }
  return s;
}

CondensedQP build_condensed(const LinearSystem& sys, const StageCost& cost,
                            const BoxlikeConstraints& cons,
                            CostScaling scaling) {
  sys.validate();
  const int nx = sys.nx();
  const int nu = sys.nu();
  cost.validate(nx, nu);
  cons.validate(nx, nu);
  const int T = cost.T;
  const StackedMaps s = stacked_maps(sys, T);

  Matrix Qbar = Matrix::Zero(T * nx, T * nx);
  Matrix Rbar = Matrix::Zero(T * nu, T * nu);
  for (int t = 0; t < T; ++t) {
    Qbar.block(t * nx, t * nx, nx, nx) = cost.Q[t];
    Rbar.block(t * nu, t * nu, nu, nu) = cost.R[t];
  }

  CondensedQP qp;
  qp.T = T;
  qp.nx = nx;
  qp.nu = nu;
  const Matrix QB = Qbar * s.Bhat;
  const double h_factor = scaling == CostScaling::kConsistent ? 2.0 : 1.0;
  qp.H = h_factor * (Rbar + s.Bhat.transpose() * QB);
  qp.H = 0.5 * (qp.H + qp.H.transpose());
  qp.F = -2.0 * s.Ahat.transpose() * QB;

  const int ku = cons.ku();
  const int kx = cons.kx();
  qp.m = T * ku + T * kx;
  qp.G.setZero(qp.m, T * nu);
  qp.P.setZero(qp.m, nx);
  qp.w.setZero(qp.m);
  for (int t = 0; t < T; ++t) {
    qp.G.block(t * ku, t * nu, ku, nu) = cons.Au;
    qp.w.segment(t * ku, ku) = cons.bu;
  }
  const int off = T * ku;
  for (int t = 0; t < T; ++t) {
    qp.G.block(off + t * kx, 0, kx, T * nu) =
        cons.Ax * s.Bhat.block(t * nx, 0, nx, T * nu);
    qp.P.block(off + t * kx, 0, kx, nx) =
        -cons.Ax * s.Ahat.block(t * nx, 0, nx, nx);
    qp.w.segment(off + t * kx, kx) = cons.bx;
  }
  qp.finalize();
  return qp;
}

Vector residuals(const CondensedQP& qp, const Vector& x0, const Vector& u) {
  return qp.P * x0 + qp.w - qp.G * u;
}

Vector rollout_states(const LinearSystem& sys, const Vector& x0,
                      const Vector& u, int T) {
  const int nx = sys.nx();
  const int nu = sys.nu();
  if (u.size() != T * nu || x0.size() != nx) {
    throw DimensionError("rollout_states: shape mismatch");
  }
  Vector xs(T * nx);
  Vector x = x0;
  for (int t = 0; t < T; ++t) {
    x = sys.A * x + sys.B * u.segment(t * nu, nu);
    xs.segment(t * nx, nx) = x;
  }
  return xs;
}

double original_cost(const LinearSystem& sys, const StageCost& cost,
                     const Vector& x0, const Vector& u) {
  const int nx = sys.nx();
  const int nu = sys.nu();
  const Vector xs = rollout_states(sys, x0, u, cost.T);
  double v = 0.0;
  for (int t = 0; t < cost.T; ++t) {
    const Vector xt = xs.segment(t * nx, nx);
    const Vector ut = u.segment(t * nu, nu);
    v += xt.dot(cost.Q[t] * xt) + ut.dot(cost.R[t] * ut);
  }
  return v;
}

double condensed_cost(const CondensedQP& qp, const Vector& x0,
                      const Vector& u) {
  return 0.5 * u.dot(qp.H * u) - x0.dot(qp.F * u);
}

ChebyshevBall chebyshev_ball(const Matrix& A, const Vector& b,
                             double r_cap) {
  const int p = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  if (b.size() != p) throw DimensionError("chebyshev_ball: shape mismatch");
  const bool capped = r_cap > 0.0;
  // LP over (c, r) with r free: r* < 0 means the polytope is empty.
  Matrix Ac = Matrix::Zero(p + (capped ? 1 : 0), n + 1);
  Vector bc(Ac.rows());
  Ac.topLeftCorner(p, n) = A;
  Ac.block(0, n, p, 1) = A.rowwise().norm();
  bc.head(p) = b;
  if (capped) {
    Ac(p, n) = 1.0;
    bc(p) = r_cap;
  }
  Vector cc = Vector::Zero(n + 1);
  cc(n) = 1.0;
  const InequalityLPResult cheb = solve_inequality_lp(Ac, bc, cc);
  if (cheb.status == LPStatus::kUnbounded) {
    throw UnboundedError("chebyshev_ball: polytope is unbounded");
  }
  if (cheb.status != LPStatus::kOptimal) {
    throw InfeasibleError("chebyshev_ball: LP failed",
                          farkas_certificate(A, b));
  }
  const double r = cheb.z(n);
  const double scale = 1.0 + (p > 0 ? b.cwiseAbs().maxCoeff() : 0.0);
  if (r < -1e-10 * scale) {
    throw InfeasibleError("chebyshev_ball: polytope is empty",
                          farkas_certificate(A, b));
  }
  ChebyshevBall ball;
  ball.center = cheb.z.head(n);
  ball.r = std::max(r, 0.0);
  return ball;
}

FeasibleRadii polytope_radii(const Matrix& A, const Vector& b) {
  const int n = static_cast<int>(A.cols());
  if (b.size() != A.rows()) {
    throw DimensionError("polytope_radii: shape mismatch");
  }
  const ChebyshevBall ball = chebyshev_ball(A, b);
  FeasibleRadii out;
  out.r = ball.r;
  out.center = ball.center;
  double sq = 0.0;
  for (int j = 0; j < n; ++j) {
    double extent = 0.0;
    for (double sgn : {1.0, -1.0}) {
      Vector c = Vector::Zero(n);
      c(j) = sgn;
      const InequalityLPResult sup = solve_inequality_lp(A, b, c);
      if (sup.status == LPStatus::kUnbounded) {
        throw UnboundedError("polytope_radii: polytope is unbounded");
      }
      if (sup.status != LPStatus::kOptimal) {
        throw InfeasibleError("polytope_radii: support LP failed",
                              farkas_certificate(A, b));
      }
      extent = std::max(extent, std::abs(sup.objective));
    }
    sq += extent * extent;
  }
  out.R = std::sqrt(sq);
  return out;
}

FeasibleRadii feasible_radii(const CondensedQP& qp, const Vector& x0) {
  if (x0.size() != qp.nx) throw DimensionError("feasible_radii: bad x0");
  return polytope_radii(qp.G, qp.w + qp.P * x0);
}

}  // namespace smoothmpc

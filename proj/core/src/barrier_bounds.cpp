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

#include "smoothmpc/barrier_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "smoothmpc/linalg.hpp"
#include "smoothmpc/matrix_analysis.hpp"

namespace smoothmpc {

BoundReport BoundReport::make(std::string name, double lhs, double rhs) {
  BoundReport r;
  r.name = std::move(name);
  r.lhs = lhs;
  r.rhs = rhs;
  const double scale = 1.0 + std::max(std::abs(lhs), std::abs(rhs));
  r.satisfied = std::isfinite(lhs) && !std::isnan(rhs) &&
                lhs <= rhs + 1e-10 * scale;
  return r;
}

double sc_parameter(int m, double R, const Vector& d) {
  if (m < 0) throw InvalidArgument("sc_parameter: m < 0");
  if (!(R >= 0.0)) throw InvalidArgument("sc_parameter: R < 0");
  return 20.0 * (static_cast<double>(m) + R * R * d.squaredNorm());
}

double error_upper(double eta, double nu, double alpha1) {
  if (!(alpha1 > 0.0)) throw InvalidArgument("error_upper: alpha1 <= 0");
  if (eta < 0.0 || nu < 0.0) throw InvalidArgument("error_upper: negative");
  return std::sqrt(2.0 * eta * nu / alpha1);
}

double error_upper(const BarrierProblem& bp) {
  return error_upper(bp.eta, bp.nu, bp.problem().alpha1);
}

double h_norm(const Matrix& H, const Vector& v) {
  return std::sqrt(std::max(v.dot(H * v), 0.0));
}

DirectionalBounds directional_bounds(const CondensedQP& qp, double eta,
                                     const Vector& x0, const Vector& u_star,
                                     double r, double R) {
  DirectionalBounds out;
  const Vector diff = u_star - qp.K0 * x0;
  const Vector Hd = qp.H * diff;
  const double hn = Hd.norm();
  out.s = h_norm(qp.H, diff);
  // Below this level H(u* - K0 x0) is rounding noise of the QP solve.
  if (!(hn > 1e-9 * (1.0 + (qp.F.transpose() * x0).norm()))) return out;
  out.applicable = true;
  out.a = Hd / hn;
  const double m = static_cast<double>(qp.m);
  const double a1 = qp.alpha1;
  const double a2 = qp.alpha2;
  const double s = out.s;
  out.upper = (std::sqrt(4.0 * m * eta + s * s) - s) / (2.0 * std::sqrt(a1));
  const double first = (std::sqrt(eta + s * s) - s) / std::sqrt(m * a2);
  const double second = std::sqrt(a1 / a2) * r / (2.0 * m + 4.0 * std::sqrt(m));
  out.lower = std::sqrt(a1 / a2) * (r / R) * std::min(first, second);
  return out;
}

double residual_lower_bound(const BarrierProblem& bp, const Vector& x0,
                            const Vector& u_star, double r, double R) {
  const CondensedQP& qp = bp.problem();
  const double s = h_norm(qp.H, u_star - qp.K0 * x0);
  const double lmin = qp.alpha1;
  const double lmax = qp.alpha2;
  const double nu = bp.nu;
  const double first =
      (std::sqrt(bp.eta + s * s) - s) / std::sqrt(nu * lmin);
  const double second = r / (2.0 * nu + 4.0 * std::sqrt(nu));
  return (lmin / lmax) * (r / R) * std::min(first, second);
}

double first_residual_lower_bound(double eta, double nu, double r, double R,
                                  double L) {
  const double denom = 150.0 * (nu * eta * eta + R * R * (L * L + 1.0));
  return std::min(0.5 * eta, r * eta * eta / denom);
}

double quadratic_lipschitz(const BarrierProblem& bp, const Vector& x0,
                           double R) {
  const CondensedQP& qp = bp.problem();
  return spectral_norm(qp.H) * R + (qp.F.transpose() * x0).norm() +
         bp.eta * bp.d.norm();
}

namespace {

void accumulate_piece(const CondensedQP& qp, const std::vector<int>& idx,
                      PieceConstants* pc) {
  if (idx.empty()) {
    pc->L = std::max(pc->L, spectral_norm(qp.K0));
    ++pc->sets;
    return;
  }
  if (static_cast<int>(idx.size()) > qp.n()) return;
  const Matrix S = qp.GHinvGt(idx, idx);
  if (is_singular_submatrix(S)) return;
  const Matrix Sinv = S.partialPivLu().inverse();
  const Matrix Gs = qp.G(idx, Eigen::all);
  const Matrix HGS = qp.Hinv * Gs.transpose() * Sinv;
  pc->C = std::max(pc->C, 2.0 * spectral_norm(HGS));
  const Matrix K = qp.K0 - HGS * qp.GHinvFt_minus_P(idx, Eigen::all);
  pc->L = std::max(pc->L, spectral_norm(K));
  ++pc->sets;
}

}  // namespace

PieceConstants piece_constants_enumerated(const CondensedQP& qp) {
  if (qp.m > 20) {
    throw EnumerationRefused("piece_constants_enumerated: m = " +
                             std::to_string(qp.m) + " exceeds 20");
  }
  PieceConstants pc;
  const unsigned long total = 1ul << qp.m;
  std::vector<int> idx;
  for (unsigned long mask = 0; mask < total; ++mask) {
    idx.clear();
    for (int i = 0; i < qp.m; ++i) {
      if (mask & (1ul << i)) idx.push_back(i);
    }
    accumulate_piece(qp, idx, &pc);
  }
  return pc;
}

PieceConstants piece_constants_over(const CondensedQP& qp,
                                    const std::vector<ActiveSet>& sets) {
  PieceConstants pc;
  accumulate_piece(qp, {}, &pc);
  for (const ActiveSet& s : sets) {
    if (s.size() != qp.m) {
      throw DimensionError("piece_constants_over: active set size mismatch");
    }
    accumulate_piece(qp, s.indices(), &pc);
  }
  return pc;
}

double hessian_upper_bound(const CondensedQP& qp, double res, double C,
                           double L) {
  if (!(res > 0.0)) return std::numeric_limits<double>::infinity();
  const double t = spectral_norm(qp.P) + spectral_norm(qp.G) * L;
  return C / res * t * t;
}

namespace {

// Wraps a generic quadratic over {Ax <= b} as a condensed QP with x0 = v:
// 1/2 x'Hx - v'Hx equals 1/2 (x-v)'H(x-v) up to a constant.
CondensedQP generic_qp(const Matrix& A, const Vector& b, const Matrix& H) {
  CondensedQP qp;
  qp.H = H;
  qp.F = H;
  qp.G = A;
  qp.w = b;
  qp.P = Matrix::Zero(A.rows(), H.rows());
  qp.m = static_cast<int>(A.rows());
  qp.T = 1;
  qp.nx = static_cast<int>(H.rows());
  qp.nu = static_cast<int>(H.rows());
  qp.finalize();
  return qp;
}

}  // namespace

Vector log_barrier_minimizer(const Matrix& A, const Vector& b,
                             const Matrix& H, const Vector& v, double eta) {
  BarrierProblem bp;
  bp.qp = std::make_shared<const CondensedQP>(generic_qp(A, b, H));
  bp.eta = eta;
  bp.d = Vector::Zero(H.rows());
  bp.nu = static_cast<double>(A.rows());
  BarrierOptions o;
  o.compute_jacobian = false;
  return solve_barrier(bp, v, o).u_eta;
}

QuadOptReport quad_opt_bounds(const Matrix& A, const Vector& b,
                              const Matrix& H, const Vector& v, double eta) {
  const CondensedQP qp = generic_qp(A, b, H);
  QuadOptReport rep;
  rep.x_star = solve_qp(qp, v).u_star;
  rep.x_eta = log_barrier_minimizer(A, b, H, v, eta);

  const ChebyshevBall ball = chebyshev_ball(A, b);
  const double R = polytope_radii(A, b - A * ball.center).R;
  const double r = ball.r;
  const double nu = static_cast<double>(A.rows());
  const double m = qp.alpha1;
  const double M = qp.alpha2;
  const Vector diff = rep.x_eta - rep.x_star;
  const double s = h_norm(H, rep.x_star - v);

  rep.item_i = BoundReport::make("quad_error", diff.norm(),
                                 std::sqrt(eta * nu / m));

  const Vector grad = H * (rep.x_star - v);
  const double gn = grad.norm();
  const bool applicable = gn > 1e-10 * (1.0 + (H * v).norm());
  const double proj = applicable ? grad.dot(diff) / gn : 0.0;
  rep.item_ii_lower = BoundReport::make("quad_directional_lower", -proj, 0.0);
  rep.item_ii_upper = BoundReport::make(
      "quad_directional_upper", proj,
      (std::sqrt(4.0 * eta * nu + s * s) - s) / (2.0 * std::sqrt(m)));
  rep.item_ii_lower.applicable = applicable;
  rep.item_ii_upper.applicable = applicable;
  if (!applicable) {
    rep.item_ii_lower.satisfied = true;
    rep.item_ii_upper.satisfied = true;
  }

  const double first = (std::sqrt(eta + s * s) - s) / std::sqrt(nu * M);
  const double second =
      std::sqrt(m / M) * r / (2.0 * nu + 4.0 * std::sqrt(nu));
  const double radius = std::sqrt(m / M) * (r / R) * std::min(first, second);
  double dist = std::numeric_limits<double>::infinity();
  const Vector slack = b - A * rep.x_eta;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    const double an = A.row(i).norm();
    if (an > 0.0) dist = std::min(dist, slack(i) / an);
  }
  rep.item_iii = BoundReport::make("quad_inner_ball", radius, dist);

  for (BoundReport* br : {&rep.item_i, &rep.item_ii_lower, &rep.item_ii_upper,
                          &rep.item_iii}) {
    br->context = {{"eta", eta}, {"nu", nu}, {"r", r}, {"R", R},
                   {"m", m}, {"M", M}, {"s", s}};
  }
  return rep;
}

SelfConcordantBarrier1D SelfConcordantBarrier1D::log_interval(double r) {
  if (!(r > 0.0)) throw InvalidArgument("log_interval: r <= 0");
  SelfConcordantBarrier1D b;
  b.r = r;
  b.nu = 2.0;
  b.value = [r](double x) { return -std::log(x) - std::log(r - x); };
  b.derivative = [r](double x) { return -1.0 / x + 1.0 / (r - x); };
  return b;
}

SelfConcordantBarrier1D SelfConcordantBarrier1D::log_left(double r) {
  if (!(r > 0.0)) throw InvalidArgument("log_left: r <= 0");
  SelfConcordantBarrier1D b;
  b.r = r;
  b.nu = 1.0;
  b.value = [](double x) { return -std::log(x); };
  b.derivative = [](double x) { return -1.0 / x; };
  return b;
}

double golden_section(const std::function<double(double)>& f, double lo,
                      double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol * (1.0 + std::abs(a) + std::abs(b)) * 0.5 &&
         b - a > std::numeric_limits<double>::min()) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
    if (c <= a || d >= b || c >= d) break;
  }
  return 0.5 * (a + b);
}

OneDGap one_d_gap_oracle(const SelfConcordantBarrier1D& barrier, double m,
                         double M, double v, double eta,
                         const std::function<double(double)>& q) {
  if (!(m > 0.0) || M < m) throw InvalidArgument("one_d_gap_oracle: bad m, M");
  if (!(eta > 0.0)) throw InvalidArgument("one_d_gap_oracle: eta <= 0");
  const std::function<double(double)> quad =
      q ? q : [m, v](double x) { return 0.5 * m * (x - v) * (x - v); };
  const double r = barrier.r;
  const auto f = [&](double x) { return quad(x) + eta * barrier.value(x); };
  // Bisect on the derivative when the objective is the default quadratic;
  // golden section covers user-supplied q.
  OneDGap out;
  if (!q) {
    double lo = 0.0;
    double hi = r;
    for (int it = 0; it < 200 && hi - lo > 1e-16 * r; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double g = m * (mid - v) + eta * barrier.derivative(mid);
      (g > 0.0 ? hi : lo) = mid;
    }
    out.x_eta = 0.5 * (lo + hi);
  } else {
    out.x_eta = golden_section(f, 0.0, r, 1e-12);
  }
  const double nu = barrier.nu;
  out.upper = 0.5 * (std::sqrt(4.0 * eta * nu / m + v * v) + v);
  out.lower = std::min(0.5 * (std::sqrt(2.0 * eta / M + v * v) + v),
                       m * r / (M * (2.0 * nu + 4.0 * std::sqrt(nu))));
  const double slack = 1e-10 * (1.0 + std::abs(out.x_eta));
  out.satisfied =
      out.lower <= out.x_eta + slack && out.x_eta <= out.upper + slack;
  return out;
}

BarrierAxiomReport barrier_axioms_check(const Matrix& A, const Vector& b,
                                        int pairs, unsigned seed) {
  const int n = static_cast<int>(A.cols());
  const int k = static_cast<int>(A.rows());
  const FeasibleRadii radii = polytope_radii(A, b);
  BarrierAxiomReport rep;
  rep.nu = static_cast<double>(k);
  rep.hessian_floor = 1.0 / (9.0 * radii.R * radii.R);
  rep.min_hessian_eig = std::numeric_limits<double>::infinity();
  rep.max_inner_product = -std::numeric_limits<double>::infinity();

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> box(-radii.R, radii.R);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto sample_interior = [&]() {
    for (;;) {
      Vector x(n);
      for (int j = 0; j < n; ++j) x(j) = box(rng);
      if (((b - A * x).array() > 0.0).all()) return x;
    }
  };
  // Largest t with A(x + t dir) <= b.
  const auto reach = [&](const Vector& x, const Vector& dir) {
    const Vector Ad = A * dir;
    const Vector s = b - A * x;
    double t = std::numeric_limits<double>::infinity();
    for (int i = 0; i < k; ++i) {
      if (Ad(i) > 0.0) t = std::min(t, s(i) / Ad(i));
    }
    return t;
  };

  for (int p = 0; p < pairs; ++p) {
    Vector x = sample_interior();
    // Every fourth pair pushes x toward a facet.
    if (p % 4 == 3) {
      Vector dir(n);
      for (int j = 0; j < n; ++j) dir(j) = normal(rng);
      x += (1.0 - 1e-6) * reach(x, dir) * dir;
    }
    Vector dir(n);
    for (int j = 0; j < n; ++j) dir(j) = normal(rng);
    const double t = reach(x, dir);
    const Vector y = x + (unit(rng) < 0.5 ? t : unit(rng) * t) * dir;

    const Vector s = (b - A * x).cwiseInverse();
    const Vector grad = A.transpose() * s;
    const Matrix SA = s.asDiagonal() * A;
    const Matrix hess = SA.transpose() * SA;
    rep.max_inner_product = std::max(rep.max_inner_product, grad.dot(y - x));
    rep.min_hessian_eig = std::min(rep.min_hessian_eig, min_eigenvalue(hess));
    ++rep.pairs;
  }
  rep.satisfied = rep.max_inner_product <= rep.nu * (1.0 + 1e-10) &&
                  rep.min_hessian_eig >= rep.hessian_floor * (1.0 - 1e-10);
  return rep;
}

}  // namespace smoothmpc

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

#include "smoothmpc/lp.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace smoothmpc {
namespace {

class Tableau {
 public:
  // Columns: q structural, p artificial, 1 rhs. Last row holds reduced costs.
  Tableau(const Matrix& A, const Vector& b)
      : p_(static_cast<int>(A.rows())),
        q_(static_cast<int>(A.cols())),
        t_(Matrix::Zero(p_ + 1, q_ + p_ + 1)),
        sign_(Vector::Ones(p_)),
        basis_(p_) {
    for (int i = 0; i < p_; ++i) {
      if (b(i) < 0) sign_(i) = -1.0;
      t_.row(i).head(q_) = sign_(i) * A.row(i);
      t_(i, q_ + i) = 1.0;
      t_(i, rhs()) = sign_(i) * b(i);
      basis_[i] = q_ + i;
    }
  }

  int rhs() const { return q_ + p_; }

  void pivot(int r, int j) {
    t_.row(r) /= t_(r, j);
    for (int i = 0; i <= p_; ++i) {
      if (i == r) continue;
      const double f = t_(i, j);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    basis_[r] = j;
    ++pivots_;
  }

  // Runs simplex on the current objective row. Columns >= limit never enter.
  // Returns false if unbounded.
  bool iterate(int limit, double tol) {
    const int max_pivots = 50000;
    while (pivots_ < max_pivots) {
      int enter = -1;
      for (int j = 0; j < limit; ++j) {
        if (t_(p_, j) < -tol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < p_; ++i) {
        const double a = t_(i, enter);
        if (a > tol) {
          const double ratio = t_(i, rhs()) / a;
          if (ratio < best - 1e-14 ||
              (std::abs(ratio - best) <= 1e-14 && leave >= 0 &&
               basis_[i] < basis_[leave])) {
            best = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
    throw ConvergenceError("simplex pivot limit reached");
  }

  void set_phase1_objective() {
    t_.row(p_).setZero();
    for (int i = 0; i < p_; ++i) {
      t_.row(p_).head(q_) -= t_.row(i).head(q_);
      t_(p_, rhs()) -= t_(i, rhs());
    }
  }

  void set_objective(const Vector& c) {
    t_.row(p_).setZero();
    t_.row(p_).head(q_) = c.transpose();
    for (int i = 0; i < p_; ++i) {
      const int j = basis_[i];
      const double cb = j < q_ ? c(j) : 0.0;
      if (cb != 0.0) t_.row(p_) -= cb * t_.row(i);
    }
  }

  // Pivots artificial basics out where possible.
  void expel_artificials(double tol) {
    for (int i = 0; i < p_; ++i) {
      if (basis_[i] < q_) continue;
      for (int j = 0; j < q_; ++j) {
        if (std::abs(t_(i, j)) > tol) {
          pivot(i, j);
          break;
        }
      }
    }
  }

  double phase1_value() const { return -t_(p_, rhs()); }

  Vector primal() const {
    Vector x = Vector::Zero(q_);
    for (int i = 0; i < p_; ++i) {
      if (basis_[i] < q_) x(basis_[i]) = t_(i, rhs());
    }
    return x;
  }

  // y = B^-T c_B, recovered from the artificial columns which hold B^-1.
  Vector duals(const Vector& c) const {
    Vector cb = Vector::Zero(p_);
    for (int i = 0; i < p_; ++i) {
      if (basis_[i] < q_) cb(i) = c(basis_[i]);
    }
    const Matrix binv = t_.block(0, q_, p_, p_);
    Vector y = binv.transpose() * cb;
    return y.cwiseProduct(sign_);
  }

  int pivots() const { return pivots_; }

 private:
  int p_;
  int q_;
  Matrix t_;
  Vector sign_;
  std::vector<int> basis_;
  int pivots_ = 0;
};

}  // namespace

StandardLPResult solve_standard_lp(const Matrix& A, const Vector& b,
                                   const Vector& c, double tol) {
  if (A.rows() != b.size() || A.cols() != c.size()) {
    throw DimensionError("solve_standard_lp: shape mismatch");
  }
  StandardLPResult res;
  const int q = static_cast<int>(A.cols());
  Tableau tab(A, b);
  tab.set_phase1_objective();
  tab.iterate(q, tol);
  const double scale = 1.0 + b.cwiseAbs().sum();
  if (tab.phase1_value() > 1e-9 * scale) {
    res.status = LPStatus::kInfeasible;
    res.pivots = tab.pivots();
    return res;
  }
  tab.expel_artificials(1e-9);
  tab.set_objective(c);
  if (!tab.iterate(q, tol)) {
    res.status = LPStatus::kUnbounded;
    res.pivots = tab.pivots();
    return res;
  }
  res.status = LPStatus::kOptimal;
  res.x = tab.primal();
  res.y = tab.duals(c);
  res.objective = c.dot(res.x);
  res.pivots = tab.pivots();
  return res;
}

InequalityLPResult solve_inequality_lp(const Matrix& A, const Vector& b,
                                       const Vector& c, double tol) {
  if (A.rows() != b.size() || A.cols() != c.size()) {
    throw DimensionError("solve_inequality_lp: shape mismatch");
  }
  const int p = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  // z = z+ - z-, slack s: [A, -A, I][z+; z-; s] = b, minimize -c'z.
  Matrix S(p, 2 * n + p);
  S << A, -A, Matrix::Identity(p, p);
  Vector cost = Vector::Zero(2 * n + p);
  cost.head(n) = -c;
  cost.segment(n, n) = c;
  const StandardLPResult sr = solve_standard_lp(S, b, cost, tol);

  InequalityLPResult res;
  res.status = sr.status;
  if (sr.status == LPStatus::kInfeasible) {
    res.certificate = farkas_certificate(A, b, tol);
    return res;
  }
  if (sr.status == LPStatus::kUnbounded) return res;
  res.z = sr.x.head(n) - sr.x.segment(n, n);
  // Multipliers of A z <= b for the max problem are -y.
  res.lambda = (-sr.y).cwiseMax(0.0);
  res.objective = c.dot(res.z);
  return res;
}

Vector farkas_certificate(const Matrix& A, const Vector& b, double tol) {
  const int p = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  Matrix E(n + 1, p);
  E.topRows(n) = A.transpose();
  E.row(n) = b.transpose();
  Vector rhs = Vector::Zero(n + 1);
  rhs(n) = -1.0;
  const StandardLPResult sr = solve_standard_lp(E, rhs, Vector::Zero(p), tol);
  if (sr.status != LPStatus::kOptimal) return Vector();
  return sr.x;
}

}  // namespace smoothmpc

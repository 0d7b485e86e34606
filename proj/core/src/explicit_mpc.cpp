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

#include "smoothmpc/explicit_mpc.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include "smoothmpc/linalg.hpp"
#include "smoothmpc/lp.hpp"
#include "smoothmpc/parallel.hpp"

namespace smoothmpc {

ActiveSet ActiveSet::from_indices(int m, const std::vector<int>& idx) {
  ActiveSet s(m);
  for (int i : idx) {
    if (i < 0 || i >= m) throw InvalidArgument("ActiveSet: index out of range");
    s.set(i, true);
  }
  return s;
}

ActiveSet ActiveSet::from_string(const std::string& str) {
  ActiveSet s(static_cast<int>(str.size()));
  for (size_t i = 0; i < str.size(); ++i) {
    if (str[i] != '0' && str[i] != '1') {
      throw InvalidArgument("ActiveSet: expected only '0' and '1'");
    }
    s.set(static_cast<int>(i), str[i] == '1');
  }
  return s;
}

int ActiveSet::popcount() const {
  return static_cast<int>(std::count(bits_.begin(), bits_.end(), 1));
}

std::vector<int> ActiveSet::indices() const {
  std::vector<int> idx;
  for (size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i]) idx.push_back(static_cast<int>(i));
  }
  return idx;
}

std::string ActiveSet::to_string() const {
  std::string s(bits_.size(), '0');
  for (size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i]) s[i] = '1';
  }
  return s;
}

bool is_singular_submatrix(const Matrix& sub) {
  if (sub.rows() == 0) return false;
  const double det = sub.partialPivLu().determinant();
  const double scale = sub.rowwise().norm().prod();
  return !(std::abs(det) > 1e-12 * scale);
}

namespace {

void fill_solution(const CondensedQP& qp, const Vector& x0, const Vector& u,
                   const std::vector<int>& work, const Vector& lam,
                   double active_tol, QPSolution* out) {
  out->u_star = u;
  out->working_set = ActiveSet::from_indices(qp.m, work);
  out->multipliers = Vector::Zero(qp.m);
  for (size_t j = 0; j < work.size(); ++j) {
    out->multipliers(work[j]) = lam(static_cast<Eigen::Index>(j));
  }
  const Vector phi = residuals(qp, x0, u);
  out->sigma = ActiveSet(qp.m);
  for (int i = 0; i < qp.m; ++i) {
    if (phi(i) <= active_tol * (1.0 + std::abs(qp.w(i)))) out->sigma.set(i, true);
  }
  out->objective = condensed_cost(qp, x0, u);
}

// Equality-constrained minimizer on the working set: returns false if the
// block is singular.
bool eqp(const CondensedQP& qp, const Vector& x0, const std::vector<int>& work,
         Vector* u, Vector* lam) {
  const Vector Ftx = qp.F.transpose() * x0;
  if (work.empty()) {
    *u = qp.Hinv * Ftx;
    lam->resize(0);
    return true;
  }
  const Matrix S = qp.GHinvGt(work, work);
  Eigen::LDLT<Matrix> ldlt(S);
  if (ldlt.info() != Eigen::Success) return false;
  const Vector D = ldlt.vectorD().cwiseAbs();
  if (!(D.minCoeff() > 1e-13 * D.maxCoeff())) return false;
  const Vector rhs = qp.GHinvFt_minus_P(work, Eigen::all) * x0 - qp.w(work);
  *lam = ldlt.solve(rhs);
  *u = qp.Hinv * (Ftx - qp.G(work, Eigen::all).transpose() * (*lam));
  return true;
}

// Schur-complement test: row i of G is not (numerically) in the span of the
// working-set rows, measured in the H^-1 inner product.
bool independent_of(const CondensedQP& qp, const std::vector<int>& work,
                    int i) {
  const double sii = qp.GHinvGt(i, i);
  if (work.empty()) return sii > 0.0;
  const Matrix S = qp.GHinvGt(work, work);
  const Vector c = qp.GHinvGt(work, i);
  const double schur = sii - c.dot(S.ldlt().solve(c));
  return schur > 1e-10 * sii;
}

}  // namespace

bool try_active_set(const CondensedQP& qp, const Vector& x0,
                    const ActiveSet& sigma, QPSolution* out, double tol) {
  if (sigma.size() != qp.m) return false;
  const std::vector<int> work = sigma.indices();
  if (static_cast<int>(work.size()) > qp.n()) return false;
  Vector u, lam;
  if (!eqp(qp, x0, work, &u, &lam)) return false;
  const double lam_scale = 1.0 + (lam.size() ? lam.cwiseAbs().maxCoeff() : 0.0);
  for (Eigen::Index j = 0; j < lam.size(); ++j) {
    if (lam(j) < -tol * lam_scale) return false;
  }
  const Vector phi = residuals(qp, x0, u);
  for (int i = 0; i < qp.m; ++i) {
    if (phi(i) < -tol * (1.0 + std::abs(qp.w(i)))) return false;
  }
  fill_solution(qp, x0, u, work, lam.cwiseMax(0.0), 1e-8, out);
  out->iterations = 0;
  out->from_hint = true;
  return true;
}

QPSolution solve_qp(const CondensedQP& qp, const Vector& x0,
                    const QPOptions& opts) {
  if (x0.size() != qp.nx) throw DimensionError("solve_qp: bad x0 size");
  QPSolution sol;
  if (try_active_set(qp, x0, ActiveSet(qp.m), &sol)) return sol;
  if (opts.hint != nullptr && try_active_set(qp, x0, *opts.hint, &sol)) {
    return sol;
  }

  const Vector b = qp.w + qp.P * x0;
  // Phase I: capped Chebyshev center is feasible (throws with certificate).
  Vector u;
  if (opts.feasible_start != nullptr &&
      opts.feasible_start->size() == qp.n() &&
      ((b - qp.G * *opts.feasible_start).array() >= 0.0).all()) {
    u = *opts.feasible_start;
  } else {
    u = chebyshev_ball(qp.G, b, 1.0).center;
  }
  const Vector norms = qp.G.rowwise().norm();
  std::vector<int> work;
  std::vector<char> in_work(static_cast<size_t>(qp.m), 0);

  int zero_steps = 0;
  const double lam_tol = 1e-10;
  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    Vector target, lam;
    if (!eqp(qp, x0, work, &target, &lam)) {
      throw DegenerateActiveSetError("solve_qp: singular working set");
    }
    const Vector p = target - u;
    if (p.norm() <= 1e-12 * (1.0 + u.norm())) {
      const double scale = 1.0 + (lam.size() ? lam.cwiseAbs().maxCoeff() : 0.0);
      int drop = -1;
      if (zero_steps > 2 * qp.m) {
        // Bland-style: smallest constraint index with a negative multiplier.
        int best_idx = qp.m;
        for (size_t j = 0; j < work.size(); ++j) {
          if (lam(static_cast<Eigen::Index>(j)) < -lam_tol * scale &&
              work[j] < best_idx) {
            best_idx = work[j];
            drop = static_cast<int>(j);
          }
        }
      } else {
        double most = -lam_tol * scale;
        for (size_t j = 0; j < work.size(); ++j) {
          if (lam(static_cast<Eigen::Index>(j)) < most) {
            most = lam(static_cast<Eigen::Index>(j));
            drop = static_cast<int>(j);
          }
        }
      }
      if (drop < 0) {
        fill_solution(qp, x0, target, work, lam.cwiseMax(0.0),
                      opts.active_tol, &sol);
        sol.iterations = iter + 1;
        return sol;
      }
      in_work[static_cast<size_t>(work[static_cast<size_t>(drop)])] = 0;
      work.erase(work.begin() + drop);
      continue;
    }
    const Vector Gp = qp.G * p;
    const Vector slack = b - qp.G * u;
    const double pn = p.norm();
    std::vector<char> skip(static_cast<size_t>(qp.m), 0);
    double alpha = 1.0;
    int blocking = -1;
    for (;;) {
      alpha = 1.0;
      blocking = -1;
      for (int i = 0; i < qp.m; ++i) {
        const size_t si = static_cast<size_t>(i);
        // Rows in the span of the working set have G_i p = 0 up to rounding.
        if (in_work[si] || skip[si] || Gp(i) <= 1e-12 * pn * norms(i)) {
          continue;
        }
        const double step = std::max(slack(i), 0.0) / Gp(i);
        if (step < alpha) {
          alpha = step;
          blocking = i;
        }
      }
      if (blocking < 0 || independent_of(qp, work, blocking)) break;
      skip[static_cast<size_t>(blocking)] = 1;
    }
    u += alpha * p;
    zero_steps = (alpha <= 1e-14) ? zero_steps + 1 : 0;
    if (blocking >= 0) {
      work.push_back(blocking);
      in_work[static_cast<size_t>(blocking)] = 1;
    }
  }
  throw ConvergenceError("solve_qp: iteration limit reached", u);
}

AffinePiece gain_for_sigma(const CondensedQP& qp, const ActiveSet& sigma,
                           bool use_pseudo_inverse) {
  if (sigma.size() != qp.m) throw DimensionError("gain_for_sigma: bad sigma");
  AffinePiece piece;
  piece.sigma = sigma;
  const std::vector<int> idx = sigma.indices();
  if (idx.empty()) {
    piece.K = qp.K0;
    piece.k = Vector::Zero(qp.n());
    return piece;
  }
  const Matrix S = qp.GHinvGt(idx, idx);
  Matrix Sinv;
  if (is_singular_submatrix(S)) {
    if (!use_pseudo_inverse) {
      throw DegenerateActiveSetError(
          "gain_for_sigma: singular principal submatrix for sigma " +
          sigma.to_string());
    }
    Sinv = pseudo_inverse(S);
  } else {
    Sinv = S.inverse();
  }
  const Matrix HGt = qp.Hinv * qp.G(idx, Eigen::all).transpose();
  piece.K = qp.K0 - HGt * Sinv * qp.GHinvFt_minus_P(idx, Eigen::all);
  piece.k = HGt * Sinv * qp.w(idx);
  return piece;
}

Vector pi_mpc(const CondensedQP& qp, const Vector& x) {
  return solve_qp(qp, x).u_star.head(qp.nu);
}

ExplicitLaw::ExplicitLaw(std::shared_ptr<const CondensedQP> qp)
    : qp_(std::move(qp)) {
  insert(ActiveSet(qp_->m));
}

int ExplicitLaw::insert(const ActiveSet& sigma) const {
  const CondensedQP& qp = *qp_;
  auto p = std::make_shared<Piece>();
  p->sigma = sigma;
  p->idx = sigma.indices();
  if (p->idx.empty()) {
    p->K = qp.K0;
    p->k = Vector::Zero(qp.n());
    p->Lk = Matrix::Zero(0, qp.nx);
    p->l = Vector::Zero(0);
  } else {
    const Matrix S = qp.GHinvGt(p->idx, p->idx);
    if (is_singular_submatrix(S)) return -1;
    const Matrix Sinv = S.inverse();
    const Matrix HGt = qp.Hinv * qp.G(p->idx, Eigen::all).transpose();
    p->Lk = Sinv * qp.GHinvFt_minus_P(p->idx, Eigen::all);
    p->l = -Sinv * qp.w(p->idx);
    p->K = qp.K0 - HGt * p->Lk;
    p->k = -HGt * p->l;
  }
  std::unique_lock lock(mutex_);
  for (size_t i = 0; i < pieces_.size(); ++i) {
    if (pieces_[i]->sigma == sigma) return static_cast<int>(i);
  }
  pieces_.push_back(std::move(p));
  return static_cast<int>(pieces_.size()) - 1;
}

void ExplicitLaw::seed(const std::vector<ActiveSet>& sets) {
  for (const ActiveSet& s : sets) {
    if (s.size() != qp_->m) throw DimensionError("ExplicitLaw: bad sigma");
    insert(s);
  }
}

int ExplicitLaw::piece_count() const {
  std::shared_lock lock(mutex_);
  return static_cast<int>(pieces_.size());
}

bool ExplicitLaw::matches(const Piece& p, const Vector& x, Vector* u) const {
  const CondensedQP& qp = *qp_;
  if (p.l.size() > 0) {
    const Vector lam = p.Lk * x + p.l;
    if ((lam.array() < -1e-9 * (1.0 + lam.cwiseAbs().maxCoeff())).any()) {
      return false;
    }
  }
  Vector cand = p.K * x + p.k;
  const Vector b = qp.w + qp.P * x;
  const Vector slack = b - qp.G * cand;
  for (int i = 0; i < qp.m; ++i) {
    if (slack(i) < -1e-9 * (1.0 + std::abs(b(i)))) return false;
  }
  *u = std::move(cand);
  return true;
}

int ExplicitLaw::locate(const Vector& x, int* hint, Vector* u) const {
  if (x.size() != qp_->nx) throw DimensionError("ExplicitLaw: bad x size");
  std::vector<std::shared_ptr<const Piece>> snapshot;
  {
    std::shared_lock lock(mutex_);
    snapshot = pieces_;
  }
  const int n = static_cast<int>(snapshot.size());
  if (hint != nullptr && *hint >= 0 && *hint < n &&
      matches(*snapshot[static_cast<size_t>(*hint)], x, u)) {
    return *hint;
  }
  for (int i = 0; i < n; ++i) {
    if (matches(*snapshot[static_cast<size_t>(i)], x, u)) {
      if (hint != nullptr) *hint = i;
      return i;
    }
  }
  const Vector b = qp_->w + qp_->P * x;
  {
    std::shared_lock lock(mutex_);
    for (const Vector& y : certificates_) {
      if (y.dot(b) < -1e-12 * (1.0 + y.cwiseAbs().dot(b.cwiseAbs()))) {
        throw InfeasibleError("ExplicitLaw: state is infeasible", y);
      }
    }
  }
  QPSolution sol;
  try {
    sol = solve_qp(*qp_, x);
  } catch (const InfeasibleError& e) {
    if (e.certificate().size() == qp_->m) {
      std::unique_lock lock(mutex_);
      certificates_.push_back(e.certificate());
    }
    throw;
  }
  const int at = insert(sol.working_set);
  *u = sol.u_star;
  if (hint != nullptr) *hint = at;
  return at;
}

Vector ExplicitLaw::solve(const Vector& x, int* hint) const {
  Vector u;
  locate(x, hint, &u);
  return u;
}

Vector ExplicitLaw::act(const Vector& x, int* hint) const {
  return solve(x, hint).head(qp_->nu);
}

Matrix ExplicitLaw::gain(const Vector& x, int* hint) const {
  Vector u;
  const int at = locate(x, hint, &u);
  if (at < 0) return gain_for_sigma(*qp_, solve_qp(*qp_, x).working_set).K;
  std::shared_lock lock(mutex_);
  return pieces_[static_cast<size_t>(at)]->K;
}

StateGrid StateGrid::uniform(const Vector& lo, const Vector& hi, int points) {
  if (lo.size() != hi.size()) throw DimensionError("StateGrid: lo/hi sizes");
  if (points < 1) throw InvalidArgument("StateGrid: points must be >= 1");
  StateGrid g;
  g.lo = lo;
  g.hi = hi;
  g.resolution.assign(static_cast<size_t>(lo.size()), points);
  return g;
}

long StateGrid::size() const {
  long n = 1;
  for (int r : resolution) n *= r;
  return n;
}

Vector StateGrid::point(long flat) const {
  const int d = static_cast<int>(lo.size());
  Vector x(d);
  for (int i = d - 1; i >= 0; --i) {
    const int r = resolution[static_cast<size_t>(i)];
    const long j = flat % r;
    flat /= r;
    x(i) = r == 1 ? 0.5 * (lo(i) + hi(i))
                  : lo(i) + (hi(i) - lo(i)) * static_cast<double>(j) / (r - 1);
  }
  return x;
}

namespace {

struct LineResult {
  std::map<ActiveSet, long> sigma_counts;
  std::set<ActiveSet> strict_sigmas;
  std::set<ActiveSet> residual_sigmas;
  long feasible = 0;
  long infeasible = 0;
  long full_solves = 0;
};

// Rounded (K, k) entries used as a secondary dedup key.
std::vector<long long> gain_key(const AffinePiece& p) {
  std::vector<long long> key;
  key.reserve(static_cast<size_t>(p.K.size() + p.k.size()));
  for (Eigen::Index i = 0; i < p.K.size(); ++i) {
    key.push_back(std::llround(p.K.data()[i] * 1e6));
  }
  for (Eigen::Index i = 0; i < p.k.size(); ++i) {
    key.push_back(std::llround(p.k(i) * 1e6));
  }
  return key;
}

}  // namespace

DiscoveryResult discover_pieces(const CondensedQP& qp, const StateGrid& grid,
                                int jobs) {
  if (grid.lo.size() != qp.nx) throw DimensionError("discover_pieces: grid dim");
  const long total = grid.size();
  const long line_len = grid.resolution.back();
  const long lines = total / line_len;
  std::vector<LineResult> results(static_cast<size_t>(lines));

  parallel_for(lines, jobs, [&](long line) {
    LineResult& lr = results[static_cast<size_t>(line)];
    ActiveSet hint;
    bool have_hint = false;
    Vector certificate;
    for (long j = 0; j < line_len; ++j) {
      const Vector x0 = grid.point(line * line_len + j);
      if (certificate.size() > 0) {
        // A Farkas certificate from a neighbor often still applies.
        const Vector b = qp.w + qp.P * x0;
        if (certificate.dot(b) < -1e-9 * (1.0 + certificate.norm())) {
          ++lr.infeasible;
          continue;
        }
      }
      QPOptions opts;
      if (have_hint) opts.hint = &hint;
      QPSolution sol;
      try {
        sol = solve_qp(qp, x0, opts);
      } catch (const InfeasibleError& e) {
        ++lr.infeasible;
        ++lr.full_solves;
        certificate = e.certificate();
        continue;
      }
      certificate.resize(0);
      if (!sol.from_hint) ++lr.full_solves;
      ++lr.feasible;
      ++lr.sigma_counts[sol.working_set];
      lr.residual_sigmas.insert(sol.sigma);
      if (sol.sigma == sol.working_set) {
        bool strict = true;
        for (int i : sol.working_set.indices()) {
          if (sol.multipliers(i) <= 1e-9) strict = false;
        }
        if (strict) lr.strict_sigmas.insert(sol.working_set);
      }
      hint = sol.working_set;
      have_hint = true;
    }
  });

  std::map<ActiveSet, long> counts;
  std::set<ActiveSet> residual_sigmas;
  std::set<ActiveSet> strict_sigmas;
  DiscoveryResult out;
  for (const LineResult& lr : results) {
    for (const auto& [s, c] : lr.sigma_counts) counts[s] += c;
    residual_sigmas.insert(lr.residual_sigmas.begin(), lr.residual_sigmas.end());
    strict_sigmas.insert(lr.strict_sigmas.begin(), lr.strict_sigmas.end());
    out.feasible_points += lr.feasible;
    out.infeasible_points += lr.infeasible;
    out.full_solves += lr.full_solves;
  }
  std::set<std::vector<long long>> gains;
  for (const auto& [s, c] : counts) {
    AffinePiece piece = gain_for_sigma(qp, s);
    piece.occupancy = c;
    gains.insert(gain_key(piece));
    out.pieces.push_back(std::move(piece));
  }
  out.distinct_sigma = static_cast<int>(out.pieces.size());
  out.distinct_gain = static_cast<int>(gains.size());
  out.distinct_residual_sigma = static_cast<int>(residual_sigmas.size());
  out.distinct_strict_sigma = static_cast<int>(strict_sigmas.size());
  return out;
}

}  // namespace smoothmpc

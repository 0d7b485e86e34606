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

#include <cstdint>
#include <memory>
#include <shared_mutex>
#include <string>
#include <vector>

#include "smoothmpc/mpc_core.hpp"

namespace smoothmpc {

/// Binary indicator over the m constraints.
class ActiveSet {
 public:
  ActiveSet() = default;
  explicit ActiveSet(int m) : bits_(static_cast<size_t>(m), 0) {}
  static ActiveSet from_indices(int m, const std::vector<int>& idx);
  /// Parses a string of '0'/'1' characters.
  static ActiveSet from_string(const std::string& s);

  int size() const { return static_cast<int>(bits_.size()); }
  bool operator[](int i) const { return bits_[static_cast<size_t>(i)] != 0; }
  void set(int i, bool on) { bits_[static_cast<size_t>(i)] = on ? 1 : 0; }
  int popcount() const;
  std::vector<int> indices() const;
  std::string to_string() const;

  bool operator==(const ActiveSet& o) const { return bits_ == o.bits_; }
  bool operator<(const ActiveSet& o) const { return bits_ < o.bits_; }

 private:
  std::vector<uint8_t> bits_;
};

/// u = K x0 + k on the region where `sigma` is the optimal active set.
struct AffinePiece {
  ActiveSet sigma;
  Matrix K;
  Vector k;
  long occupancy = 0;

  Vector evaluate(const Vector& x0) const { return K * x0 + k; }
};

struct QPSolution {
  Vector u_star;
  ActiveSet sigma;        // residual <= active_tol (1 + |w_i|)
  ActiveSet working_set;  // final working set: linearly independent rows
  Vector multipliers;     // length m, zero off the working set
  double objective = 0.0;
  int iterations = 0;
  bool from_hint = false;
};

struct QPOptions {
  double active_tol = 1e-8;
  int max_iterations = 2000;
  /// Optional warm start: if this set satisfies KKT at x0 it is returned
  /// without running the full method.
  const ActiveSet* hint = nullptr;
  /// Optional feasible point replacing the Chebyshev-center phase I.
  const Vector* feasible_start = nullptr;
};

/// Primal active-set method with a Chebyshev-center start. Throws
/// InfeasibleError carrying a Farkas certificate when x0 is infeasible.
QPSolution solve_qp(const CondensedQP& qp, const Vector& x0,
                    const QPOptions& opts = {});

/// Attempts the closed-form solution for a given working set. Returns false
/// if the set is singular, infeasible at x0, or has a negative multiplier.
bool try_active_set(const CondensedQP& qp, const Vector& x0,
                    const ActiveSet& sigma, QPSolution* out,
                    double tol = 1e-9);

/// Singularity test used for S / S-complement classification:
/// |det| <= 1e-12 * (product of row norms).
bool is_singular_submatrix(const Matrix& sub);

/// K_sigma, k_sigma from the zero-padded inverse of [G H^-1 G']_sigma. With
/// `use_pseudo_inverse` a singular block is pseudo-inverted instead of
/// raising DegenerateActiveSetError.
AffinePiece gain_for_sigma(const CondensedQP& qp, const ActiveSet& sigma,
                           bool use_pseudo_inverse = false);

/// First nu entries of the optimal input sequence.
Vector pi_mpc(const CondensedQP& qp, const Vector& x);

/// Piecewise-affine evaluator of the QP solution map. Each stored piece keeps
/// u = K x + k and its multipliers lambda = Lk x + l; a piece is accepted at x
/// when both primal and dual feasibility hold to 1e-9. Points matched by no
/// stored piece fall back to solve_qp and the new piece is stored.
/// Infeasibility certificates are cached the same way. Thread-safe.
class ExplicitLaw {
 public:
  explicit ExplicitLaw(std::shared_ptr<const CondensedQP> qp);

  /// Adds the pieces for the given working sets (singular ones are skipped).
  void seed(const std::vector<ActiveSet>& sets);

  /// Optimal input sequence at x. `hint` carries the index of the last piece
  /// used by the caller. Throws InfeasibleError when x is infeasible.
  Vector solve(const Vector& x, int* hint = nullptr) const;

  /// First nu inputs.
  Vector act(const Vector& x, int* hint = nullptr) const;

  /// Gain of the piece active at x.
  Matrix gain(const Vector& x, int* hint = nullptr) const;

  const CondensedQP& problem() const { return *qp_; }
  int piece_count() const;

 private:
  struct Piece {
    ActiveSet sigma;
    std::vector<int> idx;
    Matrix K;
    Vector k;
    Matrix Lk;
    Vector l;
  };
  bool matches(const Piece& p, const Vector& x, Vector* u) const;
  int locate(const Vector& x, int* hint, Vector* u) const;
  int insert(const ActiveSet& sigma) const;

  std::shared_ptr<const CondensedQP> qp_;
  mutable std::shared_mutex mutex_;
  mutable std::vector<std::shared_ptr<const Piece>> pieces_;
  // Farkas certificates y >= 0, G'y = 0 seen so far; x is infeasible when
  // y'(w + P x) < 0 for one of them.
  mutable std::vector<Vector> certificates_;
};

/// Regular axis-aligned grid. resolution[i] points along axis i, inclusive.
struct StateGrid {
  Vector lo;
  Vector hi;
  std::vector<int> resolution;

  static StateGrid uniform(const Vector& lo, const Vector& hi, int points);
  long size() const;
  Vector point(long flat) const;
};

struct DiscoveryResult {
  std::vector<AffinePiece> pieces;  // distinct working sets, sorted by sigma
  int distinct_sigma = 0;
  int distinct_gain = 0;  // (K, k) rounded to 1e-6 as key
  int distinct_residual_sigma = 0;
  int distinct_strict_sigma = 0;
  long feasible_points = 0;
  long infeasible_points = 0;
  long full_solves = 0;
};

/// Solves the QP at every grid point, collects the optimal working sets and
/// their gains. The last axis is swept innermost and each sweep line is
/// warm-started from its previous point; lines run on `jobs` workers.
DiscoveryResult discover_pieces(const CondensedQP& qp, const StateGrid& grid,
                                int jobs = 1);

}  // namespace smoothmpc

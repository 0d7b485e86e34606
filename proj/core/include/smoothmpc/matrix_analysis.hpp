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

#include <string>
#include <utility>
#include <vector>

#include "smoothmpc/explicit_mpc.hpp"
#include "smoothmpc/types.hpp"

namespace smoothmpc {

/// Transpose of the cofactor matrix, from (n-1) x (n-1) minors.
/// The 0 x 0 adjugate is the empty matrix; 1 x 1 gives [1].
Matrix adjugate(const Matrix& M);

/// Principal submatrix [M]_sigma (rows and columns with sigma_i = 1).
Matrix principal_submatrix(const Matrix& M, const ActiveSet& sigma);

/// Embeds a |sigma| x |sigma| block into an n x n zero matrix.
Matrix pad(const Matrix& block, const ActiveSet& sigma);

/// det of [M]_sigma; the empty submatrix has determinant 1.
double subset_determinant(const Matrix& M, const ActiveSet& sigma);

/// Zero-padded inverse of [M]_sigma. Throws DegenerateActiveSetError when
/// the block is singular. Empty sigma gives the zero matrix.
Matrix padded_inverse(const Matrix& M, const ActiveSet& sigma);

/// Zero-padded adjugate of [M]_sigma. Empty sigma gives the zero matrix.
Matrix padded_adjugate(const Matrix& M, const ActiveSet& sigma);

/// det(A + diag(lambda)) by the subset expansion
/// sum_sigma prod_{i not in sigma} lambda_i det([A]_sigma). Requires n <= 20.
double det_diag_perturbation(const Matrix& A, const Vector& lambda);

struct InverseDecomposition {
  std::vector<std::pair<ActiveSet, double>> h;  // sigma in S: det(A_s) prod
  std::vector<std::pair<ActiveSet, double>> c;  // sigma not in S: prod
  double h_total = 0.0;                         // equals det(A + Lambda)
  Matrix reconstruction;                        // (A + Lambda)^-1
};

/// (A + Lambda)^-1 = sum_S (h_s/h) A_s^-1 + sum_{not S} (c_s/h) adj(A)_s.
/// Requires n <= 20 and A + Lambda invertible.
InverseDecomposition inverse_decomposition(const Matrix& A,
                                           const Vector& lambda);

struct AnnihilationReport {
  bool applicable = false;  // determinant at or below the singular threshold
  double determinant = 0.0;
  double max_abs = 0.0;
  bool satisfied = true;
};

/// With S = G H^-1 G': when [S]_sigma is singular, G' adj(S)_sigma = 0.
AnnihilationReport annihilation_checks(const Matrix& G, const Matrix& H,
                                       const ActiveSet& sigma);

/// When L L' is singular, adj(L L') L = 0.
AnnihilationReport annihilation_llt(const Matrix& L);

/// adj(A + lambda e_i e_i') = adj(A) + lambda pad(adj(A without row/col i)).
/// Requires A symmetric.
Matrix rank_one_adjugate_update(const Matrix& A, double lambda, int index);

/// |det(M + u v') - det(M) - v' adj(M) u| / (1 + |det(M + u v')|).
double determinant_lemma_residual(const Matrix& M, const Vector& u,
                                  const Vector& v);

/// max-abs of (A + U C V)^-1 minus the Woodbury form, relative to 1 + max-abs
/// of the direct inverse.
double woodbury_residual(const Matrix& A, const Matrix& U, const Matrix& C,
                         const Matrix& V);

struct SelftestLine {
  std::string name;
  int instances = 0;
  int failures = 0;
  double worst = 0.0;  // worst residual seen
  double tolerance = 0.0;
};

/// Runs every identity on `instances` random inputs per identity.
std::vector<SelftestLine> matrix_selftest(int instances, unsigned seed);

}  // namespace smoothmpc

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

#include "smoothmpc/matrix_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "smoothmpc/linalg.hpp"

namespace smoothmpc {

namespace {

double det_of(const Matrix& M) {
  if (M.rows() == 0) return 1.0;
  return M.partialPivLu().determinant();
}

void require_square(const Matrix& M, const char* who) {
  if (M.rows() != M.cols()) {
    throw DimensionError(std::string(who) + ": matrix must be square");
  }
}

void require_sigma(const Matrix& M, const ActiveSet& sigma, const char* who) {
  require_square(M, who);
  if (sigma.size() != M.rows()) {
    throw DimensionError(std::string(who) + ": sigma size mismatch");
  }
}

std::vector<int> complement_of(int n, int skip) {
  std::vector<int> idx;
  idx.reserve(static_cast<size_t>(n - 1));
  for (int i = 0; i < n; ++i) {
    if (i != skip) idx.push_back(i);
  }
  return idx;
}

double max_abs(const Matrix& M) {
  return M.size() == 0 ? 0.0 : M.cwiseAbs().maxCoeff();
}

}  // namespace

Matrix adjugate(const Matrix& M) {
  require_square(M, "adjugate");
  const int n = static_cast<int>(M.rows());
  if (n == 0) return Matrix(0, 0);
  if (n == 1) return Matrix::Ones(1, 1);
  Matrix adj(n, n);
  for (int i = 0; i < n; ++i) {
    const std::vector<int> cols = complement_of(n, i);
    for (int j = 0; j < n; ++j) {
      const std::vector<int> rows = complement_of(n, j);
      const double minor = det_of(M(rows, cols));
      adj(i, j) = ((i + j) % 2 == 0 ? 1.0 : -1.0) * minor;
    }
  }
  return adj;
}

Matrix principal_submatrix(const Matrix& M, const ActiveSet& sigma) {
  require_sigma(M, sigma, "principal_submatrix");
  const std::vector<int> idx = sigma.indices();
  return M(idx, idx);
}

Matrix pad(const Matrix& block, const ActiveSet& sigma) {
  const std::vector<int> idx = sigma.indices();
  if (block.rows() != static_cast<Eigen::Index>(idx.size()) ||
      block.cols() != block.rows()) {
    throw DimensionError("pad: block does not match sigma");
  }
  Matrix out = Matrix::Zero(sigma.size(), sigma.size());
  out(idx, idx) = block;
  return out;
}

double subset_determinant(const Matrix& M, const ActiveSet& sigma) {
  return det_of(principal_submatrix(M, sigma));
}

Matrix padded_inverse(const Matrix& M, const ActiveSet& sigma) {
  const Matrix block = principal_submatrix(M, sigma);
  if (block.rows() == 0) return Matrix::Zero(M.rows(), M.cols());
  if (is_singular_submatrix(block)) {
    throw DegenerateActiveSetError("padded_inverse: singular block " +
                                   sigma.to_string());
  }
  return pad(block.partialPivLu().inverse(), sigma);
}

Matrix padded_adjugate(const Matrix& M, const ActiveSet& sigma) {
  const Matrix block = principal_submatrix(M, sigma);
  if (block.rows() == 0) return Matrix::Zero(M.rows(), M.cols());
  return pad(adjugate(block), sigma);
}

double det_diag_perturbation(const Matrix& A, const Vector& lambda) {
  require_square(A, "det_diag_perturbation");
  const int n = static_cast<int>(A.rows());
  if (lambda.size() != n) {
    throw DimensionError("det_diag_perturbation: lambda size mismatch");
  }
  if (n > 20) throw EnumerationRefused("det_diag_perturbation: n > 20");
  double total = 0.0;
  const unsigned long count = 1ul << n;
  for (unsigned long mask = 0; mask < count; ++mask) {
    std::vector<int> idx;
    double coef = 1.0;
    for (int i = 0; i < n; ++i) {
      if (mask & (1ul << i)) {
        idx.push_back(i);
      } else {
        coef *= lambda(i);
      }
    }
    if (coef == 0.0) continue;
    total += coef * det_of(A(idx, idx));
  }
  return total;
}

InverseDecomposition inverse_decomposition(const Matrix& A,
                                           const Vector& lambda) {
  require_square(A, "inverse_decomposition");
  const int n = static_cast<int>(A.rows());
  if (lambda.size() != n) {
    throw DimensionError("inverse_decomposition: lambda size mismatch");
  }
  if (n > 20) throw EnumerationRefused("inverse_decomposition: n > 20");
  InverseDecomposition out;
  Matrix weighted = Matrix::Zero(n, n);
  const unsigned long count = 1ul << n;
  for (unsigned long mask = 0; mask < count; ++mask) {
    ActiveSet sigma(n);
    double coef = 1.0;
    for (int i = 0; i < n; ++i) {
      if (mask & (1ul << i)) {
        sigma.set(i, true);
      } else {
        coef *= lambda(i);
      }
    }
    const Matrix block = principal_submatrix(A, sigma);
    const bool singular = block.rows() > 0 && is_singular_submatrix(block);
    if (singular) {
      weighted += coef * padded_adjugate(A, sigma);
      out.c.emplace_back(std::move(sigma), coef);
    } else {
      const double h = coef * det_of(block);
      out.h_total += h;
      if (block.rows() > 0) weighted += h * padded_inverse(A, sigma);
      out.h.emplace_back(std::move(sigma), h);
    }
  }
  if (out.h_total == 0.0) {
    throw DegenerateActiveSetError("inverse_decomposition: A + Lambda singular");
  }
  out.reconstruction = weighted / out.h_total;
  return out;
}

namespace {

bool singular_by_threshold(const Matrix& M, double det) {
  double scale = 1.0;
  for (Eigen::Index i = 0; i < M.rows(); ++i) scale *= M.row(i).norm();
  return std::abs(det) <= 1e-12 * scale;
}

}  // namespace

AnnihilationReport annihilation_checks(const Matrix& G, const Matrix& H,
                                       const ActiveSet& sigma) {
  if (G.cols() != H.rows() || sigma.size() != G.rows()) {
    throw DimensionError("annihilation_checks: shape mismatch");
  }
  const Matrix S = G * H.llt().solve(G.transpose());
  const Matrix block = principal_submatrix(S, sigma);
  AnnihilationReport rep;
  rep.determinant = det_of(block);
  if (block.rows() == 0 || !singular_by_threshold(block, rep.determinant)) {
    return rep;
  }
  rep.applicable = true;
  const Matrix adj = padded_adjugate(S, sigma);
  const Matrix prod = G.transpose() * adj;
  rep.max_abs = max_abs(prod);
  const double scale =
      max_abs(G) * max_abs(adj) * static_cast<double>(sigma.popcount());
  rep.satisfied = rep.max_abs <= 1e-9 * (1.0 + scale);
  return rep;
}

AnnihilationReport annihilation_llt(const Matrix& L) {
  const Matrix LLt = L * L.transpose();
  AnnihilationReport rep;
  rep.determinant = det_of(LLt);
  if (LLt.rows() == 0 || !singular_by_threshold(LLt, rep.determinant)) {
    return rep;
  }
  rep.applicable = true;
  const Matrix adj = adjugate(LLt);
  rep.max_abs = max_abs(adj * L);
  const double scale =
      max_abs(L) * max_abs(adj) * static_cast<double>(L.rows());
  rep.satisfied = rep.max_abs <= 1e-9 * (1.0 + scale);
  return rep;
}

Matrix rank_one_adjugate_update(const Matrix& A, double lambda, int index) {
  require_square(A, "rank_one_adjugate_update");
  const int n = static_cast<int>(A.rows());
  if (index < 0 || index >= n) {
    throw InvalidArgument("rank_one_adjugate_update: index out of range");
  }
  if (!is_symmetric(A)) {
    throw InvalidArgument("rank_one_adjugate_update: A must be symmetric");
  }
  ActiveSet rest(n);
  for (int i = 0; i < n; ++i) rest.set(i, i != index);
  return adjugate(A) + lambda * padded_adjugate(A, rest);
}

double determinant_lemma_residual(const Matrix& M, const Vector& u,
                                  const Vector& v) {
  const double lhs = det_of(M + u * v.transpose());
  const double rhs = det_of(M) + v.dot(adjugate(M) * u);
  return std::abs(lhs - rhs) / (1.0 + std::abs(lhs));
}

double woodbury_residual(const Matrix& A, const Matrix& U, const Matrix& C,
                         const Matrix& V) {
  const Matrix direct = (A + U * C * V).partialPivLu().inverse();
  const Matrix Ainv = A.partialPivLu().inverse();
  const Matrix core = C.partialPivLu().inverse() + V * Ainv * U;
  const Matrix smw = Ainv - Ainv * U * core.partialPivLu().solve(V * Ainv);
  return max_abs(direct - smw) / (1.0 + max_abs(direct));
}

std::vector<SelftestLine> matrix_selftest(int instances, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> dim(2, 6);
  const auto gaussian = [&](int r, int c) {
    Matrix M(r, c);
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < c; ++j) M(i, j) = normal(rng);
    }
    return M;
  };
  const auto positive = [&](int n) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = 0.1 + 2.0 * unit(rng);
    return v;
  };
  const auto record = [](SelftestLine* line, double residual) {
    ++line->instances;
    line->worst = std::max(line->worst, residual);
    if (!(residual <= line->tolerance)) ++line->failures;
  };

  SelftestLine adj{"adjugate_identity", 0, 0, 0.0, 1e-8};
  SelftestLine sym{"adjugate_symmetry", 0, 0, 0.0, 1e-8};
  SelftestLine rank1{"rank_one_adjugate_update", 0, 0, 0.0, 1e-9};
  SelftestLine expand{"determinant_subset_expansion", 0, 0, 0.0, 1e-8};
  SelftestLine decomp{"inverse_decomposition", 0, 0, 0.0, 1e-8};
  SelftestLine consist{"decomposition_weight_sum", 0, 0, 0.0, 1e-8};
  SelftestLine annih{"annihilation_sigma", 0, 0, 0.0, 1e-9};
  SelftestLine llt{"annihilation_llt", 0, 0, 0.0, 1e-9};
  SelftestLine lemma{"determinant_lemma", 0, 0, 0.0, 1e-8};
  SelftestLine smw{"woodbury", 0, 0, 0.0, 1e-8};

  for (int t = 0; t < instances; ++t) {
    const int n = dim(rng);
    {
      const Matrix M = gaussian(n, n);
      const Matrix a = adjugate(M);
      const double scale = 1.0 + max_abs(a) * max_abs(M) * n;
      const Matrix err =
          a * M - det_of(M) * Matrix::Identity(n, n);
      record(&adj, max_abs(err) / scale);
      const Matrix B = gaussian(n, n);
      const Matrix Sym = B + B.transpose();
      const Matrix as = adjugate(Sym);
      record(&sym, max_abs(as - as.transpose()) / (1.0 + max_abs(as)));
    }
    {
      const Matrix B = gaussian(n, n);
      const Matrix A = B + B.transpose();
      const double lambda = normal(rng);
      const int index = static_cast<int>(unit(rng) * n) % n;
      Matrix updated = A;
      updated(index, index) += lambda;
      const Matrix direct = adjugate(updated);
      const Matrix formula = rank_one_adjugate_update(A, lambda, index);
      record(&rank1, max_abs(direct - formula) / (1.0 + max_abs(direct)));
    }
    {
      // PSD with random rank so singular subsets occur.
      const int rank = 1 + static_cast<int>(unit(rng) * n) % n;
      const Matrix L = gaussian(n, rank);
      const Matrix A = L * L.transpose();
      const Vector lambda = positive(n);
      Matrix Al = A;
      Al.diagonal() += lambda;
      const double direct = det_of(Al);
      const double expanded = det_diag_perturbation(A, lambda);
      record(&expand, std::abs(direct - expanded) / (1.0 + std::abs(direct)));
      const InverseDecomposition dec = inverse_decomposition(A, lambda);
      const Matrix inv = Al.partialPivLu().inverse();
      record(&decomp,
             max_abs(dec.reconstruction - inv) / (1.0 + max_abs(inv)));
      record(&consist,
             std::abs(dec.h_total - expanded) / (1.0 + std::abs(expanded)));
    }
    {
      // Duplicated rows force a singular [G H^-1 G']_sigma.
      const int nu = n;
      const int rows = nu + 2;
      Matrix G = gaussian(rows, nu);
      const int src = static_cast<int>(unit(rng) * rows) % rows;
      int dst = static_cast<int>(unit(rng) * rows) % rows;
      if (dst == src) dst = (dst + 1) % rows;
      G.row(dst) = (0.5 + unit(rng)) * G.row(src);
      const Matrix Bh = gaussian(nu, nu);
      const Matrix H = Bh * Bh.transpose() + Matrix::Identity(nu, nu);
      ActiveSet sigma(rows);
      sigma.set(src, true);
      sigma.set(dst, true);
      for (int i = 0; i < rows; ++i) {
        if (unit(rng) < 0.3) sigma.set(i, true);
      }
      const AnnihilationReport rep = annihilation_checks(G, H, sigma);
      const Matrix S = G * H.llt().solve(G.transpose());
      const double scale =
          1.0 + max_abs(G) * max_abs(padded_adjugate(S, sigma)) *
                    sigma.popcount();
      record(&annih, rep.applicable ? rep.max_abs / scale : 0.0);
      if (!rep.applicable) ++annih.failures;
    }
    {
      const int rows = n;
      const int cols = 1 + static_cast<int>(unit(rng) * (n - 1)) % (n - 1);
      const Matrix L = gaussian(rows, cols);
      const AnnihilationReport rep = annihilation_llt(L);
      const double scale =
          1.0 + max_abs(L) * max_abs(adjugate(L * L.transpose())) * rows;
      record(&llt, rep.applicable ? rep.max_abs / scale : 0.0);
      if (!rep.applicable) ++llt.failures;
    }
    {
      const Matrix M = gaussian(4, 4);
      record(&lemma, determinant_lemma_residual(M, gaussian(4, 1),
                                                gaussian(4, 1)));
    }
    {
      const int k = 1 + static_cast<int>(unit(rng) * n) % n;
      const Matrix B = gaussian(n, n);
      const Matrix A = B * B.transpose() + n * Matrix::Identity(n, n);
      const Matrix Cb = gaussian(k, k);
      const Matrix C = Cb * Cb.transpose() + Matrix::Identity(k, k);
      record(&smw, woodbury_residual(A, 0.5 * gaussian(n, k), C,
                                     0.5 * gaussian(k, n)));
    }
  }
  return {adj, sym, rank1, expand, decomp, consist, annih, llt, lemma, smw};
}

}  // namespace smoothmpc

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

#include "smoothmpc/types.hpp"

namespace smoothmpc {

/// Largest singular value.
double spectral_norm(const Matrix& m);

/// Smallest / largest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Matrix& sym);
double max_eigenvalue(const Matrix& sym);

bool is_symmetric(const Matrix& m, double tol = 1e-10);
bool is_positive_definite(const Matrix& sym);
bool all_finite(const Matrix& m);

/// Moore-Penrose pseudoinverse via SVD with relative cutoff.
Matrix pseudo_inverse(const Matrix& m, double rel_tol = 1e-12);

/// Euclidean row norms.
Vector row_norms(const Matrix& m);

}  // namespace smoothmpc

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
#include <functional>
#include <string>
#include <vector>

#include "smoothmpc/explicit_mpc.hpp"
#include "smoothmpc/mpc_core.hpp"
#include "smoothmpc/policy.hpp"

namespace smoothmpc {

/// x_{t+1} = A x_t + B u_t under a state-feedback policy.
struct Trajectory {
  std::vector<Vector> states;  // x_0 .. x_K (fewer when truncated)
  std::vector<Vector> inputs;  // u_0 .. u_{K-1}
  bool truncated = false;
  std::string diagnostic;

  int steps() const { return static_cast<int>(inputs.size()); }
};

/// Stops early, with a diagnostic, when the policy throws or returns a
/// non-finite input.
Trajectory rollout(const LinearSystem& sys, const Policy& policy,
                   const Vector& x0, int K);

/// Uniform over [center - scale * half, center + scale * half], rejection
/// sampled into `feasible`.
struct InitialStateDistribution {
  Vector half_widths;
  double scale = 0.8;
  std::function<bool(const Vector&)> feasible;
  int max_attempts = 100000;

  Vector sample(std::uint64_t seed, std::uint64_t index) const;
};

/// feasible(x) is true when the QP at x has a solution. Uses `law` so the
/// test is cheap after warm-up.
std::function<bool(const Vector&)> mpc_feasibility(
    std::shared_ptr<const ExplicitLaw> law);

struct ImitationDataset {
  int N = 0;
  int K = 0;
  std::vector<Vector> initial_states;
  Matrix states;                  // (N K) x nx, row-major in (trajectory, t)
  Matrix inputs;                  // (N K) x nu
  std::vector<Matrix> jacobians;  // empty unless requested

  int size() const { return static_cast<int>(states.rows()); }
};

/// N expert rollouts of K steps; states x_0..x_{K-1} and the expert input at
/// each. Deterministic given seed. Truncated rollouts raise InvalidArgument.
ImitationDataset sample_dataset(const LinearSystem& sys, const Policy& expert,
                                const InitialStateDistribution& dist, int N,
                                int K, std::uint64_t seed,
                                bool with_jacobians = false, int jobs = 1);

struct ImitationError {
  Vector trajectory_error;  // max_t |x_hat_t - x*_t| per initial state
  double mean_error = 0.0;
  double max_error = 0.0;
  double sup_policy_error = 0.0;    // over expert-visited states
  double sup_jacobian_error = 0.0;  // same states, spectral norm
};

ImitationError imitation_error(const LinearSystem& sys, const Policy& expert,
                               const Policy& learner,
                               const std::vector<Vector>& initial_states,
                               int K, int jobs = 1);

struct SmoothnessMetrics {
  double L0_max = 0.0;  // max spectral norm of the Jacobian
  double L1_max = 0.0;  // max |J(x) - J(y)| / |x - y| over grid neighbors
  long evaluated = 0;   // grid points where the policy was defined
};

/// Points where the policy throws are skipped. Neighbors are adjacent along
/// each axis.
SmoothnessMetrics smoothness_metrics(const Policy& policy, const StateGrid& grid,
                                     int jobs = 1);

/// v(eps) = min{ gamma_inv(eps/2),
///               eps (1 + |A| + (1 + L)|B|)^(-beta_inv(eps/4)) }.
double iss_gain(double epsilon, double L, double normA, double normB,
                const std::function<double(double)>& beta_inv,
                const std::function<double(double)>& gamma_inv);

}  // namespace smoothmpc

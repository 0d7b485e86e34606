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
#include <string>

#include "smoothmpc/mpc_core.hpp"
#include "smoothmpc/policy.hpp"

namespace smoothmpc {

enum class NoiseDistribution { kUniformBall, kUniformBox, kGaussian };

NoiseDistribution parse_distribution(const std::string& name);
std::string to_string(NoiseDistribution d);

struct SmoothingConfig {
  double sigma = 0.1;
  NoiseDistribution distribution = NoiseDistribution::kUniformBall;
  int n_samples = 256;
  std::uint64_t seed = 0;

  void validate() const;
};

/// n_samples x nx matrix of zero-mean unit-scale draws. Row i comes from its
/// own stream keyed by (seed, i), so rows do not depend on evaluation order.
Matrix noise_draws(const SmoothingConfig& cfg, int nx);

/// Projection onto the set of states with a feasible input sequence:
/// argmin_x |x - y|^2 + 1e-6 |u|^2 over {(x, u) : G u - P x <= w - margin}.
/// The returned x is feasible for the QP with slack `margin`.
class FeasibleStateProjector {
 public:
  explicit FeasibleStateProjector(std::shared_ptr<const CondensedQP> qp,
                                  double margin = 1e-7);
  Vector project(const Vector& y) const;

 private:
  std::shared_ptr<const CondensedQP> qp_;
  CondensedQP lifted_;
};

struct SmoothedValue {
  Vector mean;
  Vector std_error;
  double projected_fraction = 0.0;
  int failures = 0;
};

/// Monte-Carlo estimate of E[pi(x + sigma w)]. Samples on which `base`
/// reports infeasibility are projected (when a projector is given) and
/// re-evaluated. Throws SmoothingError if more than half the samples fail.
/// `draws` overrides noise_draws(cfg, nx).
SmoothedValue pi_rs(const Policy& base, const SmoothingConfig& cfg,
                    const Vector& x,
                    const FeasibleStateProjector* projector = nullptr,
                    const Matrix* draws = nullptr);

/// Central differences of pi_rs with the same draws at x + h e_j and
/// x - h e_j.
Matrix pi_rs_jacobian(const Policy& base, const SmoothingConfig& cfg,
                      const Vector& x,
                      const FeasibleStateProjector* projector = nullptr,
                      double h = 1e-4, const Matrix* draws = nullptr);

/// Policy evaluating pi_rs with draws fixed at construction.
Policy randomized_policy(const Policy& base, const SmoothingConfig& cfg,
                         std::shared_ptr<const FeasibleStateProjector> projector,
                         double h = 1e-4);

struct TradeoffAudit {
  double epsilon = 0.0;               // max |g - f| on the grid
  double worst_grad_lipschitz = 0.0;  // max |g'(x_i+1) - g'(x_i)| / h
  double theoretical_floor = 0.0;     // |a - b|^2 / (144 epsilon)
  bool satisfied = false;
};

/// f: original samples, g: smoothed samples, both on the uniform grid xs.
/// a, b: slopes of f left and right of its kink. Throws ResolutionError if
/// the spacing exceeds epsilon / |a - b|.
TradeoffAudit tradeoff_audit(const Vector& xs, const Vector& f,
                             const Vector& g, double a, double b);

}  // namespace smoothmpc

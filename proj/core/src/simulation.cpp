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

#include "smoothmpc/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "smoothmpc/linalg.hpp"
#include "smoothmpc/parallel.hpp"

namespace smoothmpc {

Trajectory rollout(const LinearSystem& sys, const Policy& policy,
                   const Vector& x0, int K) {
  if (x0.size() != sys.nx()) throw DimensionError("rollout: bad x0 size");
  if (K < 0) throw InvalidArgument("rollout: K < 0");
  Trajectory tr;
  tr.states.reserve(static_cast<size_t>(K) + 1);
  tr.inputs.reserve(static_cast<size_t>(K));
  tr.states.push_back(x0);
  for (int t = 0; t < K; ++t) {
    const Vector& x = tr.states.back();
    Vector u;
    try {
      u = policy(x);
    } catch (const Error& e) {
      tr.truncated = true;
      tr.diagnostic = "t=" + std::to_string(t) + ": " + e.what();
      return tr;
    }
    if (u.size() != sys.nu() || !u.allFinite()) {
      tr.truncated = true;
      tr.diagnostic = "t=" + std::to_string(t) + ": invalid input";
      return tr;
    }
    tr.states.push_back(sys.A * x + sys.B * u);
    tr.inputs.push_back(std::move(u));
  }
  return tr;
}

Vector InitialStateDistribution::sample(std::uint64_t seed,
                                        std::uint64_t index) const {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const Eigen::Index n = half_widths.size();
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    Vector x(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      x(j) = scale * half_widths(j) * unit(rng);
    }
    if (!feasible || feasible(x)) return x;
  }
  throw InfeasibleError("InitialStateDistribution: rejection sampling failed");
}

std::function<bool(const Vector&)> mpc_feasibility(
    std::shared_ptr<const ExplicitLaw> law) {
  return [law](const Vector& x) {
    thread_local int hint = -1;
    try {
      law->solve(x, &hint);
      return true;
    } catch (const InfeasibleError&) {
      return false;
    }
  };
}

ImitationDataset sample_dataset(const LinearSystem& sys, const Policy& expert,
                                const InitialStateDistribution& dist, int N,
                                int K, std::uint64_t seed, bool with_jacobians,
                                int jobs) {
  if (N < 0 || K < 1) throw InvalidArgument("sample_dataset: bad N or K");
  ImitationDataset ds;
  ds.N = N;
  ds.K = K;
  ds.initial_states.resize(static_cast<size_t>(N));
  ds.states.resize(static_cast<Eigen::Index>(N) * K, sys.nx());
  ds.inputs.resize(static_cast<Eigen::Index>(N) * K, sys.nu());
  if (with_jacobians) ds.jacobians.resize(static_cast<size_t>(N) * K);
  for (int i = 0; i < N; ++i) {
    ds.initial_states[static_cast<size_t>(i)] =
        dist.sample(seed, static_cast<std::uint64_t>(i));
  }
  parallel_for(N, jobs, [&](long i) {
    const Trajectory tr =
        rollout(sys, expert, ds.initial_states[static_cast<size_t>(i)], K);
    if (tr.truncated) {
      throw InvalidArgument("sample_dataset: expert rollout truncated at " +
                            tr.diagnostic);
    }
    for (int t = 0; t < K; ++t) {
      const Eigen::Index row = i * K + t;
      ds.states.row(row) = tr.states[static_cast<size_t>(t)].transpose();
      ds.inputs.row(row) = tr.inputs[static_cast<size_t>(t)].transpose();
      if (with_jacobians) {
        ds.jacobians[static_cast<size_t>(row)] =
            expert.jacobian_at(tr.states[static_cast<size_t>(t)]);
      }
    }
  });
  return ds;
}

ImitationError imitation_error(const LinearSystem& sys, const Policy& expert,
                               const Policy& learner,
                               const std::vector<Vector>& initial_states,
                               int K, int jobs) {
  const long n = static_cast<long>(initial_states.size());
  ImitationError out;
  out.trajectory_error = Vector::Zero(n);
  Vector policy_err = Vector::Zero(n);
  Vector jac_err = Vector::Zero(n);
  parallel_for(n, jobs, [&](long i) {
    const Vector& x0 = initial_states[static_cast<size_t>(i)];
    const Trajectory te = rollout(sys, expert, x0, K);
    const Trajectory tl = rollout(sys, learner, x0, K);
    if (te.truncated || tl.truncated) {
      throw InvalidArgument("imitation_error: truncated rollout (" +
                            te.diagnostic + tl.diagnostic + ")");
    }
    double worst = 0.0;
    for (size_t t = 0; t < te.states.size(); ++t) {
      worst = std::max(worst, (te.states[t] - tl.states[t]).norm());
    }
    out.trajectory_error(i) = worst;
    double pe = 0.0;
    double je = 0.0;
    for (int t = 0; t < K; ++t) {
      const Vector& x = te.states[static_cast<size_t>(t)];
      pe = std::max(pe, (te.inputs[static_cast<size_t>(t)] - learner(x)).norm());
      je = std::max(je, spectral_norm(expert.jacobian_at(x) -
                                      learner.jacobian_at(x)));
    }
    policy_err(i) = pe;
    jac_err(i) = je;
  });
  if (n > 0) {
    out.mean_error = out.trajectory_error.mean();
    out.max_error = out.trajectory_error.maxCoeff();
    out.sup_policy_error = policy_err.maxCoeff();
    out.sup_jacobian_error = jac_err.maxCoeff();
  }
  return out;
}

SmoothnessMetrics smoothness_metrics(const Policy& policy,
                                     const StateGrid& grid, int jobs) {
  const long n = grid.size();
  std::vector<Matrix> J(static_cast<size_t>(n));
  std::vector<char> ok(static_cast<size_t>(n), 0);
  parallel_for(n, jobs, [&](long i) {
    try {
      J[static_cast<size_t>(i)] = policy.jacobian_at(grid.point(i));
      ok[static_cast<size_t>(i)] = J[static_cast<size_t>(i)].allFinite();
    } catch (const InfeasibleError&) {
    } catch (const ConvergenceError&) {
    } catch (const SmoothingError&) {
    }
  });
  SmoothnessMetrics out;
  const int d = static_cast<int>(grid.lo.size());
  std::vector<long> stride(static_cast<size_t>(d), 1);
  for (int a = d - 2; a >= 0; --a) {
    stride[static_cast<size_t>(a)] =
        stride[static_cast<size_t>(a) + 1] * grid.resolution[static_cast<size_t>(a) + 1];
  }
  for (long i = 0; i < n; ++i) {
    if (!ok[static_cast<size_t>(i)]) continue;
    ++out.evaluated;
    const Matrix& Ji = J[static_cast<size_t>(i)];
    out.L0_max = std::max(out.L0_max, spectral_norm(Ji));
    const Vector xi = grid.point(i);
    for (int a = 0; a < d; ++a) {
      const long r = grid.resolution[static_cast<size_t>(a)];
      const long coord = (i / stride[static_cast<size_t>(a)]) % r;
      if (coord + 1 >= r) continue;
      const long j = i + stride[static_cast<size_t>(a)];
      if (!ok[static_cast<size_t>(j)]) continue;
      const double dist = (grid.point(j) - xi).norm();
      if (!(dist > 0.0)) continue;
      out.L1_max = std::max(
          out.L1_max, spectral_norm(J[static_cast<size_t>(j)] - Ji) / dist);
    }
  }
  return out;
}

double iss_gain(double epsilon, double L, double normA, double normB,
                const std::function<double(double)>& beta_inv,
                const std::function<double(double)>& gamma_inv) {
  if (!(epsilon >= 0.0)) throw InvalidArgument("iss_gain: epsilon < 0");
  const double first = gamma_inv(0.5 * epsilon);
  const double base = 1.0 + normA + (1.0 + L) * normB;
  const double second = epsilon * std::pow(base, -beta_inv(0.25 * epsilon));
  return std::min(first, second);
}

}  // namespace smoothmpc

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

#include "smoothmpc/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "smoothmpc/explicit_mpc.hpp"

namespace smoothmpc {

NoiseDistribution parse_distribution(const std::string& name) {
  if (name == "uniform-ball") return NoiseDistribution::kUniformBall;
  if (name == "uniform-box") return NoiseDistribution::kUniformBox;
  if (name == "gaussian") return NoiseDistribution::kGaussian;
  throw InvalidArgument("unknown noise distribution '" + name + "'");
}

std::string to_string(NoiseDistribution d) {
  switch (d) {
    case NoiseDistribution::kUniformBall:
      return "uniform-ball";
    case NoiseDistribution::kUniformBox:
      return "uniform-box";
    case NoiseDistribution::kGaussian:
      return "gaussian";
  }
  return "unknown";
}

void SmoothingConfig::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw InvalidArgument("SmoothingConfig: sigma must be finite and > 0");
  }
  if (n_samples < 1) throw InvalidArgument("SmoothingConfig: n_samples < 1");
}

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

Matrix noise_draws(const SmoothingConfig& cfg, int nx) {
  cfg.validate();
  Matrix W(cfg.n_samples, nx);
  for (int i = 0; i < cfg.n_samples; ++i) {
    std::mt19937_64 rng(splitmix64(cfg.seed ^ splitmix64(static_cast<std::uint64_t>(i))));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    switch (cfg.distribution) {
      case NoiseDistribution::kGaussian:
        for (int j = 0; j < nx; ++j) W(i, j) = normal(rng);
        break;
      case NoiseDistribution::kUniformBox:
        for (int j = 0; j < nx; ++j) W(i, j) = 2.0 * unit(rng) - 1.0;
        break;
      case NoiseDistribution::kUniformBall: {
        Vector dir(nx);
        for (int j = 0; j < nx; ++j) dir(j) = normal(rng);
        const double radius = std::pow(unit(rng), 1.0 / nx);
        W.row(i) = (radius / dir.norm()) * dir.transpose();
        break;
      }
    }
  }
  return W;
}

FeasibleStateProjector::FeasibleStateProjector(
    std::shared_ptr<const CondensedQP> qp, double margin)
    : qp_(std::move(qp)) {
  const CondensedQP& q = *qp_;
  const int nx = q.nx;
  const int n = q.n();
  lifted_.H = Matrix::Zero(nx + n, nx + n);
  lifted_.H.topLeftCorner(nx, nx).setIdentity();
  lifted_.H.bottomRightCorner(n, n) = 1e-6 * Matrix::Identity(n, n);
  lifted_.F = Matrix::Zero(nx, nx + n);
  lifted_.F.leftCols(nx).setIdentity();
  lifted_.G.resize(q.m, nx + n);
  lifted_.G << -q.P, q.G;
  if ((q.w.array() <= margin).any()) {
    throw OriginNotInteriorError("FeasibleStateProjector: w <= margin");
  }
  lifted_.w = q.w.array() - margin;
  lifted_.P = Matrix::Zero(q.m, nx);
  lifted_.m = q.m;
  lifted_.T = 1;
  lifted_.nx = nx;
  lifted_.nu = nx + n;
  lifted_.finalize();
}

Vector FeasibleStateProjector::project(const Vector& y) const {
  if (y.size() != qp_->nx) throw DimensionError("project: bad state size");
  // z = 0 is feasible since w > margin; the last working set is tried first.
  thread_local ActiveSet last;
  const Vector zero = Vector::Zero(lifted_.n());
  QPOptions opts;
  opts.feasible_start = &zero;
  if (last.size() == lifted_.m) opts.hint = &last;
  const QPSolution sol = solve_qp(lifted_, y, opts);
  last = sol.working_set;
  return sol.u_star.head(qp_->nx);
}

namespace {

bool try_act(const Policy& base, const Vector& y, Vector* out) {
  try {
    *out = base.act(y);
    return out->allFinite();
  } catch (const InfeasibleError&) {
    return false;
  } catch (const ConvergenceError&) {
    return false;
  }
}

}  // namespace

SmoothedValue pi_rs(const Policy& base, const SmoothingConfig& cfg,
                    const Vector& x, const FeasibleStateProjector* projector,
                    const Matrix* draws) {
  cfg.validate();
  if (x.size() != base.nx) throw DimensionError("pi_rs: bad state size");
  Matrix own;
  if (draws == nullptr) {
    own = noise_draws(cfg, base.nx);
    draws = &own;
  }
  const int n = static_cast<int>(draws->rows());
  Vector sum = Vector::Zero(base.nu);
  Vector sq = Vector::Zero(base.nu);
  int ok = 0;
  int projected = 0;
  SmoothedValue out;
  for (int i = 0; i < n; ++i) {
    Vector y = x + cfg.sigma * draws->row(i).transpose();
    Vector u;
    bool good = try_act(base, y, &u);
    if (!good && projector != nullptr) {
      ++projected;
      try {
        good = try_act(base, projector->project(y), &u);
      } catch (const InfeasibleError&) {
        good = false;
      }
    }
    if (!good) {
      ++out.failures;
      continue;
    }
    sum += u;
    sq += u.cwiseAbs2();
    ++ok;
  }
  if (2 * out.failures > n) {
    throw SmoothingError("pi_rs: " + std::to_string(out.failures) + " of " +
                         std::to_string(n) + " samples failed");
  }
  out.mean = sum / ok;
  const Vector var =
      (sq / ok - out.mean.cwiseAbs2()).cwiseMax(0.0) * (ok / std::max(ok - 1.0, 1.0));
  out.std_error = (var / ok).cwiseSqrt();
  out.projected_fraction = static_cast<double>(projected) / n;
  return out;
}

Matrix pi_rs_jacobian(const Policy& base, const SmoothingConfig& cfg,
                      const Vector& x, const FeasibleStateProjector* projector,
                      double h, const Matrix* draws) {
  Matrix own;
  if (draws == nullptr) {
    own = noise_draws(cfg, base.nx);
    draws = &own;
  }
  Matrix J(base.nu, base.nx);
  for (int j = 0; j < base.nx; ++j) {
    Vector xp = x;
    Vector xm = x;
    xp(j) += h;
    xm(j) -= h;
    J.col(j) = (pi_rs(base, cfg, xp, projector, draws).mean -
                pi_rs(base, cfg, xm, projector, draws).mean) /
               (2.0 * h);
  }
  return J;
}

Policy randomized_policy(const Policy& base, const SmoothingConfig& cfg,
                         std::shared_ptr<const FeasibleStateProjector> projector,
                         double h) {
  auto draws = std::make_shared<const Matrix>(noise_draws(cfg, base.nx));
  Policy p;
  p.kind = PolicyKind::kRandomized;
  p.nx = base.nx;
  p.nu = base.nu;
  p.parameter = cfg.sigma;
  p.act = [base, cfg, projector, draws](const Vector& x) {
    return pi_rs(base, cfg, x, projector.get(), draws.get()).mean;
  };
  p.jacobian = [base, cfg, projector, draws, h](const Vector& x) {
    return pi_rs_jacobian(base, cfg, x, projector.get(), h, draws.get());
  };
  return p;
}

TradeoffAudit tradeoff_audit(const Vector& xs, const Vector& f,
                             const Vector& g, double a, double b) {
  const Eigen::Index n = xs.size();
  if (f.size() != n || g.size() != n) {
    throw DimensionError("tradeoff_audit: sample sizes differ");
  }
  if (n < 3) throw InvalidArgument("tradeoff_audit: need at least 3 samples");
  const double h = (xs(n - 1) - xs(0)) / static_cast<double>(n - 1);
  if (!(h > 0.0)) throw InvalidArgument("tradeoff_audit: grid not increasing");
  TradeoffAudit out;
  out.epsilon = (g - f).cwiseAbs().maxCoeff();
  const double jump = std::abs(a - b);
  if (jump > 0.0 && h * jump > out.epsilon) {
    throw ResolutionError("tradeoff_audit: spacing " + std::to_string(h) +
                          " exceeds epsilon / |a - b| = " +
                          std::to_string(out.epsilon / jump));
  }
  for (Eigen::Index i = 0; i + 2 < n; ++i) {
    const double d0 = (g(i + 1) - g(i)) / h;
    const double d1 = (g(i + 2) - g(i + 1)) / h;
    out.worst_grad_lipschitz =
        std::max(out.worst_grad_lipschitz, std::abs(d1 - d0) / h);
  }
  out.theoretical_floor =
      out.epsilon > 0.0 ? jump * jump / (144.0 * out.epsilon)
                        : (jump > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  out.satisfied = out.worst_grad_lipschitz >= out.theoretical_floor;
  return out;
}

}  // namespace smoothmpc

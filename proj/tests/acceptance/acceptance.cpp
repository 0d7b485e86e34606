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


// One PASS/FAIL line per acceptance criterion. `--criterion N` runs a single
// criterion; without it all ten run in order.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "smoothmpc/barrier_bounds.hpp"
#include "smoothmpc/barrier_mpc.hpp"
#include "smoothmpc/experiments/experiments.hpp"

namespace smoothmpc {
namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

struct Context {
  std::string out_dir = "acceptance_out";
  int jobs = 1;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

ExperimentConfig config(const std::string& name) {
  return load_config(std::string(SMOOTHMPC_CONFIG_DIR) + "/" + name + ".json");
}

RunOptions options(const Context& ctx, const std::string& sub) {
  RunOptions o;
  o.out_dir = ctx.out_dir + "/" + sub;
  o.jobs = ctx.jobs;
  std::filesystem::create_directories(o.out_dir);
  return o;
}

Outcome from_report(const CommandReport& rep) {
  Outcome out{rep.passed(), ""};
  for (const CheckResult& c : rep.checks) {
    if (!out.detail.empty()) out.detail += "; ";
    out.detail += std::string(c.passed ? "" : "[failed] ") + c.name + ": " + c.detail;
  }
  return out;
}

std::shared_ptr<const CondensedQP> double_integrator_qp() {
  return std::make_shared<const CondensedQP>(config("double_integrator").condensed());
}

/// Uniform draw from 0.9 of the state box, rejected until the input
/// polytope has a nonempty interior.
Vector feasible_state(const CondensedQP& qp, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (;;) {
    Vector x(2);
    x << 9.0 * U(rng), 9.0 * U(rng);
    try {
      if (feasible_radii(qp, x).r > 1e-3) return x;
    } catch (const InfeasibleError&) {
    }
  }
}

Outcome c01_piece_count(const Context& ctx) {
  const PiecesReport rep = run_pieces(config("double_integrator"), options(ctx, "c01"));
  return from_report(rep);
}

Outcome c02_jacobian(const Context&) {
  const auto qp = double_integrator_qp();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> logeta(-4.0, 2.0);
  double worst = 0.0;
  int failures = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Vector x0 = feasible_state(*qp, rng);
    const BarrierProblem bp = make_barrier_problem(qp, std::pow(10.0, logeta(rng)));
    const BarrierSolution sol = solve_barrier(bp, x0);
    BarrierOptions fd_opts;
    fd_opts.compute_jacobian = false;
    fd_opts.warm_start = &sol.u_eta;
    const auto u_of = [&](const Vector& x) { return solve_barrier(bp, x, fd_opts).u_eta; };
    // Fourth-order central stencil with the step tied to the smallest
    // residual: near the boundary the curvature length scale is phi_min, and
    // a fixed small step is swamped by the solve's round-off.
    const double h = 3e-2 * std::min(1.0, sol.phi.minCoeff());
    Matrix fd(qp->n(), 2);
    for (int j = 0; j < 2; ++j) {
      const auto at = [&](double t) {
        Vector x = x0;
        x(j) += t;
        return u_of(x);
      };
      fd.col(j) = (8.0 * (at(h) - at(-h)) - (at(2.0 * h) - at(-2.0 * h))) / (12.0 * h);
    }
    const double rel = (sol.jacobian - fd).norm() / std::max(sol.jacobian.norm(), 1e-12);
    worst = std::max(worst, rel);
    if (!(rel <= 1e-5)) ++failures;
  }
  return {failures == 0, "100 pairs, worst relative error " + fmt(worst) + ", " +
                             std::to_string(failures) + " above 1e-5"};
}

Outcome c03_convex_combination(const Context&) {
  std::vector<std::shared_ptr<const CondensedQP>> qps;
  {
    const ExperimentConfig toy = config("toy1d");
    qps.push_back(std::make_shared<const CondensedQP>(toy.condensed()));
  }
  for (int T : {1, 2}) {
    const LinearSystem sys{(Matrix(2, 2) << 1, 1, 0, 1).finished(),
                           (Matrix(2, 1) << 0, 1).finished()};
    const auto cost = StageCost::constant(Matrix::Identity(2, 2), Matrix::Constant(1, 1, 0.01), T);
    const auto cons = BoxlikeConstraints::box(Vector::Constant(2, 10.0), Vector::Constant(1, 1.0));
    qps.push_back(std::make_shared<const CondensedQP>(build_condensed(sys, cost, cons)));
  }
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::uniform_real_distribution<double> logeta(-3.0, 1.0);
  double worst = 0.0;
  int cases = 0;
  int max_m = 0;
  for (const auto& qp : qps) {
    max_m = std::max(max_m, qp->m);
    for (int trial = 0; trial < 20; ++trial) {
      Vector x0(qp->nx);
      for (int i = 0; i < qp->nx; ++i) x0(i) = (qp->nx == 1 ? 4.0 : 9.0) * U(rng);
      try {
        if (feasible_radii(*qp, x0).r < 1e-3) continue;
      } catch (const InfeasibleError&) {
        continue;
      }
      const BarrierProblem bp = make_barrier_problem(qp, std::pow(10.0, logeta(rng)));
      const BarrierSolution sol = solve_barrier(bp, x0);
      const ConvexCombination cc = convex_combination(bp, sol);
      worst = std::max(worst, (sol.jacobian - cc.reconstructed).cwiseAbs().maxCoeff());
      ++cases;
    }
  }
  return {cases > 0 && worst <= 1e-8, std::to_string(cases) + " cases, m <= " +
                                          std::to_string(max_m) + ", worst max-abs gap " + fmt(worst)};
}

Outcome c04_recentering(const Context&) {
  const ExperimentConfig di = config("double_integrator");
  std::vector<double> etas = di.smoothness.eta;
  for (double e : di.imitation.eta) etas.push_back(e);
  for (double e : di.bounds.extra_eta) {
    if (e > 0.0) etas.push_back(e);
  }
  std::vector<std::shared_ptr<const CondensedQP>> qps{double_integrator_qp()};
  {
    // Asymmetric input box -1 <= u <= 2 with a state box; recentering is
    // nontrivial here.
    BoxlikeConstraints cons = BoxlikeConstraints::box(Vector::Constant(2, 10.0), Vector::Constant(1, 1.0));
    cons.bu(0) = 2.0;
    const auto cost = StageCost::constant(Matrix::Identity(2, 2), Matrix::Constant(1, 1, 0.01), 5);
    const LinearSystem sys{(Matrix(2, 2) << 1, 1, 0, 1).finished(),
                           (Matrix(2, 1) << 0, 1).finished()};
    qps.push_back(std::make_shared<const CondensedQP>(build_condensed(sys, cost, cons)));
  }
  double worst = 0.0;
  int cases = 0;
  for (const auto& qp : qps) {
    for (double eta : etas) {
      const BarrierProblem bp = make_barrier_problem(qp, eta);
      BarrierOptions o;
      o.compute_jacobian = false;
      worst = std::max(worst, solve_barrier(bp, Vector::Zero(qp->nx), o).u_eta.norm());
      ++cases;
    }
  }
  return {worst <= 1e-9, std::to_string(cases) + " (instance, eta) cases, max |u^eta(0)| " + fmt(worst)};
}

Outcome c05_bounds(const Context& ctx) {
  const BoundsReport rep = run_bounds(config("double_integrator"), options(ctx, "c05"));
  Outcome out = from_report(rep);
  long total = 0;
  for (const auto& [name, v] : rep.violations) total += v;
  out.detail = std::to_string(rep.points) + " points, " + std::to_string(total) +
               " violations; " + out.detail;
  return out;
}

Outcome c06_quad_opt(const Context&) {
  std::mt19937_64 rng(606);
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int polytopes = 0;
  int failures = 0;
  double worst_oracle = 0.0;
  while (polytopes < 100) {
    const int dim = polytopes % 2 == 0 ? 2 : 3;
    const int rows = dim + 2 + static_cast<int>(U(rng) * 5);
    Matrix A(rows, dim);
    for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = n01(rng);
    Vector b(rows);
    for (int i = 0; i < rows; ++i) b(i) = 0.2 + U(rng);
    try {
      polytope_radii(A, b);
    } catch (const UnboundedError&) {
      continue;
    }
    Matrix M(dim, dim);
    for (Eigen::Index i = 0; i < M.size(); ++i) M.data()[i] = n01(rng);
    const Matrix H = M * M.transpose() + 0.1 * Matrix::Identity(dim, dim);
    Vector v(dim);
    for (int i = 0; i < dim; ++i) v(i) = 2.0 * n01(rng);
    const double eta = std::pow(10.0, -3.0 + 3.0 * U(rng));
    const QuadOptReport rep = quad_opt_bounds(A, b, H, v, eta);
    ++polytopes;
    bool ok = rep.item_i.satisfied && rep.item_ii_lower.satisfied &&
              rep.item_ii_upper.satisfied && rep.item_iii.satisfied;
    // Oracles: barrier stationarity at x^eta, KKT at x*.
    const Vector slack = b - A * rep.x_eta;
    const Vector g = H * (rep.x_eta - v) + eta * A.transpose() * slack.cwiseInverse();
    const Vector phi = b - A * rep.x_star;
    Eigen::Index dummy;
    double kkt = std::max(0.0, -phi.minCoeff(&dummy));
    // Nonnegative multipliers on the active rows by least squares.
    std::vector<int> act;
    for (int i = 0; i < rows; ++i) {
      if (phi(i) <= 1e-8) act.push_back(i);
    }
    Vector stat = H * (rep.x_star - v);
    if (!act.empty()) {
      Matrix Aa(static_cast<Eigen::Index>(act.size()), dim);
      for (size_t k = 0; k < act.size(); ++k) Aa.row(static_cast<Eigen::Index>(k)) = A.row(act[k]);
      const Vector y = Aa.transpose().colPivHouseholderQr().solve(-stat);
      kkt = std::max(kkt, std::max(0.0, -y.minCoeff()));
      stat += Aa.transpose() * y;
    }
    kkt = std::max(kkt, stat.norm());
    const double oracle = std::max(g.norm() / (1.0 + (H * v).norm()), kkt);
    worst_oracle = std::max(worst_oracle, oracle);
    ok = ok && slack.minCoeff() > 0.0 && oracle <= 1e-6;
    if (!ok) ++failures;
  }
  return {failures == 0, std::to_string(polytopes) + " polytopes (2-D and 3-D), " +
                             std::to_string(failures) + " failures, worst oracle residual " +
                             fmt(worst_oracle)};
}

Outcome c07_matrix(const Context& ctx) {
  return from_report(run_matrix_selftest(1000, 7, options(ctx, "c07")));
}

Outcome c08_smoothing_trends(const Context& ctx) {
  const ExperimentConfig cfg = config("double_integrator");
  const RunOptions o = options(ctx, "c08");
  CommandReport all;
  for (const SmoothnessReport& rep :
       {run_trend(cfg, o), run_barrier_sweep(cfg, o), run_clip(cfg, o)}) {
    for (const CheckResult& c : rep.checks) all.checks.push_back(c);
  }
  return from_report(all);
}

Outcome c09_imitation(const Context& ctx) {
  return from_report(run_imitation(config("double_integrator"), options(ctx, "c09")));
}

Outcome c10_tradeoff(const Context& ctx) {
  return from_report(run_tradeoff(config("toy1d"), options(ctx, "c10")));
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome(const Context&)> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> list = {
      {1, "explicit piece count", c01_piece_count},
      {2, "barrier Jacobian vs finite differences", c02_jacobian},
      {3, "convex-combination identity", c03_convex_combination},
      {4, "recentering", c04_recentering},
      {5, "bound sandwiches", c05_bounds},
      {6, "quadratic-over-polytope bounds", c06_quad_opt},
      {7, "matrix identities", c07_matrix},
      {8, "smoothing trends", c08_smoothing_trends},
      {9, "imitation trend", c09_imitation},
      {10, "tradeoff floor", c10_tradeoff},
  };
  return list;
}

}  // namespace
}  // namespace smoothmpc

int main(int argc, char** argv) {
  using namespace smoothmpc;
  Context ctx;
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (i + 1 < argc && arg == "--criterion") {
      only = std::stoi(argv[++i]);
    } else if (i + 1 < argc && arg == "--out") {
      ctx.out_dir = argv[++i];
    } else if (i + 1 < argc && arg == "--jobs") {
      ctx.jobs = std::stoi(argv[++i]);
    } else {
      std::cerr << "usage: smoothmpc_acceptance [--criterion N] [--out DIR] [--jobs J]\n";
      return 64;
    }
  }
  bool all_passed = true;
  bool ran = false;
  for (const Criterion& c : criteria()) {
    if (only != 0 && c.id != only) continue;
    ran = true;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run(ctx);
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s c%02d %s (%.1f s): %s\n", out.passed ? "PASS" : "FAIL", c.id, c.name,
                secs, out.detail.c_str());
    std::fflush(stdout);
    all_passed = all_passed && out.passed;
  }
  if (!ran) {
    std::cerr << "no criterion " << only << "\n";
    return 64;
  }
  return all_passed ? 0 : 1;
}

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


#include "smoothmpc/experiments/experiments.hpp"

#include <algorithm>
#include <functional>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <filesystem>
#include <limits>
#include <memory>
#include <ostream>
#include <random>
#include <sstream>

#include "smoothmpc/barrier_bounds.hpp"
#include "smoothmpc/barrier_mpc.hpp"
#include "smoothmpc/experiments/csv.hpp"
#include "smoothmpc/linalg.hpp"
#include "smoothmpc/mlp.hpp"
#include "smoothmpc/parallel.hpp"
#include "smoothmpc/policy.hpp"

namespace smoothmpc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void note(const RunOptions& opts, const std::string& line) {
  if (opts.log != nullptr) *opts.log << line << std::endl;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const size_t h = v.size() / 2;
  return v.size() % 2 == 1 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

std::string output_path(const RunOptions& opts, const std::string& file) {
  std::filesystem::create_directories(opts.out_dir);
  return (std::filesystem::path(opts.out_dir) / file).string();
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag,
                          std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(base),
                    static_cast<std::uint32_t>(base >> 32),
                    static_cast<std::uint32_t>(tag),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

/// State box half-widths; unbounded axes use 1.
Vector half_widths(const ExperimentConfig& cfg) {
  Vector hw = cfg.x_bound;
  for (Eigen::Index i = 0; i < hw.size(); ++i) {
    if (!std::isfinite(hw(i)) || hw(i) <= 0.0) hw(i) = 1.0;
  }
  return hw;
}

StateGrid metric_grid(const ExperimentConfig& cfg, int points) {
  const double scale = cfg.has_smoothness ? cfg.smoothness.grid_scale : 0.8;
  const Vector hw = scale * half_widths(cfg);
  return StateGrid::uniform(-hw, hw, points);
}

int metric_points(const ExperimentConfig& cfg) {
  return cfg.has_smoothness ? cfg.smoothness.grid : 41;
}

/// Restricts `p` to states where the MPC problem is feasible.
Policy gated(Policy p, std::shared_ptr<const ExplicitLaw> law) {
  Policy out = p;
  out.act = [p, law](const Vector& x) {
    law->solve(x);
    return p.act(x);
  };
  out.jacobian = [p, law](const Vector& x) {
    law->solve(x);
    return p.jacobian_at(x);
  };
  return out;
}

SmoothingConfig smoothing_config(const ExperimentConfig& cfg, double sigma,
                                 int samples, std::uint64_t seed) {
  SmoothingConfig sc;
  sc.sigma = sigma;
  sc.distribution = cfg.has_smoothness ? cfg.smoothness.distribution
                                       : NoiseDistribution::kUniformBall;
  sc.n_samples = samples;
  sc.seed = seed;
  return sc;
}

int smoothing_samples(const ExperimentConfig& cfg) {
  return cfg.has_smoothness ? cfg.smoothness.samples : 256;
}

}  // namespace

bool CommandReport::passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CheckResult& c) { return c.passed; });
}

int CommandReport::exit_code() const { return passed() ? 0 : 2; }

void CommandReport::add(std::string name, bool ok, std::string detail) {
  checks.push_back({std::move(name), ok, std::move(detail)});
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw InvalidArgument("log_log_slope: need two or more matching samples");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
      throw InvalidArgument("log_log_slope: samples must be positive");
    }
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

Vector first_region_boundary(const ExplicitLaw& law, const Vector& direction,
                             double reach) {
  const Vector dir = direction.normalized();
  const Matrix K0 = law.gain(Vector::Zero(dir.size()));
  const auto differs = [&](double t) {
    const Matrix K = law.gain(t * dir);
    return (K - K0).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + K0.cwiseAbs().maxCoeff());
  };
  const int steps = 1000;
  double lo = 0.0;
  double hi = -1.0;
  for (int i = 1; i <= steps; ++i) {
    const double t = reach * i / steps;
    try {
      if (differs(t)) {
        hi = t;
        break;
      }
    } catch (const InfeasibleError&) {
      break;
    }
    lo = t;
  }
  if (hi < 0.0) {
    throw InvalidArgument("first_region_boundary: no gain change along direction");
  }
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    (differs(mid) ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi) * dir;
}

// ---------------------------------------------------------------- pieces

PiecesReport run_pieces(const ExperimentConfig& cfg, const RunOptions& opts) {
  PiecesReport rep;
  const Vector hw = half_widths(cfg);
  const auto discover = [&](const ExperimentConfig& c, int res,
                            const std::string& label) {
    const auto t0 = Clock::now();
    PiecesRow row;
    row.resolution = res;
    row.scaling = label;
    row.discovery = discover_pieces(c.condensed(), StateGrid::uniform(-hw, hw, res),
                                    opts.jobs);
    row.seconds = seconds_since(t0);
    note(opts, "pieces: " + label + " " + std::to_string(res) + " points/axis -> " +
                   std::to_string(row.discovery.distinct_sigma) + " (" +
                   fmt(row.seconds) + " s)");
    return row;
  };
  const std::string primary =
      cfg.scaling == CostScaling::kConsistent ? "consistent" : "half_quadratic";
  for (int res : cfg.pieces.resolutions) rep.rows.push_back(discover(cfg, res, primary));
  if (cfg.pieces.as_printed_diagnostic && cfg.scaling == CostScaling::kConsistent) {
    ExperimentConfig alt = cfg;
    alt.scaling = CostScaling::kHalfQuadratic;
    rep.as_printed.push_back(discover(alt, cfg.pieces.resolutions.front(),
                                      "half_quadratic"));
  }
  rep.count = rep.rows.front().discovery.distinct_sigma;
  rep.stable = std::all_of(rep.rows.begin(), rep.rows.end(), [&](const PiecesRow& r) {
    return r.discovery.distinct_sigma == rep.count;
  });

  std::ostringstream counts;
  for (const auto& r : rep.rows) {
    counts << r.resolution << ":" << r.discovery.distinct_sigma << " ";
  }
  rep.add("piece count stable across resolutions", rep.stable, counts.str());
  if (cfg.pieces.expected >= 0) {
    std::string detail = "found " + std::to_string(rep.count) + ", expected " +
                         std::to_string(cfg.pieces.expected);
    if (!rep.as_printed.empty()) {
      detail += "; half_quadratic diagnostic " +
                std::to_string(rep.as_printed.front().discovery.distinct_sigma);
    }
    rep.add("piece count matches expected", rep.count == cfg.pieces.expected, detail);
  }

  CsvWriter csv(output_path(opts, "pieces.csv"),
                {{"resolution", "points/axis"}, {"scaling", "label"},
                 {"role", "label"}, {"distinct_sigma", "count"},
                 {"distinct_gain", "count"}, {"distinct_residual_sigma", "count"},
                 {"distinct_strict_sigma", "count"}, {"feasible_points", "count"},
                 {"infeasible_points", "count"}, {"full_solves", "count"},
                 {"seconds", "s"}},
                cfg.hash, "pieces");
  const auto write = [&](const PiecesRow& r, const std::string& role) {
    csv << r.resolution << r.scaling << role << r.discovery.distinct_sigma
        << r.discovery.distinct_gain << r.discovery.distinct_residual_sigma
        << r.discovery.distinct_strict_sigma << r.discovery.feasible_points
        << r.discovery.infeasible_points << r.discovery.full_solves << r.seconds;
    csv.end_row();
  };
  for (const auto& r : rep.rows) write(r, "primary");
  for (const auto& r : rep.as_printed) write(r, "diagnostic");
  rep.files.push_back(csv.path());

  CsvWriter gains(output_path(opts, "pieces_gains.csv"),
                  {{"sigma", "bits"}, {"occupancy", "grid points"},
                   {"K_first_input", "input/state (row-major)"},
                   {"k_first_input", "input"}},
                  cfg.hash, "pieces");
  const int nu = cfg.system.nu();
  for (const auto& p : rep.rows.front().discovery.pieces) {
    std::ostringstream K;
    std::ostringstream k;
    for (int i = 0; i < nu; ++i) {
      for (Eigen::Index j = 0; j < p.K.cols(); ++j) {
        K << (i + j > 0 ? " " : "") << fmt(p.K(i, j));
      }
      k << (i > 0 ? " " : "") << fmt(p.k(i));
    }
    gains << p.sigma.to_string() << p.occupancy << K.str() << k.str();
    gains.end_row();
  }
  rep.files.push_back(gains.path());
  return rep;
}

// ---------------------------------------------------------------- bounds

namespace {

struct BoundPoint {
  Vector x0;
  double eta = 0.0;
  std::vector<BoundReport> reports;
  std::string skip_reason;
};

}  // namespace

BoundsReport run_bounds(const ExperimentConfig& cfg, const RunOptions& opts) {
  if (!cfg.has_bounds) throw InvalidArgument("config has no bounds section");
  BoundsReport rep;
  const BoundsSettings& bs = cfg.bounds;
  auto qp = std::make_shared<const CondensedQP>(cfg.condensed());
  const BarrierProblem base = make_barrier_problem(qp, 1.0);
  const auto t0 = Clock::now();

  const Vector hw = half_widths(cfg);
  const auto disc = discover_pieces(*qp, StateGrid::uniform(-hw, hw, bs.piece_grid),
                                    opts.jobs);
  std::vector<ActiveSet> sets;
  for (const auto& p : disc.pieces) sets.push_back(p.sigma);
  const PieceConstants pc = piece_constants_over(*qp, sets);
  rep.C = pc.C;
  rep.L = pc.L;
  note(opts, "bounds: C=" + fmt(pc.C) + " L=" + fmt(pc.L) + " over " +
                 std::to_string(pc.sets) + " sets");

  // Points are drawn sequentially so the sweep is independent of jobs.
  std::mt19937_64 rng(derive_seed(cfg.seed, 0xB0, 0));
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> log_eta(std::log(bs.eta_min),
                                                 std::log(bs.eta_max));
  std::vector<BoundPoint> points;
  long attempts = 0;
  while (static_cast<int>(points.size()) < bs.points) {
    if (++attempts > 1000L * bs.points) {
      throw InfeasibleError("bounds: could not sample feasible states", Vector());
    }
    BoundPoint p;
    p.x0 = Vector(qp->nx);
    for (int i = 0; i < qp->nx; ++i) p.x0(i) = bs.state_scale * hw(i) * unit(rng);
    p.eta = std::exp(log_eta(rng));
    try {
      if (feasible_radii(*qp, p.x0).r < 1e-9) continue;
    } catch (const InfeasibleError&) {
      continue;
    }
    points.push_back(std::move(p));
  }
  for (double eta : bs.extra_eta) {
    BoundPoint p;
    p.x0 = Vector::Zero(qp->nx);
    p.eta = eta;
    if (!(eta > 0.0)) p.skip_reason = "eta must be positive";
    points.push_back(std::move(p));
  }

  const Vector gnorm = row_norms(qp->G);
  const double gmax = gnorm.size() > 0 ? gnorm.maxCoeff() : 0.0;
  parallel_for(static_cast<long>(points.size()), opts.jobs, [&](long i) {
    BoundPoint& p = points[static_cast<size_t>(i)];
    if (!p.skip_reason.empty()) return;
    const BarrierProblem bp = base.with_eta(p.eta);
    const FeasibleRadii rad = feasible_radii(*qp, p.x0);
    const BarrierSolution sol = solve_barrier(bp, p.x0);
    const QPSolution qs = solve_qp(*qp, p.x0);

    const double err = (sol.u_eta - qs.u_star).norm();
    p.reports.push_back(BoundReport::make("error_upper", err,
                                          opts.corrupt_factor * error_upper(bp)));

    const DirectionalBounds db =
        directional_bounds(*qp, p.eta, p.x0, qs.u_star, rad.r, rad.R);
    if (db.applicable) {
      const double proj = db.a.dot(sol.u_eta - qs.u_star);
      p.reports.push_back(BoundReport::make("directional_lower", db.lower, proj));
      p.reports.push_back(BoundReport::make("directional_upper", proj, db.upper));
    } else {
      for (const char* name : {"directional_lower", "directional_upper"}) {
        BoundReport r = BoundReport::make(name, 0.0, 0.0);
        r.applicable = false;
        p.reports.push_back(r);
      }
    }

    const double res = residual_lower_bound(bp, p.x0, qs.u_star, rad.r, rad.R);
    double min_phi = std::numeric_limits<double>::infinity();
    for (int k = 0; k < qp->m; ++k) {
      if (gnorm(k) > 1e-12 * gmax) min_phi = std::min(min_phi, sol.phi(k));
    }
    p.reports.push_back(BoundReport::make("residual_lower", res, min_phi));

    const HessianTensor hs = barrier_hessian(bp, p.x0, &sol);
    p.reports.push_back(BoundReport::make("hessian_upper", hs.norm,
                                          hessian_upper_bound(*qp, res, pc.C, pc.L)));
  });

  CsvWriter csv(output_path(opts, "bounds.csv"),
                {{"point", "index"}, {"x0", "state (space-separated)"},
                 {"eta", "1"}, {"bound", "label"}, {"lhs", "see quantity"},
                 {"rhs", "see quantity"}, {"quantity", "label"},
                 {"satisfied", "bool"}, {"applicable", "bool"}, {"note", "text"}},
                cfg.hash, "bounds");
  const std::map<std::string, std::string> quantity{
      {"error_upper", "|u_eta - u*| <= bound [input]"},
      {"directional_lower", "bound <= a'(u_eta - u*) [input]"},
      {"directional_upper", "a'(u_eta - u*) <= bound [input]"},
      {"residual_lower", "bound <= min residual [constraint]"},
      {"hessian_upper", "|d2u/dx2| <= bound [input/state^2]"}};
  for (size_t i = 0; i < points.size(); ++i) {
    const BoundPoint& p = points[i];
    std::ostringstream x;
    for (Eigen::Index j = 0; j < p.x0.size(); ++j) x << (j ? " " : "") << format_number(p.x0(j));
    if (!p.skip_reason.empty()) {
      ++rep.skipped;
      csv << static_cast<long>(i) << x.str() << p.eta << "all" << 0.0 << 0.0 << ""
          << 0L << 0L << p.skip_reason;
      csv.end_row();
      continue;
    }
    ++rep.points;
    for (const BoundReport& r : p.reports) {
      csv << static_cast<long>(i) << x.str() << p.eta << r.name << r.lhs << r.rhs
          << quantity.at(r.name) << static_cast<long>(r.satisfied)
          << static_cast<long>(r.applicable)
          << (r.applicable ? "" : "direction undefined: u* = K0 x0");
      csv.end_row();
      if (!r.applicable) continue;
      ++rep.evaluated[r.name];
      rep.violations[r.name] += r.satisfied ? 0 : 1;
      const double ratio = r.lhs > 0.0 ? r.rhs / r.lhs
                                       : std::numeric_limits<double>::infinity();
      auto it = rep.tightest.find(r.name);
      if (it == rep.tightest.end() || ratio < it->second) rep.tightest[r.name] = ratio;
    }
  }
  rep.files.push_back(csv.path());
  for (const auto& [name, count] : rep.evaluated) {
    const long v = rep.violations[name];
    rep.add(name, v == 0,
            std::to_string(v) + " violations over " + std::to_string(count) +
                " points, tightest rhs/lhs " + fmt(rep.tightest[name]));
  }
  note(opts, "bounds: " + std::to_string(rep.points) + " points in " +
                 fmt(seconds_since(t0)) + " s");
  return rep;
}

// ---------------------------------------------------------------- smoothness

namespace {

void write_sweep(CsvWriter& csv, const std::string& policy,
                 const std::vector<SweepRow>& rows) {
  for (const auto& r : rows) {
    csv << policy << r.parameter << r.metrics.L0_max << r.metrics.L1_max
        << r.hessian_norm_max << r.sup_error << r.projected_fraction << r.metrics.evaluated;
    csv.end_row();
  }
}

// Max |f(x) - explicit(x)| over the feasible grid points; with `fraction`
// also the mean projected share of the randomized draws.
double sweep_sup_error(const std::function<Vector(const Vector&, double*)>& f,
                       const ExplicitLaw& law, const StateGrid& grid, int jobs,
                       double* fraction = nullptr) {
  std::vector<double> err(static_cast<size_t>(grid.size()), -1.0);
  std::vector<double> frac(static_cast<size_t>(grid.size()), 0.0);
  parallel_for(grid.size(), jobs, [&](long i) {
    const Vector x = grid.point(i);
    // Boundary states with an empty interior have no barrier solution.
    try {
      const Vector ref = law.act(x);
      err[static_cast<size_t>(i)] = (f(x, &frac[static_cast<size_t>(i)]) - ref).norm();
    } catch (const InfeasibleError&) {
    }
  });
  double worst = 0.0;
  double total = 0.0;
  long count = 0;
  for (size_t i = 0; i < err.size(); ++i) {
    if (err[i] < 0.0) continue;
    worst = std::max(worst, err[i]);
    total += frac[i];
    ++count;
  }
  if (fraction != nullptr) *fraction = count > 0 ? total / static_cast<double>(count) : 0.0;
  return worst;
}

void barrier_sweep(const ExperimentConfig& cfg, const RunOptions& opts,
                   std::shared_ptr<const CondensedQP> qp, SmoothnessReport* rep) {
  const SmoothnessSettings& ss = cfg.smoothness;
  const StateGrid grid = metric_grid(cfg, ss.grid);
  std::vector<double> etas = ss.eta;
  std::sort(etas.begin(), etas.end());
  const BarrierProblem base = make_barrier_problem(qp, 1.0);
  const ExplicitLaw law(qp);
  for (double eta : etas) {
    const auto t0 = Clock::now();
    const BarrierProblem bp = base.with_eta(eta);
    SweepRow row;
    row.parameter = eta;
    row.metrics = smoothness_metrics(barrier_policy(bp), grid, opts.jobs);
    std::vector<double> hess(static_cast<size_t>(grid.size()), 0.0);
    parallel_for(grid.size(), opts.jobs, [&](long i) {
      try {
        const BarrierSolution s = solve_barrier(bp, grid.point(i));
        hess[static_cast<size_t>(i)] = barrier_hessian_analytic(bp, s).norm;
      } catch (const InfeasibleError&) {
      }
    });
    row.hessian_norm_max = *std::max_element(hess.begin(), hess.end());
    row.sup_error = sweep_sup_error(
        [&](const Vector& x, double*) { return pi_barrier(bp, x); }, law, grid, opts.jobs);
    rep->barrier_rows.push_back(row);
    note(opts, "smoothness: barrier eta=" + fmt(eta) + " L0=" + fmt(row.metrics.L0_max) +
                   " L1=" + fmt(row.metrics.L1_max) + " (" + fmt(seconds_since(t0)) + " s)");
  }
  bool monotone = true;
  std::ostringstream detail;
  for (size_t i = 0; i < rep->barrier_rows.size(); ++i) {
    const double l1 = rep->barrier_rows[i].metrics.L1_max;
    detail << fmt(rep->barrier_rows[i].parameter) << ":" << fmt(l1) << " ";
    if (i > 0 && l1 > (1.0 + ss.monotone_tol) * rep->barrier_rows[i - 1].metrics.L1_max) {
      monotone = false;
    }
  }
  rep->add("barrier L1_max non-increasing in eta", monotone, detail.str());
}

}  // namespace

SmoothnessReport run_barrier_sweep(const ExperimentConfig& cfg,
                                   const RunOptions& opts) {
  if (!cfg.has_smoothness) throw InvalidArgument("config has no smoothness section");
  SmoothnessReport rep;
  barrier_sweep(cfg, opts, std::make_shared<const CondensedQP>(cfg.condensed()), &rep);
  return rep;
}

SmoothnessReport run_trend(const ExperimentConfig& cfg, const RunOptions& opts) {
  if (!cfg.has_smoothness || !cfg.smoothness.has_trend) {
    throw InvalidArgument("config has no smoothness.trend section");
  }
  SmoothnessReport rep;
  const TrendSettings& ts = cfg.smoothness.trend;
  auto qp = std::make_shared<const CondensedQP>(cfg.condensed());
  auto law = std::make_shared<const ExplicitLaw>(qp);
  const Policy pol = explicit_policy(law);
  const FeasibleStateProjector projector(qp);
  const int nx = qp->nx;
  Vector dir = Vector::Unit(nx, 0);
  if (!ts.direction.empty()) {
    if (static_cast<int>(ts.direction.size()) != nx) {
      throw InvalidArgument("trend.direction length must equal the state dimension");
    }
    dir = Eigen::Map<const Vector>(ts.direction.data(), nx).normalized();
  }
  if (ts.center.empty()) {
    rep.trend_center = first_region_boundary(*law, dir, half_widths(cfg).maxCoeff());
  } else {
    if (static_cast<int>(ts.center.size()) != nx) {
      throw InvalidArgument("trend.center length must equal the state dimension");
    }
    rep.trend_center = Eigen::Map<const Vector>(ts.center.data(), nx);
  }
  const int count = 2 * ts.half_points + 1;
  std::vector<double> sig;
  std::vector<double> err;
  std::vector<double> lip;
  for (double sigma : ts.sigma) {
    const auto t0 = Clock::now();
    const SmoothingConfig sc = smoothing_config(cfg, sigma, ts.samples,
                                                derive_seed(cfg.seed, 0x7E, 0));
    const Matrix W = noise_draws(sc, nx);
    const double h = ts.spacing * sigma;
    std::vector<Vector> diff(static_cast<size_t>(count));
    std::vector<Matrix> jac(static_cast<size_t>(count));
    std::vector<char> ok(static_cast<size_t>(count), 0);
    parallel_for(count, opts.jobs, [&](long k) {
      const Vector x = rep.trend_center + (k - ts.half_points) * h * dir;
      Vector u;
      try {
        u = pol(x);
      } catch (const InfeasibleError&) {
        return;
      }
      const SmoothedValue v = pi_rs(pol, sc, x, &projector, &W);
      diff[static_cast<size_t>(k)] = v.mean - u;
      jac[static_cast<size_t>(k)] =
          pi_rs_jacobian(pol, sc, x, &projector, 1e-3 * sigma, &W);
      ok[static_cast<size_t>(k)] = 1;
    });
    TrendRow row;
    row.sigma = sigma;
    for (int k = 0; k < count; ++k) {
      if (!ok[static_cast<size_t>(k)]) continue;
      row.sup_error = std::max(row.sup_error, diff[static_cast<size_t>(k)].norm());
      if (k > 0 && ok[static_cast<size_t>(k - 1)]) {
        row.L1 = std::max(row.L1, spectral_norm(jac[static_cast<size_t>(k)] -
                                                jac[static_cast<size_t>(k - 1)]) / h);
      }
    }
    rep.trend.push_back(row);
    sig.push_back(sigma);
    err.push_back(row.sup_error);
    lip.push_back(row.L1);
    note(opts, "smoothness: trend sigma=" + fmt(sigma) + " sup_error=" +
                   fmt(row.sup_error) + " L1=" + fmt(row.L1) + " (" +
                   fmt(seconds_since(t0)) + " s)");
  }
  rep.error_slope = log_log_slope(sig, err);
  rep.lipschitz_slope = log_log_slope(sig, lip);
  rep.add("randomized sup-error slope",
          std::abs(rep.error_slope - ts.error_slope) <= ts.error_slope_tol,
          "slope " + fmt(rep.error_slope) + ", target " + fmt(ts.error_slope) +
              " +- " + fmt(ts.error_slope_tol));
  rep.add("randomized Jacobian-Lipschitz slope",
          std::abs(rep.lipschitz_slope - ts.lipschitz_slope) <= ts.lipschitz_slope_tol,
          "slope " + fmt(rep.lipschitz_slope) + ", target " + fmt(ts.lipschitz_slope) +
              " +- " + fmt(ts.lipschitz_slope_tol));
  return rep;
}

SmoothnessReport run_clip(const ExperimentConfig& cfg, const RunOptions& opts) {
  if (!cfg.has_smoothness || !cfg.smoothness.has_clip) {
    throw InvalidArgument("config has no smoothness.clip section");
  }
  SmoothnessReport rep;
  const ClipSettings& cs = cfg.smoothness.clip;
  const Policy clip = function_policy(1, 1, [](const Vector& x) {
    return Vector::Constant(1, std::clamp(-2.0 * x(0), -1.0, 1.0));
  });
  const SmoothingConfig sc =
      smoothing_config(cfg, cs.sigma, cs.samples, derive_seed(cfg.seed, 0xC1, 0));
  bool ok = true;
  double worst = 0.0;
  for (double x : cs.states) {
    const double v = pi_rs(clip, sc, Vector::Constant(1, x)).mean(0);
    rep.clip.emplace_back(x, v);
    worst = std::max(worst, std::abs(v));
    ok = ok && std::abs(v) <= cs.tolerance;
  }
  rep.add("clip example vanishes at large sigma", ok,
          "max |pi_rs| " + fmt(worst) + " at sigma " + fmt(cs.sigma) +
              ", tolerance " + fmt(cs.tolerance));
  note(opts, "smoothness: clip max |pi_rs| = " + fmt(worst));
  return rep;
}

SmoothnessReport run_tradeoff(const ExperimentConfig& cfg, const RunOptions& opts) {
  if (!cfg.has_tradeoff) throw InvalidArgument("config has no tradeoff section");
  if (cfg.system.nx() != 1 || cfg.system.nu() != 1) {
    throw InvalidArgument("tradeoff audit needs a scalar system");
  }
  SmoothnessReport rep;
  const TradeoffSettings& ts = cfg.tradeoff;
  auto qp = std::make_shared<const CondensedQP>(cfg.condensed());
  auto law = std::make_shared<const ExplicitLaw>(qp);
  const Policy f = explicit_policy(law);
  const FeasibleStateProjector projector(qp);

  const double kink = first_region_boundary(*law, Vector::Ones(1), ts.half_width)(0);
  if (kink >= ts.half_width) throw InvalidArgument("tradeoff: kink outside the window");
  const double a = law->gain(Vector::Constant(1, kink - 1e-6))(0, 0);
  const double b = law->gain(Vector::Constant(1, kink + 1e-6))(0, 0);
  note(opts, "tradeoff: kink at " + fmt(kink) + " slopes " + fmt(a) + ", " + fmt(b));

  const auto grid = [&](long n) {
    Vector xs(n);
    for (long i = 0; i < n; ++i) {
      xs(i) = -ts.half_width + 2.0 * ts.half_width * static_cast<double>(i) /
                                   static_cast<double>(n - 1);
    }
    return xs;
  };
  const auto sample = [&](const std::function<double(double)>& fn, const Vector& xs) {
    Vector out(xs.size());
    parallel_for(xs.size(), opts.jobs, [&](long i) { out(i) = fn(xs(i)); });
    return out;
  };
  const auto audit = [&](const std::string& variant, double parameter,
                         const std::function<double(double)>& g) {
    TradeoffRow row;
    row.variant = variant;
    row.parameter = parameter;
    const auto fval = [&](double x) { return f(Vector::Constant(1, x))(0); };
    const Vector coarse = grid(2001);
    const double eps0 =
        (sample(g, coarse) - sample(fval, coarse)).cwiseAbs().maxCoeff();
    const double spacing = eps0 / (4.0 * std::abs(a - b));
    const long n = std::min<long>(
        ts.max_points,
        std::max<long>(2001, static_cast<long>(std::ceil(2.0 * ts.half_width / spacing)) + 1));
    const Vector xs = grid(n);
    row.points = n;
    try {
      row.audit = tradeoff_audit(xs, sample(fval, xs), sample(g, xs), a, b);
    } catch (const ResolutionError& e) {
      row.note = e.what();
    }
    note(opts, "tradeoff: " + variant + " " + fmt(parameter) + " eps=" +
                   fmt(row.audit.epsilon) + " L1=" + fmt(row.audit.worst_grad_lipschitz) +
                   " floor=" + fmt(row.audit.theoretical_floor));
    rep.tradeoff.push_back(row);
  };

  const BarrierProblem base = make_barrier_problem(qp, 1.0);
  for (double eta : ts.eta) {
    const BarrierProblem bp = base.with_eta(eta);
    audit("barrier", eta,
          [&bp](double x) { return pi_barrier(bp, Vector::Constant(1, x))(0); });
  }
  // Midpoint rule on [-1, 1]: a deterministic quadrature of the 1-D
  // expectation, so the audit sees the smoothed function and not sampling
  // noise.
  Matrix W(ts.quadrature, 1);
  for (int i = 0; i < ts.quadrature; ++i) {
    W(i, 0) = -1.0 + (2.0 * i + 1.0) / ts.quadrature;
  }
  for (double sigma : ts.sigma) {
    SmoothingConfig sc = smoothing_config(cfg, sigma, ts.quadrature, 0);
    sc.distribution = NoiseDistribution::kUniformBox;
    audit("randomized", sigma, [&](double x) {
      return pi_rs(f, sc, Vector::Constant(1, x), &projector, &W).mean(0);
    });
  }
  bool ok = true;
  std::ostringstream detail;
  for (const auto& r : rep.tradeoff) {
    const bool pass = r.note.empty() && r.audit.satisfied;
    ok = ok && pass;
    detail << r.variant << "(" << fmt(r.parameter) << "):"
           << fmt(r.audit.worst_grad_lipschitz / std::max(r.audit.theoretical_floor, 1e-300))
           << " ";
  }
  rep.add("tradeoff floor respected (measured / floor)", ok, detail.str());
  return rep;
}

SmoothnessReport run_smoothness(const ExperimentConfig& cfg, const RunOptions& opts) {
  SmoothnessReport rep;
  if (cfg.has_smoothness) {
    const SmoothnessSettings& ss = cfg.smoothness;
    auto qp = std::make_shared<const CondensedQP>(cfg.condensed());
    auto law = std::make_shared<const ExplicitLaw>(qp);
    const Policy pol = explicit_policy(law);
    auto projector = std::make_shared<const FeasibleStateProjector>(qp);

    for (int res : {ss.grid, 2 * ss.grid - 1}) {
      SweepRow row;
      row.parameter = res;
      row.metrics = smoothness_metrics(pol, metric_grid(cfg, res), opts.jobs);
      rep.explicit_rows.push_back(row);
      note(opts, "smoothness: explicit grid " + std::to_string(res) +
                     " L1=" + fmt(row.metrics.L1_max));
    }
    barrier_sweep(cfg, opts, qp, &rep);
    const StateGrid grid = metric_grid(cfg, ss.grid);
    for (double sigma : ss.sigma) {
      const auto t0 = Clock::now();
      const SmoothingConfig sc =
          smoothing_config(cfg, sigma, ss.samples, derive_seed(cfg.seed, 0x5A, 0));
      SweepRow row;
      row.parameter = sigma;
      row.metrics = smoothness_metrics(
          gated(randomized_policy(pol, sc, projector, 1e-3 * sigma), law), grid, opts.jobs);
      const Matrix draws = noise_draws(sc, qp->nx);
      row.sup_error = sweep_sup_error(
          [&](const Vector& x, double* frac) {
            const SmoothedValue v = pi_rs(pol, sc, x, projector.get(), &draws);
            *frac = v.projected_fraction;
            return Vector(v.mean);
          },
          *law, grid, opts.jobs, &row.projected_fraction);
      rep.randomized_rows.push_back(row);
      note(opts, "smoothness: randomized sigma=" + fmt(sigma) + " L0=" +
                     fmt(row.metrics.L0_max) + " L1=" + fmt(row.metrics.L1_max) + " (" +
                     fmt(seconds_since(t0)) + " s)");
    }
    if (ss.has_trend) {
      SmoothnessReport t = run_trend(cfg, opts);
      rep.trend = t.trend;
      rep.trend_center = t.trend_center;
      rep.error_slope = t.error_slope;
      rep.lipschitz_slope = t.lipschitz_slope;
      rep.checks.insert(rep.checks.end(), t.checks.begin(), t.checks.end());
    }
    if (ss.has_clip) {
      SmoothnessReport c = run_clip(cfg, opts);
      rep.clip = c.clip;
      rep.checks.insert(rep.checks.end(), c.checks.begin(), c.checks.end());
    }
    CsvWriter csv(output_path(opts, "smoothness.csv"),
                  {{"policy", "label"}, {"parameter", "grid points|eta|sigma"},
                   {"L0_max", "input/state"}, {"L1_max", "input/state^2"},
                   {"hessian_norm_max", "input/state^2"}, {"sup_error", "input"},
                   {"projected_fraction", "1"}, {"evaluated", "count"}},
                  cfg.hash, "smoothness");
    write_sweep(csv, "explicit", rep.explicit_rows);
    write_sweep(csv, "barrier", rep.barrier_rows);
    write_sweep(csv, "randomized", rep.randomized_rows);
    rep.files.push_back(csv.path());
    if (ss.has_trend) {
      CsvWriter tc(output_path(opts, "smoothness_trend.csv"),
                   {{"sigma", "state"}, {"sup_error", "input"},
                    {"L1", "input/state^2"}},
                   cfg.hash, "smoothness");
      for (const auto& r : rep.trend) {
        tc << r.sigma << r.sup_error << r.L1;
        tc.end_row();
      }
      rep.files.push_back(tc.path());
    }
    if (ss.has_clip) {
      CsvWriter cc(output_path(opts, "smoothness_clip.csv"),
                   {{"x", "state"}, {"pi_rs", "input"}}, cfg.hash, "smoothness");
      for (const auto& [x, v] : rep.clip) {
        cc << x << v;
        cc.end_row();
      }
      rep.files.push_back(cc.path());
    }
  }
  if (cfg.has_tradeoff) {
    SmoothnessReport t = run_tradeoff(cfg, opts);
    rep.tradeoff = t.tradeoff;
    rep.checks.insert(rep.checks.end(), t.checks.begin(), t.checks.end());
    CsvWriter tc(output_path(opts, "tradeoff.csv"),
                 {{"variant", "label"}, {"parameter", "eta|sigma"},
                  {"points", "count"}, {"epsilon", "input"},
                  {"grad_lipschitz", "input/state^2"}, {"floor", "input/state^2"},
                  {"satisfied", "bool"}, {"note", "text"}},
                 cfg.hash, "smoothness");
    for (const auto& r : rep.tradeoff) {
      tc << r.variant << r.parameter << r.points << r.audit.epsilon
         << r.audit.worst_grad_lipschitz << r.audit.theoretical_floor
         << static_cast<long>(r.audit.satisfied) << r.note;
      tc.end_row();
    }
    rep.files.push_back(tc.path());
  }
  if (!cfg.has_smoothness && !cfg.has_tradeoff) {
    throw InvalidArgument("config has neither smoothness nor tradeoff section");
  }
  return rep;
}

// ---------------------------------------------------------------- imitation

namespace {

/// sigma with L1(sigma) = target by log-log interpolation of the calibration
/// curve, scanning from the largest sigma down. Clamped at the ends.
double match_sigma(const std::vector<std::pair<double, double>>& calib,
                   double target, bool* in_range) {
  for (size_t i = calib.size() - 1; i > 0; --i) {
    const auto [s_hi, l_hi] = calib[i];
    const auto [s_lo, l_lo] = calib[i - 1];
    const double lo = std::min(l_hi, l_lo);
    const double hi = std::max(l_hi, l_lo);
    if (target >= lo && target <= hi && hi > lo) {
      *in_range = true;
      const double t = (std::log(target) - std::log(l_hi)) /
                       (std::log(l_lo) - std::log(l_hi));
      return std::exp(std::log(s_hi) + t * (std::log(s_lo) - std::log(s_hi)));
    }
  }
  *in_range = false;
  return target < calib.back().second ? calib.back().first : calib.front().first;
}

}  // namespace

ImitationReport run_imitation(const ExperimentConfig& cfg, const RunOptions& opts) {
  if (!cfg.has_imitation) throw InvalidArgument("config has no imitation section");
  ImitationReport rep;
  const ImitationSettings& is = cfg.imitation;
  const auto t_start = Clock::now();
  auto qp = std::make_shared<const CondensedQP>(cfg.condensed());
  auto law = std::make_shared<const ExplicitLaw>(qp);
  const Policy mpc = explicit_policy(law);
  auto projector = std::make_shared<const FeasibleStateProjector>(qp);
  const BarrierProblem base = make_barrier_problem(qp, 1.0);
  const StateGrid grid = metric_grid(cfg, metric_points(cfg));
  const int samples = smoothing_samples(cfg);

  std::vector<double> calib_sigma = is.sigma_calibration;
  std::sort(calib_sigma.begin(), calib_sigma.end());
  for (double sigma : calib_sigma) {
    const SmoothingConfig sc =
        smoothing_config(cfg, sigma, samples, derive_seed(cfg.seed, 0xCA, 0));
    const double l1 =
        smoothness_metrics(gated(randomized_policy(mpc, sc, projector, 1e-3 * sigma), law),
                           grid, opts.jobs)
            .L1_max;
    rep.calibration.emplace_back(sigma, l1);
    note(opts, "imitation: calibration sigma=" + fmt(sigma) + " L1=" + fmt(l1));
  }

  std::vector<double> etas = is.eta;
  std::sort(etas.begin(), etas.end());
  for (double eta : etas) {
    ImitationLevel lv;
    lv.eta = eta;
    lv.barrier_L1 =
        smoothness_metrics(barrier_policy(base.with_eta(eta)), grid, opts.jobs).L1_max;
    lv.sigma = match_sigma(rep.calibration, lv.barrier_L1, &lv.matched_in_range);
    const SmoothingConfig sc =
        smoothing_config(cfg, lv.sigma, samples, derive_seed(cfg.seed, 0xCA, 0));
    lv.randomized_L1 =
        smoothness_metrics(gated(randomized_policy(mpc, sc, projector, 1e-3 * lv.sigma), law),
                           grid, opts.jobs)
            .L1_max;
    note(opts, "imitation: level eta=" + fmt(eta) + " L1=" + fmt(lv.barrier_L1) +
                   " matched sigma=" + fmt(lv.sigma) + " L1=" + fmt(lv.randomized_L1));
    rep.levels.push_back(lv);
  }

  InitialStateDistribution dist;
  dist.half_widths = half_widths(cfg);
  dist.feasible = mpc_feasibility(law);

  CsvWriter curves(output_path(opts, "imitation_curves.csv"),
                   {{"level", "index"}, {"expert", "label"}, {"seed", "index"},
                    {"step", "count"}, {"train_loss", "input^2"},
                    {"validation_loss", "input^2"}},
                   cfg.hash, "imitate");
  for (size_t li = 0; li < rep.levels.size(); ++li) {
    ImitationLevel& lv = rep.levels[li];
    double sums[2] = {0.0, 0.0};
    std::vector<double> per_seed[2];
    for (int s = 0; s < is.seeds; ++s) {
      const std::uint64_t data_seed = derive_seed(cfg.seed, 0xDA, static_cast<std::uint64_t>(s));
      const std::uint64_t eval_seed = derive_seed(cfg.seed, 0xE7, static_cast<std::uint64_t>(s));
      std::vector<Vector> eval_states;
      for (int i = 0; i < is.eval_states; ++i) {
        eval_states.push_back(dist.sample(eval_seed, static_cast<std::uint64_t>(i)));
      }
      for (int e = 0; e < 2; ++e) {
        const auto t0 = Clock::now();
        ImitationRun run;
        run.level = static_cast<int>(li);
        run.seed = s;
        Policy expert;
        if (e == 0) {
          run.expert = "barrier";
          run.parameter = lv.eta;
          expert = barrier_policy(base.with_eta(lv.eta));
        } else {
          run.expert = "randomized";
          run.parameter = lv.sigma;
          const SmoothingConfig sc = smoothing_config(
              cfg, lv.sigma, samples, derive_seed(cfg.seed, 0x5E, static_cast<std::uint64_t>(s)));
          expert = randomized_policy(mpc, sc, projector, 1e-3 * lv.sigma);
        }
        const ImitationDataset ds =
            sample_dataset(cfg.system, expert, dist, is.N, is.K, data_seed, false, opts.jobs);
        TrainConfig tc = is.train;
        tc.seed = derive_seed(cfg.seed, 0x7A, static_cast<std::uint64_t>(s));
        tc.jobs = opts.jobs;
        const TrainResult tr = train_imitator(ds, tc, half_widths(cfg));
        for (size_t k = 0; k < tr.logged_steps.size(); ++k) {
          curves << static_cast<long>(li) << run.expert << s << tr.logged_steps[k]
                 << tr.train_loss[k] << tr.validation_loss[k];
          curves.end_row();
        }
        const Policy learner = learned_policy(std::make_shared<const MLP>(tr.model));
        const ImitationError ie =
            imitation_error(cfg.system, expert, learner, eval_states, is.K, opts.jobs);
        run.mean_error = ie.mean_error;
        run.max_error = ie.max_error;
        run.sup_policy_error = ie.sup_policy_error;
        run.train_loss = tr.train_loss.empty() ? 0.0 : tr.train_loss.back();
        run.validation_loss = tr.validation_loss.empty() ? 0.0 : tr.validation_loss.back();
        sums[e] += run.mean_error;
        per_seed[e].push_back(run.mean_error);
        rep.runs.push_back(run);
        note(opts, "imitation: level " + std::to_string(li) + " " + run.expert +
                       " seed " + std::to_string(s) + " error=" + fmt(run.mean_error) +
                       " (" + fmt(seconds_since(t0)) + " s)");
      }
    }
    lv.barrier_error = sums[0] / is.seeds;
    lv.randomized_error = sums[1] / is.seeds;
    lv.barrier_wins = lv.barrier_error < lv.randomized_error;
    for (int s = 0; s < is.seeds; ++s) {
      lv.seed_wins += per_seed[0][static_cast<size_t>(s)] < per_seed[1][static_cast<size_t>(s)] ? 1 : 0;
    }
    lv.barrier_median = median(per_seed[0]);
    lv.randomized_median = median(per_seed[1]);
  }
  rep.files.push_back(curves.path());

  long wins = 0;
  for (const auto& lv : rep.levels) wins += lv.barrier_wins ? 1 : 0;
  rep.win_fraction = rep.levels.empty() ? 0.0
                                        : static_cast<double>(wins) /
                                              static_cast<double>(rep.levels.size());
  const size_t n = rep.levels.size();
  const size_t top = static_cast<size_t>(std::ceil(is.top_fraction * static_cast<double>(n)));
  rep.top_half_monotone = true;
  std::ostringstream mono;
  for (size_t i = n - std::min(top, n); i < n; ++i) {
    mono << fmt(rep.levels[i].eta) << ":" << fmt(rep.levels[i].barrier_error) << " ";
    if (i > n - std::min(top, n) &&
        rep.levels[i].barrier_error > rep.levels[i - 1].barrier_error) {
      rep.top_half_monotone = false;
    }
  }
  std::ostringstream wins_detail;
  wins_detail << wins << "/" << n << " levels on seed means (seed-level wins:";
  for (const auto& lv : rep.levels) wins_detail << " " << lv.seed_wins << "/" << is.seeds;
  wins_detail << ")";
  rep.add("barrier beats randomized at matched L1", rep.win_fraction >= is.win_fraction,
          wins_detail.str());
  rep.add("barrier error non-increasing over the top eta levels", rep.top_half_monotone,
          mono.str());

  CsvWriter runs(output_path(opts, "imitation_runs.csv"),
                 {{"level", "index"}, {"expert", "label"}, {"parameter", "eta|sigma"},
                  {"seed", "index"}, {"mean_error", "state"}, {"max_error", "state"},
                  {"sup_policy_error", "input"}, {"train_loss", "input^2"},
                  {"validation_loss", "input^2"}},
                 cfg.hash, "imitate");
  for (const auto& r : rep.runs) {
    runs << r.level << r.expert << r.parameter << r.seed << r.mean_error << r.max_error
         << r.sup_policy_error << r.train_loss << r.validation_loss;
    runs.end_row();
  }
  rep.files.push_back(runs.path());
  CsvWriter levels(output_path(opts, "imitation_levels.csv"),
                   {{"eta", "1"}, {"barrier_L1", "input/state^2"}, {"sigma", "state"},
                    {"randomized_L1", "input/state^2"}, {"matched_in_range", "bool"},
                    {"barrier_error", "state"}, {"randomized_error", "state"},
                    {"barrier_wins", "bool"}, {"barrier_median", "state"},
                    {"randomized_median", "state"}, {"seed_wins", "count"}},
                   cfg.hash, "imitate");
  for (const auto& lv : rep.levels) {
    levels << lv.eta << lv.barrier_L1 << lv.sigma << lv.randomized_L1
           << static_cast<long>(lv.matched_in_range) << lv.barrier_error
           << lv.randomized_error << static_cast<long>(lv.barrier_wins) << lv.barrier_median
           << lv.randomized_median << lv.seed_wins;
    levels.end_row();
  }
  rep.files.push_back(levels.path());
  CsvWriter calib(output_path(opts, "imitation_calibration.csv"),
                  {{"sigma", "state"}, {"randomized_L1", "input/state^2"}}, cfg.hash,
                  "imitate");
  for (const auto& [s, l] : rep.calibration) {
    calib << s << l;
    calib.end_row();
  }
  rep.files.push_back(calib.path());
  note(opts, "imitation: done in " + fmt(seconds_since(t_start)) + " s");
  return rep;
}

// ---------------------------------------------------------------- matrix

MatrixReport run_matrix_selftest(int instances, unsigned seed, const RunOptions& opts) {
  MatrixReport rep;
  rep.lines = matrix_selftest(instances, seed);
  CsvWriter csv(output_path(opts, "matrix_selftest.csv"),
                {{"identity", "label"}, {"instances", "count"}, {"failures", "count"},
                 {"worst_residual", "1"}, {"tolerance", "1"}},
                "n/a seed=" + std::to_string(seed), "matrix-selftest");
  for (const auto& l : rep.lines) {
    csv << l.name << l.instances << l.failures << l.worst << l.tolerance;
    csv.end_row();
    rep.add(l.name, l.failures == 0,
            std::to_string(l.failures) + "/" + std::to_string(l.instances) +
                " failures, worst " + fmt(l.worst) + " (tol " + fmt(l.tolerance) + ")");
  }
  rep.files.push_back(csv.path());
  return rep;
}

}  // namespace smoothmpc

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

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "smoothmpc/experiments/config.hpp"
#include "smoothmpc/explicit_mpc.hpp"
#include "smoothmpc/matrix_analysis.hpp"
#include "smoothmpc/simulation.hpp"
#include "smoothmpc/smoothing.hpp"

namespace smoothmpc {

struct RunOptions {
  std::string out_dir = ".";
  int jobs = 1;
  /// Scales the right-hand side of the error bound. Values below 1 corrupt
  /// the constant and exist only as a negative control.
  double corrupt_factor = 1.0;
  std::ostream* log = nullptr;  // progress lines; null for silence
};

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct CommandReport {
  std::vector<CheckResult> checks;
  std::vector<std::string> files;

  bool passed() const;
  /// 0 when every check passed, 2 otherwise.
  int exit_code() const;
  void add(std::string name, bool passed, std::string detail);
};

// ---------------------------------------------------------------- pieces

struct PiecesRow {
  int resolution = 0;
  std::string scaling;
  DiscoveryResult discovery;
  double seconds = 0.0;
};

struct PiecesReport : CommandReport {
  std::vector<PiecesRow> rows;  // consistent scaling first, one per resolution
  std::vector<PiecesRow> as_printed;  // diagnostic, first resolution only
  int count = 0;                // distinct working sets at the first resolution
  bool stable = false;
};

PiecesReport run_pieces(const ExperimentConfig& cfg, const RunOptions& opts);

// ---------------------------------------------------------------- bounds

struct BoundsReport : CommandReport {
  long points = 0;
  long skipped = 0;
  std::map<std::string, long> violations;  // per bound name
  std::map<std::string, long> evaluated;
  std::map<std::string, double> tightest;  // min over points of rhs / lhs
  double C = 0.0;
  double L = 0.0;
};

BoundsReport run_bounds(const ExperimentConfig& cfg, const RunOptions& opts);

// ---------------------------------------------------------------- smoothness

struct SweepRow {
  double parameter = 0.0;  // eta, sigma or grid resolution
  SmoothnessMetrics metrics;
  double hessian_norm_max = 0.0;  // barrier rows only
  double sup_error = 0.0;         // max |policy - explicit| over feasible grid points
  double projected_fraction = 0.0;  // randomized rows: mean share of projected draws
};

struct TrendRow {
  double sigma = 0.0;
  double sup_error = 0.0;
  double L1 = 0.0;
};

struct TradeoffRow {
  std::string variant;  // "barrier" or "randomized"
  double parameter = 0.0;
  long points = 0;
  TradeoffAudit audit;
  std::string note;
};

struct SmoothnessReport : CommandReport {
  std::vector<SweepRow> explicit_rows;
  std::vector<SweepRow> barrier_rows;
  std::vector<SweepRow> randomized_rows;
  std::vector<TrendRow> trend;
  Vector trend_center;
  double error_slope = 0.0;
  double lipschitz_slope = 0.0;
  std::vector<std::pair<double, double>> clip;  // (x, pi_rs(x))
  std::vector<TradeoffRow> tradeoff;
};

/// Runs the sections present in the config: grid sweeps, trend probe, clip
/// example and the 1-D tradeoff audit.
SmoothnessReport run_smoothness(const ExperimentConfig& cfg,
                                const RunOptions& opts);

/// Trend probe only (sup error and Jacobian-Lipschitz along a line through
/// a region boundary of the explicit law).
SmoothnessReport run_trend(const ExperimentConfig& cfg, const RunOptions& opts);

/// Clip example only.
SmoothnessReport run_clip(const ExperimentConfig& cfg, const RunOptions& opts);

/// Barrier eta sweep only.
SmoothnessReport run_barrier_sweep(const ExperimentConfig& cfg,
                                   const RunOptions& opts);

/// 1-D tradeoff audit only.
SmoothnessReport run_tradeoff(const ExperimentConfig& cfg,
                              const RunOptions& opts);

// ---------------------------------------------------------------- imitation

struct ImitationRun {
  int level = 0;
  std::string expert;  // "barrier" or "randomized"
  double parameter = 0.0;
  int seed = 0;
  double mean_error = 0.0;  // mean over eval states of max_t |x_hat - x*|
  double max_error = 0.0;
  double sup_policy_error = 0.0;
  double train_loss = 0.0;
  double validation_loss = 0.0;
};

struct ImitationLevel {
  double eta = 0.0;
  double barrier_L1 = 0.0;
  double sigma = 0.0;
  double randomized_L1 = 0.0;
  bool matched_in_range = false;
  double barrier_error = 0.0;     // mean over seeds
  double randomized_error = 0.0;
  bool barrier_wins = false;      // decided on the seed means
  // Diagnostics, not used by the checks.
  double barrier_median = 0.0;
  double randomized_median = 0.0;
  int seed_wins = 0;              // seeds where barrier beats randomized
};

struct ImitationReport : CommandReport {
  std::vector<ImitationLevel> levels;
  std::vector<ImitationRun> runs;
  std::vector<std::pair<double, double>> calibration;  // (sigma, L1)
  double win_fraction = 0.0;
  bool top_half_monotone = false;
};

ImitationReport run_imitation(const ExperimentConfig& cfg,
                              const RunOptions& opts);

// ---------------------------------------------------------------- matrix

struct MatrixReport : CommandReport {
  std::vector<SelftestLine> lines;
};

MatrixReport run_matrix_selftest(int instances, unsigned seed,
                                 const RunOptions& opts);

// ---------------------------------------------------------------- helpers

/// Least-squares slope of log(y) against log(x).
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

/// First point along `direction` from the origin where the explicit gain
/// changes, located by bisection to 1e-10.
Vector first_region_boundary(const ExplicitLaw& law, const Vector& direction,
                             double reach);

}  // namespace smoothmpc

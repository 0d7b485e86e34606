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
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "smoothmpc/mlp.hpp"
#include "smoothmpc/mpc_core.hpp"
#include "smoothmpc/smoothing.hpp"

namespace smoothmpc {

struct PiecesSettings {
  std::vector<int> resolutions{401, 801};
  int expected = -1;  // negative: no expected count
  bool as_printed_diagnostic = true;
};

struct BoundsSettings {
  int points = 500;
  double eta_min = 1e-4;
  double eta_max = 1e2;
  double state_scale = 0.9;           // x0 drawn from this fraction of the box
  std::vector<double> extra_eta;      // appended at x0 = 0; eta <= 0 is skipped
  int piece_grid = 201;               // grid for the piece constants C, L
};

struct TrendSettings {
  std::vector<double> sigma{1e-2, 3.16e-2, 1e-1, 3.16e-1, 1.0, 3.16, 10.0};
  int samples = 2000;
  int half_points = 24;   // probe points on each side of the center
  double spacing = 0.125; // probe spacing as a fraction of sigma
  std::vector<double> center;     // empty: origin
  std::vector<double> direction;  // empty: first axis
  double error_slope = 1.0;
  double error_slope_tol = 0.15;
  double lipschitz_slope = -1.0;
  double lipschitz_slope_tol = 0.2;
};

struct ClipSettings {
  double sigma = 100.0;
  int samples = 100000;
  std::vector<double> states{-1.0, -0.5, 0.0, 0.5, 1.0};
  double tolerance = 0.05;
};

struct SmoothnessSettings {
  std::vector<double> eta;
  std::vector<double> sigma;
  int grid = 41;
  double grid_scale = 0.8;  // fraction of the state box covered by the grid
  NoiseDistribution distribution = NoiseDistribution::kUniformBall;
  int samples = 256;
  double monotone_tol = 0.05;
  bool has_trend = false;
  TrendSettings trend;
  bool has_clip = false;
  ClipSettings clip;
};

struct ImitationSettings {
  int N = 20;
  int K = 20;
  int seeds = 5;
  std::vector<double> eta;
  std::vector<double> sigma_calibration;  // sigma grid used to match L1
  int eval_states = 20;
  double top_fraction = 0.5;
  double win_fraction = 0.8;
  TrainConfig train;
};

struct TradeoffSettings {
  std::vector<double> eta;
  std::vector<double> sigma;
  double half_width = 2.0;
  int quadrature = 4001;      // stratified draws for the 1-D expectation
  int max_points = 400001;
};

/// Single configuration driving every command.
struct ExperimentConfig {
  std::string name;
  LinearSystem system;
  Matrix Q;
  Matrix R;
  int horizon = 1;
  Vector x_bound;
  Vector u_bound;
  CostScaling scaling = CostScaling::kConsistent;
  std::uint64_t seed = 0;

  PiecesSettings pieces;
  bool has_bounds = false;
  BoundsSettings bounds;
  bool has_smoothness = false;
  SmoothnessSettings smoothness;
  bool has_imitation = false;
  ImitationSettings imitation;
  bool has_tradeoff = false;
  TradeoffSettings tradeoff;

  nlohmann::json source;  // normalized document the hash is taken over
  std::string hash;       // 16 hex digits

  StageCost cost() const;
  BoxlikeConstraints constraints() const;
  CondensedQP condensed() const;
};

/// Validates against the schema; unknown keys are rejected. Throws
/// InvalidArgument naming the offending path.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);

/// FNV-1a over the compact dump of `doc` (keys sorted).
std::string config_hash(const nlohmann::json& doc);

}  // namespace smoothmpc

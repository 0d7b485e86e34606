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


#include "smoothmpc/experiments/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>

namespace smoothmpc {

namespace {

using nlohmann::json;

/// Typed access to one JSON object; tracks consumed keys so that unknown
/// keys can be rejected.
class Section {
 public:
  Section(const json& doc, std::string path) : doc_(doc), path_(std::move(path)) {
    if (!doc_.is_object()) fail(path_, "expected an object");
  }

  bool has(const std::string& key) const { return doc_.contains(key); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    if (!doc_.contains(key)) fail(at(key), "missing required key");
    return doc_.at(key);
  }

  Section child(const std::string& key) { return Section(raw(key), at(key)); }

  double number(const std::string& key, double fallback, bool required = false) {
    if (!present(key, required)) return fallback;
    const json& v = raw(key);
    if (!v.is_number()) fail(at(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(at(key), "must be finite");
    return d;
  }

  double positive(const std::string& key, double fallback, bool required = false) {
    const double d = number(key, fallback, required);
    if (!(d > 0.0)) fail(at(key), "must be positive");
    return d;
  }

  int integer(const std::string& key, int fallback, int min_value,
              bool required = false) {
    if (!present(key, required)) return fallback;
    const json& v = raw(key);
    if (!v.is_number_integer()) fail(at(key), "expected an integer");
    const long long i = v.get<long long>();
    if (i < min_value || i > std::numeric_limits<int>::max()) {
      fail(at(key), "must be an integer >= " + std::to_string(min_value));
    }
    return static_cast<int>(i);
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) {
    if (!present(key, false)) return fallback;
    const json& v = raw(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      fail(at(key), "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!present(key, false)) return fallback;
    const json& v = raw(key);
    if (!v.is_boolean()) fail(at(key), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback,
                     bool required = false) {
    if (!present(key, required)) return fallback;
    const json& v = raw(key);
    if (!v.is_string()) fail(at(key), "expected a string");
    return v.get<std::string>();
  }

  /// Array of numbers; null entries map to +infinity when allowed.
  std::vector<double> numbers(const std::string& key,
                              const std::vector<double>& fallback,
                              bool required = false, bool allow_null = false,
                              bool nonempty = true) {
    if (!present(key, required)) return fallback;
    const json& v = raw(key);
    if (!v.is_array()) fail(at(key), "expected an array");
    std::vector<double> out;
    for (size_t i = 0; i < v.size(); ++i) {
      const std::string p = at(key) + "[" + std::to_string(i) + "]";
      if (v[i].is_null() && allow_null) {
        out.push_back(std::numeric_limits<double>::infinity());
      } else if (v[i].is_number() && std::isfinite(v[i].get<double>())) {
        out.push_back(v[i].get<double>());
      } else {
        fail(p, "expected a finite number");
      }
    }
    if (nonempty && out.empty()) fail(at(key), "must be nonempty");
    return out;
  }

  std::vector<double> positives(const std::string& key,
                                const std::vector<double>& fallback,
                                bool required = false) {
    std::vector<double> out = numbers(key, fallback, required);
    for (double d : out) {
      if (!(d > 0.0)) fail(at(key), "entries must be positive");
    }
    return out;
  }

  Matrix matrix(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_array() || v.empty() || !v[0].is_array() || v[0].empty()) {
      fail(at(key), "expected a nonempty array of rows");
    }
    const size_t rows = v.size();
    const size_t cols = v[0].size();
    Matrix M(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (size_t i = 0; i < rows; ++i) {
      if (!v[i].is_array() || v[i].size() != cols) {
        fail(at(key), "rows must have equal length");
      }
      for (size_t j = 0; j < cols; ++j) {
        if (!v[i][j].is_number()) fail(at(key), "expected numbers");
        M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            v[i][j].get<double>();
      }
    }
    if (!M.allFinite()) fail(at(key), "entries must be finite");
    return M;
  }

  void finish() const {
    for (auto it = doc_.begin(); it != doc_.end(); ++it) {
      if (!seen_.count(it.key())) fail(at(it.key()), "unknown key");
    }
  }

  std::string at(const std::string& key) const { return path_ + "." + key; }

  [[noreturn]] static void fail(const std::string& path, const std::string& msg) {
    throw InvalidArgument("config " + path + ": " + msg);
  }

 private:
  bool present(const std::string& key, bool required) {
    seen_.insert(key);
    if (doc_.contains(key)) return true;
    if (required) fail(at(key), "missing required key");
    return false;
  }

  const json& doc_;
  std::string path_;
  std::set<std::string> seen_;
};

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

PiecesSettings parse_pieces(Section s) {
  PiecesSettings p;
  if (s.has("resolutions")) {
    p.resolutions.clear();
    for (double r : s.numbers("resolutions", {})) {
      if (r < 2 || r != std::floor(r)) {
        Section::fail(s.at("resolutions"), "entries must be integers >= 2");
      }
      p.resolutions.push_back(static_cast<int>(r));
    }
  }
  p.expected = s.integer("expected", -1, -1);
  p.as_printed_diagnostic = s.boolean("as_printed_diagnostic", true);
  s.finish();
  return p;
}

BoundsSettings parse_bounds(Section s) {
  BoundsSettings b;
  b.points = s.integer("points", b.points, 1);
  b.eta_min = s.positive("eta_min", b.eta_min);
  b.eta_max = s.positive("eta_max", b.eta_max);
  if (b.eta_max < b.eta_min) Section::fail(s.at("eta_max"), "must be >= eta_min");
  b.state_scale = s.positive("state_scale", b.state_scale);
  if (b.state_scale >= 1.0) Section::fail(s.at("state_scale"), "must be < 1");
  b.extra_eta = s.numbers("extra_eta", {}, false, false, false);
  b.piece_grid = s.integer("piece_grid", b.piece_grid, 2);
  s.finish();
  return b;
}

SmoothnessSettings parse_smoothness(Section s) {
  SmoothnessSettings m;
  m.eta = s.positives("eta", {}, true);
  m.sigma = s.positives("sigma", {}, true);
  m.grid = s.integer("grid", m.grid, 3);
  m.grid_scale = s.positive("grid_scale", m.grid_scale);
  if (m.grid_scale > 1.0) Section::fail(s.at("grid_scale"), "must be <= 1");
  const std::string dist = s.string("distribution", "uniform-ball");
  try {
    m.distribution = parse_distribution(dist);
  } catch (const InvalidArgument&) {
    Section::fail(s.at("distribution"), "unknown distribution '" + dist + "'");
  }
  m.samples = s.integer("samples", m.samples, 2);
  m.monotone_tol = s.number("monotone_tol", m.monotone_tol);
  if (s.has("trend")) {
    Section t = s.child("trend");
    m.has_trend = true;
    TrendSettings& tr = m.trend;
    tr.sigma = t.positives("sigma", tr.sigma);
    if (tr.sigma.size() < 2) Section::fail(t.at("sigma"), "needs two or more entries");
    tr.samples = t.integer("samples", tr.samples, 2);
    tr.half_points = t.integer("half_points", tr.half_points, 1);
    tr.spacing = t.positive("spacing", tr.spacing);
    tr.center = t.numbers("center", {}, false, false, false);
    tr.direction = t.numbers("direction", {}, false, false, false);
    tr.error_slope = t.number("error_slope", tr.error_slope);
    tr.error_slope_tol = t.positive("error_slope_tol", tr.error_slope_tol);
    tr.lipschitz_slope = t.number("lipschitz_slope", tr.lipschitz_slope);
    tr.lipschitz_slope_tol = t.positive("lipschitz_slope_tol", tr.lipschitz_slope_tol);
    t.finish();
  }
  if (s.has("clip")) {
    Section c = s.child("clip");
    m.has_clip = true;
    m.clip.sigma = c.positive("sigma", m.clip.sigma);
    m.clip.samples = c.integer("samples", m.clip.samples, 2);
    m.clip.states = c.numbers("states", m.clip.states);
    m.clip.tolerance = c.positive("tolerance", m.clip.tolerance);
    c.finish();
  }
  s.finish();
  return m;
}

TrainConfig parse_train(Section s) {
  TrainConfig t;
  t.learning_rate = s.positive("learning_rate", t.learning_rate);
  t.weight_decay = s.number("weight_decay", t.weight_decay);
  t.steps = s.integer("steps", t.steps, 0);
  t.batch_size = s.integer("batch_size", t.batch_size, 1);
  t.jacobian_weight = s.number("jacobian_weight", t.jacobian_weight);
  t.width = s.integer("width", t.width, 1);
  t.layers = s.integer("layers", t.layers, 1);
  t.log_every = s.integer("log_every", t.log_every, 1);
  t.validation_fraction = s.number("validation_fraction", t.validation_fraction);
  s.finish();
  t.validate();
  return t;
}

ImitationSettings parse_imitation(Section s) {
  ImitationSettings im;
  im.N = s.integer("N", im.N, 0);
  im.K = s.integer("K", im.K, 1);
  im.seeds = s.integer("seeds", im.seeds, 1);
  im.eta = s.positives("eta", {}, true);
  im.sigma_calibration = s.positives("sigma_calibration", {}, true);
  if (im.sigma_calibration.size() < 2) {
    Section::fail(s.at("sigma_calibration"), "needs two or more entries");
  }
  im.eval_states = s.integer("eval_states", im.eval_states, 1);
  im.top_fraction = s.positive("top_fraction", im.top_fraction);
  im.win_fraction = s.positive("win_fraction", im.win_fraction);
  if (s.has("train")) im.train = parse_train(s.child("train"));
  s.finish();
  return im;
}

TradeoffSettings parse_tradeoff(Section s) {
  TradeoffSettings t;
  t.eta = s.positives("eta", {}, true);
  t.sigma = s.positives("sigma", {}, true);
  t.half_width = s.positive("half_width", t.half_width);
  t.quadrature = s.integer("quadrature", t.quadrature, 2);
  t.max_points = s.integer("max_points", t.max_points, 3);
  s.finish();
  return t;
}

}  // namespace

StageCost ExperimentConfig::cost() const {
  return StageCost::constant(Q, R, horizon);
}

BoxlikeConstraints ExperimentConfig::constraints() const {
  return BoxlikeConstraints::box(x_bound, u_bound);
}

CondensedQP ExperimentConfig::condensed() const {
  return build_condensed(system, cost(), constraints(), scaling);
}

std::string config_hash(const nlohmann::json& doc) {
  const std::string text = doc.dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentConfig parse_config(const nlohmann::json& doc) {
  Section root(doc, "$");
  ExperimentConfig cfg;
  cfg.name = root.string("name", "", true);
  cfg.seed = root.unsigned_integer("seed", 0);

  Section sys = root.child("system");
  cfg.system.A = sys.matrix("A");
  cfg.system.B = sys.matrix("B");
  sys.finish();
  try {
    cfg.system.validate();
  } catch (const Error& e) {
    Section::fail("$.system", e.what());
  }

  Section cost = root.child("cost");
  cfg.Q = cost.matrix("Q");
  cfg.R = cost.matrix("R");
  cfg.horizon = cost.integer("horizon", 1, 1, true);
  const std::string scaling = cost.string("scaling", "consistent");
  if (scaling == "consistent") {
    cfg.scaling = CostScaling::kConsistent;
  } else if (scaling == "half_quadratic") {
    cfg.scaling = CostScaling::kHalfQuadratic;
  } else {
    Section::fail(cost.at("scaling"), "expected consistent or half_quadratic");
  }
  cost.finish();

  Section cons = root.child("constraints");
  cfg.x_bound = to_vector(cons.numbers("x_bound", {}, true, true));
  cfg.u_bound = to_vector(cons.numbers("u_bound", {}, true, true));
  cons.finish();
  if (cfg.x_bound.size() != cfg.system.nx()) {
    Section::fail("$.constraints.x_bound", "length must equal the state dimension");
  }
  if (cfg.u_bound.size() != cfg.system.nu()) {
    Section::fail("$.constraints.u_bound", "length must equal the input dimension");
  }
  try {
    cfg.cost().validate(cfg.system.nx(), cfg.system.nu());
    cfg.constraints().validate(cfg.system.nx(), cfg.system.nu());
  } catch (const Error& e) {
    Section::fail("$", e.what());
  }

  if (root.has("pieces")) cfg.pieces = parse_pieces(root.child("pieces"));
  if (root.has("bounds")) {
    cfg.has_bounds = true;
    cfg.bounds = parse_bounds(root.child("bounds"));
  }
  if (root.has("smoothness")) {
    cfg.has_smoothness = true;
    cfg.smoothness = parse_smoothness(root.child("smoothness"));
  }
  if (root.has("imitation")) {
    cfg.has_imitation = true;
    cfg.imitation = parse_imitation(root.child("imitation"));
  }
  if (root.has("tradeoff")) {
    cfg.has_tradeoff = true;
    cfg.tradeoff = parse_tradeoff(root.child("tradeoff"));
  }
  root.finish();
  cfg.source = doc;
  cfg.hash = config_hash(doc);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config file " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("config " + path + ": " + e.what());
  }
  return parse_config(doc);
}

}  // namespace smoothmpc

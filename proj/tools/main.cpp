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


// Command-line front end. Exit codes: 0 every check passed, 2 a checked
// bound or trend failed, 3 infeasible or invalid configuration, 1 other
// errors.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "smoothmpc/experiments/experiments.hpp"

namespace {

using nlohmann::json;
using smoothmpc::CommandReport;

constexpr int kExitError = 1;
constexpr int kExitInfeasible = 3;

struct Flags {
  std::string config;
  long long seed = -1;
  std::string out = "out";
  int jobs = 1;
  int resolution = 0;
  double corrupt = 1.0;
  int instances = 1000;
  bool quiet = false;
};

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw smoothmpc::InvalidArgument("cannot open config file " + path);
  try {
    json doc;
    in >> doc;
    return doc;
  } catch (const json::exception& e) {
    throw smoothmpc::InvalidArgument("config " + path + ": " + e.what());
  }
}

/// Applies --seed and --resolution to the document so the config hash
/// covers the effective settings.
smoothmpc::ExperimentConfig effective_config(const Flags& f, const std::string& verb) {
  if (f.config.empty()) throw smoothmpc::InvalidArgument("--config is required");
  json doc = read_json(f.config);
  if (f.seed >= 0) doc["seed"] = f.seed;
  if (f.resolution > 0) {
    if (verb == "pieces") {
      doc["pieces"]["resolutions"] = json::array({f.resolution, 2 * f.resolution - 1});
    } else if (verb == "bounds" && doc.contains("bounds")) {
      doc["bounds"]["piece_grid"] = f.resolution;
    } else if (doc.contains("smoothness")) {
      doc["smoothness"]["grid"] = f.resolution;
    }
  }
  return smoothmpc::parse_config(doc);
}

int report(const CommandReport& rep, bool quiet) {
  for (const auto& c : rep.checks) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
  }
  if (!quiet) {
    for (const auto& f : rep.files) std::cout << "wrote " << f << "\n";
  }
  return rep.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"smoothmpc: explicit, barrier and randomized-smoothing MPC experiments"};
  app.require_subcommand(1);
  Flags f;
  const auto common = [&f](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("--config", f.config, "experiment config (JSON)");
    if (needs_config) opt->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", f.seed, "global seed override")->check(CLI::NonNegativeNumber);
    sub->add_option("--out", f.out, "output directory")->capture_default_str();
    sub->add_option("--jobs", f.jobs, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--resolution", f.resolution, "grid points per axis override")
        ->check(CLI::Range(2, 1000000));
    sub->add_flag("--quiet", f.quiet, "suppress progress output");
  };
  auto* pieces = app.add_subcommand("pieces", "count explicit-MPC pieces on state grids");
  auto* bounds = app.add_subcommand("bounds", "check barrier-MPC bounds over an (x0, eta) sweep");
  auto* smooth = app.add_subcommand("smoothness", "L0/L1 sweeps, trend probe, tradeoff audit");
  auto* imitate = app.add_subcommand("imitate", "imitation-learning comparison of smoothed experts");
  auto* matrix = app.add_subcommand("matrix-selftest", "randomized matrix-identity oracles");
  for (auto* sub : {pieces, bounds, smooth, imitate}) common(sub, true);
  common(matrix, false);
  bounds->add_option("--corrupt-constant", f.corrupt,
                     "scale the error-bound constant (negative control)")
      ->check(CLI::PositiveNumber);
  matrix->add_option("--instances", f.instances, "random instances per identity")
      ->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  smoothmpc::RunOptions opts;
  opts.out_dir = f.out;
  opts.jobs = f.jobs;
  opts.corrupt_factor = f.corrupt;
  opts.log = f.quiet ? nullptr : &std::cerr;
  try {
    if (*matrix) {
      const unsigned seed = f.seed >= 0 ? static_cast<unsigned>(f.seed) : 0u;
      return report(smoothmpc::run_matrix_selftest(f.instances, seed, opts), f.quiet);
    }
    const std::string verb = app.get_subcommands().front()->get_name();
    const smoothmpc::ExperimentConfig cfg = effective_config(f, verb);
    if (!f.quiet) std::cerr << "config " << cfg.name << " hash " << cfg.hash << "\n";
    if (*pieces) return report(smoothmpc::run_pieces(cfg, opts), f.quiet);
    if (*bounds) return report(smoothmpc::run_bounds(cfg, opts), f.quiet);
    if (*smooth) return report(smoothmpc::run_smoothness(cfg, opts), f.quiet);
    if (*imitate) return report(smoothmpc::run_imitation(cfg, opts), f.quiet);
  } catch (const smoothmpc::InfeasibleError& e) {
    std::cerr << "infeasible configuration: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const smoothmpc::OriginNotInteriorError& e) {
    std::cerr << "infeasible configuration: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const smoothmpc::InvalidArgument& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

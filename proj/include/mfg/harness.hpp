#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mfg/config.hpp"
#include "mfg/envs.hpp"
#include "mfg/eval.hpp"
#include "mfg/trace.hpp"

namespace mfg {

// Environment constructed from a config; exactly one of grid/islands is set,
// matching cfg.family. The grid game is kept around for heatmap layout.
struct BuiltEnv {
  MfMdp mdp;
  Dist nu = Dist::point_mass(1, 0);
  std::optional<GridGame> grid;
  std::optional<IslandsGame> islands;
};

BuiltEnv build_env(const ExperimentConfig& cfg);

// Starting mean field per cfg.solver.mu0 (the reset distribution or uniform).
Dist initial_mu(const ExperimentConfig& cfg, const BuiltEnv& env);

// Runs the configured solver for one seed. Exact algorithms ignore the seed.
// Pure compute: no filesystem access.
RunTrace run_solver(const ExperimentConfig& cfg, const BuiltEnv& env,
                    std::uint64_t seed);

// Deterministic CSV renderings. metrics columns:
//   k,exploitability_reg,exploitability_unreg,mu_drift_l1,value,wall_ms
// with empty cells where a record has no value (off-cadence evaluations).
// Setting MFG_TRPO_DETERMINISTIC_TIMING=1 writes wall_ms as 0 so identical
// runs produce byte-identical files. summary_csv is the exact arithmetic
// mean over the traces, row by row (all traces must have equal length).
std::string metrics_csv(const RunTrace& trace);
std::string summary_csv(const std::vector<RunTrace>& traces);
std::string mu_csv(const Dist& mu);
std::string policy_csv(const Policy& pi);

// Grid mean-field heatmap, SVG 1.1. Linear color scale from white (0) to a
// dark fill at max(mu); walls dark gray, target outlined. The raw values and
// the scale are embedded in a <metadata> element as JSON.
std::string heatmap_svg(const GridGame& game, const Dist& mu);

// Runs every seed (in parallel up to MFG_TRPO_THREADS workers) and writes
// metrics_<seed>.csv, mu_<seed>_<k>.csv snapshots, heatmaps for the grid
// family when enabled, policy_<seed>.csv (final refit policy), and
// summary.csv into cfg.output.directory. On any failure every file written
// by this call is removed before the error propagates.
struct RunResult {
  std::vector<std::string> files;  // paths written, in a deterministic order
};

RunResult run_experiment(const ExperimentConfig& cfg);

// Assumption probes for the configured environment: the population-update
// monotonicity ratio and an empirical mixing-rate fit. The mixing probe
// follows TV(nu K^t, Gamma) for the soft best response at the uniform mean
// field and fits log TV against t; geometric mixing shows up as rho < 1 with
// a high R^2. Single-state models are degenerate for both probes.
struct AssumptionsReport {
  MonotonicityProbeReport monotonicity;
  bool monotonicity_pass = false;  // max_ratio < 1, or degenerate
  double mixing_rho = 0.0;
  double mixing_r2 = 0.0;
  int mixing_points = 0;
  bool mixing_degenerate = false;
  bool mixing_pass = false;  // rho < 1 and R^2 >= 0.9, or degenerate
};

AssumptionsReport check_assumptions(const ExperimentConfig& cfg);

// assumptions.csv rendering: metric,value,verdict rows.
std::string assumptions_csv(const AssumptionsReport& report);

// CSV loaders for the eval subcommand. Policies are n_states lines of
// n_actions comma-separated probabilities; mean fields accept either the
// snapshot format ("s,mu" header) or one bare value per line.
Policy load_policy_csv(const std::string& path, int n_states, int n_actions);
Dist load_mu_csv(const std::string& path, int n_states);

}  // namespace mfg

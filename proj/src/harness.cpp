#include "mfg/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "mfg/baselines.hpp"
#include "mfg/parallel.hpp"
#include "mfg/rng.hpp"
#include "mfg/solvers_exact.hpp"
#include "mfg/solvers_sampled.hpp"

namespace fs = std::filesystem;

namespace mfg {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string fmt_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Wall-clock cells become "0" under MFG_TRPO_DETERMINISTIC_TIMING=1 so that
// repeated runs can be compared byte for byte; timings are the one column
// that honest reruns can never reproduce.
bool deterministic_timing() {
  const char* env = std::getenv("MFG_TRPO_DETERMINISTIC_TIMING");
  return env != nullptr && *env != '\0' && std::string(env) != "0";
}

std::string fmt_wall(double ms) {
  if (deterministic_timing()) return "0";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", ms);
  return buf;
}

std::string opt_cell(const std::optional<double>& v) {
  return v ? fmt(*v) : std::string();
}

void append_record_row(std::ostringstream& out, const TraceRecord& rec) {
  out << rec.k << ',' << opt_cell(rec.exploitability_reg) << ','
      << opt_cell(rec.exploitability_unreg) << ',' << fmt(rec.mu_drift_l1) << ','
      << opt_cell(rec.value) << ',' << fmt_wall(rec.wall_ms) << '\n';
}

constexpr char kMetricsHeader[] =
    "k,exploitability_reg,exploitability_unreg,mu_drift_l1,value,wall_ms\n";

// Snapshot iterations requested by the output section: the periodic grid
// (0, e, 2e, ... plus K itself) unioned with the explicit list, clipped to
// [0, K].
std::vector<int> snapshot_steps_for(const ExperimentConfig& cfg) {
  std::set<int> steps;
  int big_k = cfg.solver.big_k;
  if (cfg.output.snapshot_every > 0) {
    for (int k = 0; k <= big_k; k += cfg.output.snapshot_every) steps.insert(k);
    steps.insert(big_k);
  }
  for (int k : cfg.output.snapshot_steps) {
    if (k <= big_k) steps.insert(k);
  }
  return {steps.begin(), steps.end()};
}

}  // namespace

BuiltEnv build_env(const ExperimentConfig& cfg) {
  BuiltEnv env;
  if (cfg.family == EnvFamily::kGrid) {
    env.grid = build_grid_crowd(cfg.grid, cfg.solver.gamma);
    env.mdp = env.grid->mdp;
    env.nu = env.grid->nu;
  } else {
    env.islands = build_two_islands(cfg.islands, cfg.solver.gamma);
    env.mdp = env.islands->mdp;
    env.nu = env.islands->nu;
  }
  return env;
}

Dist initial_mu(const ExperimentConfig& cfg, const BuiltEnv& env) {
  if (cfg.solver.mu0 == Mu0Choice::kUniform) return Dist::uniform(env.mdp.n_states);
  return env.nu;
}

RunTrace run_solver(const ExperimentConfig& cfg, const BuiltEnv& env,
                    std::uint64_t seed) {
  const SolverSection& s = cfg.solver;
  Dist mu0 = initial_mu(cfg, env);
  std::vector<int> snapshots = snapshot_steps_for(cfg);

  switch (s.algorithm) {
    case SolverAlgorithm::kExactMftrpo: {
      ExactMftrpoConfig c;
      c.trpo.eta = s.eta;
      c.trpo.big_l = s.big_l;
      c.big_k = s.big_k;
      c.big_m = s.big_m;
      c.beta = BetaSchedule::constant(s.beta);
      c.mu0 = mu0;
      c.warm_start = s.warm_start;
      c.eval_every = s.eval_every;
      c.snapshot_steps = snapshots;
      c.eval_tol = s.eval_tol;
      return exact_mftrpo(env.mdp, c);
    }
    case SolverAlgorithm::kSampledMftrpo: {
      SampledMftrpoConfig c;
      c.trpo.eta = s.eta;
      c.trpo.big_l = s.big_l;
      c.trpo.epsilon = s.epsilon;
      c.trpo.delta = s.delta;
      c.trpo.i_per_iter =
          s.i_per_level > 0
              ? s.i_per_level
              : bound_i_per_iter(s.epsilon, s.delta, env.mdp.n_states,
                                 env.mdp.n_actions, s.gamma, env.mdp.reward_bound,
                                 s.eta);
      c.trpo.t_rollout =
          s.t_rollout > 0 ? s.t_rollout
                          : bound_t_rollout(s.epsilon, s.gamma, env.mdp.n_actions,
                                            env.mdp.reward_bound, s.eta);
      c.big_k = s.big_k;
      c.beta = BetaSchedule::constant(s.beta);
      c.big_m = s.big_m;
      c.p_trajectories = s.p_trajectories > 0
                             ? s.p_trajectories
                             : bound_p_trajectories(s.epsilon, s.delta);
      c.seed = seed;
      c.mu0 = mu0;
      c.eval_every = s.eval_every;
      c.snapshot_steps = snapshots;
      c.exact_model = env.mdp;
      c.eval_tol = s.eval_tol;
      // Both benchmark families have mu-free transitions; the oracle checks
      // the claim at construction.
      auto oracle = make_oracle(env.mdp, env.nu,
                                mix_seed({seed, 0x6f7261636c65ULL}), true);
      return sample_based_mftrpo(*oracle, c);
    }
    case SolverAlgorithm::kExactFixedPoint: {
      ExactFixedPointConfig c;
      c.eta = s.eta;
      c.big_k = s.big_k;
      c.big_m = s.big_m;
      c.beta = BetaSchedule::constant(s.beta);
      c.mu0 = mu0;
      c.vi_tol = s.eval_tol;
      c.eval_every = s.eval_every;
      c.snapshot_steps = snapshots;
      RunTrace trace;
      exact_fixed_point(env.mdp, c, &trace);
      return trace;
    }
    case SolverAlgorithm::kFictitiousPlay:
    case SolverAlgorithm::kOnlineMirrorDescent: {
      BaselineConfig c;
      c.algorithm = s.algorithm == SolverAlgorithm::kFictitiousPlay
                        ? BaselineAlgorithm::kFictitiousPlay
                        : BaselineAlgorithm::kOnlineMirrorDescent;
      c.big_k = s.big_k;
      c.eta = s.eta;
      c.learning_rate = s.learning_rate;
      c.mu0 = mu0;
      c.big_m = s.big_m;
      c.beta = BetaSchedule::constant(s.beta);
      c.classical_averaging = s.classical_averaging;
      c.eval_every = s.eval_every;
      c.snapshot_steps = snapshots;
      c.eval_tol = s.eval_tol;
      return c.algorithm == BaselineAlgorithm::kFictitiousPlay
                 ? fictitious_play(env.mdp, c)
                 : online_mirror_descent(env.mdp, c);
    }
  }
  throw std::logic_error("run_solver: unhandled algorithm");
}

std::string metrics_csv(const RunTrace& trace) {
  std::ostringstream out;
  out << kMetricsHeader;
  if (trace.initial) append_record_row(out, *trace.initial);
  for (const TraceRecord& rec : trace.records) append_record_row(out, rec);
  return out.str();
}

std::string summary_csv(const std::vector<RunTrace>& traces) {
  if (traces.empty()) throw std::invalid_argument("summary_csv: no traces");
  size_t rows = traces[0].records.size();
  bool has_initial = traces[0].initial.has_value();
  for (const RunTrace& t : traces) {
    if (t.records.size() != rows || t.initial.has_value() != has_initial) {
      throw std::invalid_argument("summary_csv: traces have mismatched shapes");
    }
  }

  std::ostringstream out;
  out << kMetricsHeader;
  auto emit_mean_row = [&](auto select) {
    const TraceRecord& first = select(traces[0]);
    out << first.k;
    // Optional columns: mean over the traces that carry a value; cadence is
    // config-driven, so normally all or none do.
    auto mean_opt = [&](auto field) -> std::string {
      double sum = 0.0;
      int n = 0;
      for (const RunTrace& t : traces) {
        const std::optional<double>& v = select(t).*field;
        if (v) {
          sum += *v;
          ++n;
        }
      }
      return n == 0 ? std::string() : fmt(sum / n);
    };
    double drift = 0.0;
    double wall = 0.0;
    for (const RunTrace& t : traces) {
      drift += select(t).mu_drift_l1;
      wall += select(t).wall_ms;
    }
    out << ',' << mean_opt(&TraceRecord::exploitability_reg) << ','
        << mean_opt(&TraceRecord::exploitability_unreg) << ','
        << fmt(drift / traces.size()) << ',' << mean_opt(&TraceRecord::value) << ','
        << fmt_wall(wall / traces.size()) << '\n';
  };

  if (has_initial) {
    emit_mean_row([](const RunTrace& t) -> const TraceRecord& { return *t.initial; });
  }
  for (size_t i = 0; i < rows; ++i) {
    emit_mean_row(
        [i](const RunTrace& t) -> const TraceRecord& { return t.records[i]; });
  }
  return out.str();
}

std::string mu_csv(const Dist& mu) {
  std::ostringstream out;
  out << "s,mu\n";
  for (int s = 0; s < mu.size(); ++s) out << s << ',' << fmt_full(mu.vec()(s)) << '\n';
  return out.str();
}

std::string policy_csv(const Policy& pi) {
  std::ostringstream out;
  for (int s = 0; s < pi.n_states(); ++s) {
    for (int a = 0; a < pi.n_actions(); ++a) {
      out << (a ? "," : "") << fmt_full(pi(s, a));
    }
    out << '\n';
  }
  return out.str();
}

std::string heatmap_svg(const GridGame& game, const Dist& mu) {
  const int cell = 48;
  const int margin = 4;
  const int w = game.spec.width * cell + 2 * margin;
  const int h = game.spec.height * cell + 2 * margin;
  double vmax = mu.vec().maxCoeff();
  if (!(vmax > 0.0)) vmax = 1.0;

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << w
      << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n";
  out << "<desc>Mean-field heatmap. Linear scale: white at 0, rgb(8,48,107) at "
      << fmt(vmax) << " (the maximum cell mass). Walls are dark gray; the target "
      << "cell is outlined.</desc>\n";

  // Raw values ride along so the picture stays auditable.
  out << "<metadata id=\"mu-values\">{\"scale\":{\"type\":\"linear\",\"min\":0,"
      << "\"max\":" << fmt_full(vmax) << "},\"width\":" << game.spec.width
      << ",\"height\":" << game.spec.height << ",\"cells\":[";
  for (int s = 0; s < mu.size(); ++s) {
    auto [x, y] = game.cells[s];
    out << (s ? "," : "") << "{\"x\":" << x << ",\"y\":" << y
        << ",\"mu\":" << fmt_full(mu.vec()(s)) << "}";
  }
  out << "]}</metadata>\n";

  for (int y = 0; y < game.spec.height; ++y) {
    for (int x = 0; x < game.spec.width; ++x) {
      int s = game.state_at(x, y);
      std::string fill;
      if (s < 0) {
        fill = "rgb(58,58,58)";
      } else {
        double t = mu.vec()(s) / vmax;
        int r = static_cast<int>(std::lround(255.0 + t * (8.0 - 255.0)));
        int g = static_cast<int>(std::lround(255.0 + t * (48.0 - 255.0)));
        int b = static_cast<int>(std::lround(255.0 + t * (107.0 - 255.0)));
        fill = "rgb(" + std::to_string(r) + "," + std::to_string(g) + "," +
               std::to_string(b) + ")";
      }
      out << "<rect x=\"" << margin + x * cell << "\" y=\"" << margin + y * cell
          << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\"" << fill
          << "\" stroke=\"rgb(204,204,204)\" stroke-width=\"1\"/>\n";
    }
  }
  if (game.spec.target) {
    auto [tx, ty] = *game.spec.target;
    out << "<rect x=\"" << margin + tx * cell << "\" y=\"" << margin + ty * cell
        << "\" width=\"" << cell << "\" height=\"" << cell
        << "\" fill=\"none\" stroke=\"rgb(211,47,47)\" stroke-width=\"3\"/>\n";
  }
  out << "</svg>\n";
  return out.str();
}

namespace {

struct PendingFile {
  std::string path;
  std::string content;
};

void write_all_or_unwind(const std::vector<PendingFile>& files) {
  std::vector<std::string> written;
  for (const PendingFile& f : files) {
    std::ofstream out(f.path, std::ios::binary);
    if (out) out << f.content;
    if (!out) {
      for (const std::string& path : written) {
        std::error_code ec;
        fs::remove(path, ec);
      }
      throw std::runtime_error("failed to write " + f.path);
    }
    written.push_back(f.path);
  }
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg) {
  BuiltEnv env = build_env(cfg);
  const std::vector<std::uint64_t>& seeds = cfg.seeds;
  std::vector<RunTrace> traces(seeds.size());
  std::vector<std::string> errors(seeds.size());

  // Fan out across seeds; each worker only touches its own slot. Solver
  // errors are collected so the failure message can say which seed died.
  {
    std::vector<std::thread> pool;
    std::mutex next_mutex;
    size_t next = 0;
    int workers = std::min<int>(max_workers(), static_cast<int>(seeds.size()));
    auto work = [&] {
      for (;;) {
        size_t i;
        {
          std::lock_guard<std::mutex> lock(next_mutex);
          if (next >= seeds.size()) return;
          i = next++;
        }
        try {
          traces[i] = run_solver(cfg, env, seeds[i]);
        } catch (const std::exception& e) {
          errors[i] = e.what();
          if (errors[i].empty()) errors[i] = "unknown error";
        }
      }
    };
    if (workers <= 1) {
      work();
    } else {
      pool.reserve(workers);
      for (int w = 0; w < workers; ++w) pool.emplace_back(work);
      for (std::thread& t : pool) t.join();
    }
  }
  for (size_t i = 0; i < seeds.size(); ++i) {
    if (!errors[i].empty()) {
      throw std::runtime_error("seed " + std::to_string(seeds[i]) + ": " + errors[i]);
    }
  }

  // Render everything first; only then touch the filesystem, so a failure
  // mid-write can undo exactly what it created.
  fs::path dir(cfg.output.directory);
  std::vector<PendingFile> files;
  for (size_t i = 0; i < seeds.size(); ++i) {
    std::string seed_str = std::to_string(seeds[i]);
    files.push_back({(dir / ("metrics_" + seed_str + ".csv")).string(),
                     metrics_csv(traces[i])});
    if (traces[i].final_policy) {
      files.push_back({(dir / ("policy_" + seed_str + ".csv")).string(),
                       policy_csv(*traces[i].final_policy)});
    }
    for (const auto& [k, mu] : traces[i].mu_snapshots) {
      std::string base = "mu_" + seed_str + "_" + std::to_string(k);
      files.push_back({(dir / (base + ".csv")).string(), mu_csv(mu)});
      if (cfg.output.heatmaps && env.grid) {
        files.push_back({(dir / (base + ".svg")).string(), heatmap_svg(*env.grid, mu)});
      }
    }
  }
  files.push_back({(dir / "summary.csv").string(), summary_csv(traces)});

  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw std::runtime_error("cannot create output directory " + dir.string() + ": " +
                             ec.message());
  }
  write_all_or_unwind(files);

  RunResult result;
  for (const PendingFile& f : files) result.files.push_back(f.path);
  return result;
}

AssumptionsReport check_assumptions(const ExperimentConfig& cfg) {
  BuiltEnv env = build_env(cfg);
  const MfMdp& mdp = env.mdp;
  AssumptionsReport report;

  RngStream rng(mix_seed({cfg.seeds.empty() ? 0 : cfg.seeds[0], 0x70726f6265ULL}));
  report.monotonicity =
      monotonicity_probe(mdp, cfg.solver.eta, cfg.solver.big_m, 50, rng);
  report.monotonicity_pass =
      report.monotonicity.degenerate || report.monotonicity.max_ratio < 1.0;

  // Mixing probe: follow TV(nu K^t, Gamma) for the soft best response at the
  // uniform mean field and fit log TV = a + t log rho.
  if (mdp.n_states < 2) {
    report.mixing_degenerate = true;
    report.mixing_pass = true;
    return report;
  }
  Dist uniform = Dist::uniform(mdp.n_states);
  Policy br = soft_value_iteration(mdp, uniform, cfg.solver.eta, cfg.solver.eval_tol)
                  .second;
  Kernel k = induced_kernel(mdp, br, uniform);
  Dist gamma_dist = stationary_distribution(k, 1e-12, 1000000);
  Eigen::VectorXd x = env.nu.vec();
  std::vector<double> ts;
  std::vector<double> logs;
  for (int t = 1; t <= 512; ++t) {
    x = (x.transpose() * k.mat()).transpose();
    double tv = 0.5 * (x - gamma_dist.vec()).lpNorm<1>();
    if (tv < 1e-12) break;
    ts.push_back(static_cast<double>(t));
    logs.push_back(std::log(tv));
  }
  report.mixing_points = static_cast<int>(ts.size());
  if (ts.size() < 3) {
    // Stationarity reached almost immediately: trivially mixing.
    report.mixing_degenerate = true;
    report.mixing_pass = true;
    return report;
  }
  double n = static_cast<double>(ts.size());
  double mean_t = 0.0, mean_y = 0.0;
  for (size_t i = 0; i < ts.size(); ++i) {
    mean_t += ts[i];
    mean_y += logs[i];
  }
  mean_t /= n;
  mean_y /= n;
  double stt = 0.0, sty = 0.0, syy = 0.0;
  for (size_t i = 0; i < ts.size(); ++i) {
    double dt = ts[i] - mean_t;
    double dy = logs[i] - mean_y;
    stt += dt * dt;
    sty += dt * dy;
    syy += dy * dy;
  }
  double slope = sty / stt;
  report.mixing_rho = std::exp(slope);
  if (syy < 1e-30) {
    report.mixing_r2 = 0.0;  // flat decay: no geometric trend to speak of
  } else {
    double ss_res = syy - slope * sty;
    report.mixing_r2 = 1.0 - ss_res / syy;
  }
  report.mixing_pass = report.mixing_rho < 1.0 && report.mixing_r2 >= 0.9;
  return report;
}

std::string assumptions_csv(const AssumptionsReport& report) {
  std::ostringstream out;
  out << "metric,value,verdict\n";
  const MonotonicityProbeReport& m = report.monotonicity;
  out << "monotonicity_max_ratio," << fmt(m.max_ratio) << ','
      << (m.degenerate ? "degenerate" : (report.monotonicity_pass ? "pass" : "warn"))
      << '\n';
  out << "monotonicity_samples," << m.samples << ",\n";
  out << "monotonicity_big_m," << m.big_m << ",\n";
  std::string mixing_verdict =
      report.mixing_degenerate ? "degenerate" : (report.mixing_pass ? "pass" : "warn");
  out << "mixing_rho," << fmt(report.mixing_rho) << ',' << mixing_verdict << '\n';
  out << "mixing_r2," << fmt(report.mixing_r2) << ',' << mixing_verdict << '\n';
  out << "mixing_points," << report.mixing_points << ",\n";
  return out.str();
}

namespace {

std::vector<std::string> read_lines(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(std::string(what) + ": cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

std::vector<double> split_doubles(const std::string& line, const std::string& context) {
  std::vector<double> vals;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      size_t pos = 0;
      vals.push_back(std::stod(tok, &pos));
    } catch (const std::exception&) {
      throw std::runtime_error(context + ": not a number: '" + tok + "'");
    }
  }
  return vals;
}

}  // namespace

Policy load_policy_csv(const std::string& path, int n_states, int n_actions) {
  std::vector<std::string> lines = read_lines(path, "policy csv");
  if (static_cast<int>(lines.size()) != n_states) {
    throw std::runtime_error("policy csv " + path + ": expected " +
                             std::to_string(n_states) + " rows, got " +
                             std::to_string(lines.size()));
  }
  Eigen::MatrixXd probs(n_states, n_actions);
  for (int s = 0; s < n_states; ++s) {
    std::vector<double> vals = split_doubles(lines[s], "policy csv " + path);
    if (static_cast<int>(vals.size()) != n_actions) {
      throw std::runtime_error("policy csv " + path + ": row " + std::to_string(s) +
                               " has " + std::to_string(vals.size()) + " entries, want " +
                               std::to_string(n_actions));
    }
    for (int a = 0; a < n_actions; ++a) probs(s, a) = vals[a];
  }
  return Policy(std::move(probs));
}

Dist load_mu_csv(const std::string& path, int n_states) {
  std::vector<std::string> lines = read_lines(path, "mu csv");
  if (!lines.empty() && lines[0] == "s,mu") lines.erase(lines.begin());
  if (static_cast<int>(lines.size()) != n_states) {
    throw std::runtime_error("mu csv " + path + ": expected " +
                             std::to_string(n_states) + " values, got " +
                             std::to_string(lines.size()));
  }
  Eigen::VectorXd v(n_states);
  for (int i = 0; i < n_states; ++i) {
    std::vector<double> vals = split_doubles(lines[i], "mu csv " + path);
    if (vals.size() == 2) {
      int idx = static_cast<int>(vals[0]);
      if (idx != i) {
        throw std::runtime_error("mu csv " + path + ": rows out of order at line " +
                                 std::to_string(i + 1));
      }
      v(i) = vals[1];
    } else if (vals.size() == 1) {
      v(i) = vals[0];
    } else {
      throw std::runtime_error("mu csv " + path + ": expected 1 or 2 columns");
    }
  }
  double sum = v.sum();
  if (!(std::abs(sum - 1.0) < 1e-6) || v.minCoeff() < 0.0) {
    throw std::runtime_error("mu csv " + path + ": not a probability vector (sum " +
                             fmt(sum) + ")");
  }
  return Dist::normalized(std::move(v));
}

}  // namespace mfg

#include "mfg/config.hpp"

#include <algorithm>
#include <cctype>
#include <climits>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <utility>

namespace mfg {

namespace {

struct Cursor {
  const std::string* name;
  int line = 0;
};

[[noreturn]] void fail(const Cursor& at, const std::string& what) {
  throw ConfigError(*at.name + ":" + std::to_string(at.line) + ": " + what);
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::stringstream ss(s);
  while (std::getline(ss, cur, ',')) out.push_back(trim(cur));
  if (!s.empty() && s.back() == ',') out.push_back("");
  return out;
}

long to_long(const Cursor& at, const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    long x = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    fail(at, "value of '" + key + "' is not an integer: '" + v + "'");
  }
}

int to_int(const Cursor& at, const std::string& key, const std::string& v) {
  long x = to_long(at, key, v);
  if (x < INT_MIN || x > INT_MAX) fail(at, "value of '" + key + "' out of range");
  return static_cast<int>(x);
}

std::uint64_t to_u64(const Cursor& at, const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    if (!v.empty() && v[0] == '-') throw std::invalid_argument("negative");
    unsigned long long x = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    fail(at, "value of '" + key + "' is not a non-negative integer: '" + v + "'");
  }
}

double to_double(const Cursor& at, const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    fail(at, "value of '" + key + "' is not a number: '" + v + "'");
  }
}

bool to_bool(const Cursor& at, const std::string& key, const std::string& v) {
  if (v == "true" || v == "on" || v == "1") return true;
  if (v == "false" || v == "off" || v == "0") return false;
  fail(at, "value of '" + key + "' is not a boolean (true/false/on/off/1/0): '" + v +
               "'");
}

std::pair<int, int> to_cell(const Cursor& at, const std::string& key,
                            const std::string& v) {
  size_t colon = v.find(':');
  if (colon == std::string::npos) {
    fail(at, "value of '" + key + "' is not an x:y cell: '" + v + "'");
  }
  int x = to_int(at, key, trim(v.substr(0, colon)));
  int y = to_int(at, key, trim(v.substr(colon + 1)));
  return {x, y};
}

// Tracks which keys appeared (for duplicate detection and "set at line" info
// in semantic errors).
class SeenKeys {
 public:
  void mark(const Cursor& at, const std::string& section, const std::string& key) {
    auto [it, fresh] = lines_.emplace(section + "." + key, at.line);
    if (!fresh) {
      fail(at, "duplicate key '" + key + "'" +
                   (section.empty() ? "" : " in [" + section + "]") + " (first at line " +
                   std::to_string(it->second) + ")");
    }
  }
  bool has(const std::string& section, const std::string& key) const {
    return lines_.count(section + "." + key) > 0;
  }
  int line_of(const std::string& section, const std::string& key) const {
    auto it = lines_.find(section + "." + key);
    return it == lines_.end() ? 0 : it->second;
  }

 private:
  std::map<std::string, int> lines_;
};

}  // namespace

ExperimentConfig parse_config_text(const std::string& text, const std::string& name) {
  ExperimentConfig cfg;
  cfg.source_name = name;
  Cursor at{&name, 0};
  SeenKeys seen;
  std::string section;  // "" = global scope before the first header
  int env_header_line = 0;
  int solver_header_line = 0;
  bool family_known = false;

  std::stringstream ss(text);
  std::string raw;
  while (std::getline(ss, raw)) {
    ++at.line;
    size_t hash = raw.find('#');
    std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail(at, "unterminated section header: '" + line + "'");
      std::string s = trim(line.substr(1, line.size() - 2));
      if (s != "env" && s != "solver" && s != "output") {
        fail(at, "unknown section [" + s + "]");
      }
      if ((s == "env" && env_header_line) || (s == "solver" && solver_header_line) ||
          (s == "output" && seen.has("output", "<header>"))) {
        fail(at, "duplicate section [" + s + "]");
      }
      if (s == "env") env_header_line = at.line;
      if (s == "solver") solver_header_line = at.line;
      if (s == "output") seen.mark(at, "output", "<header>");
      section = s;
      continue;
    }

    size_t eq = line.find('=');
    if (eq == std::string::npos) {
      fail(at, "expected 'key = value' or '[section]': '" + line + "'");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(at, "empty key");
    if (value.empty()) fail(at, "empty value for '" + key + "'");
    seen.mark(at, section, key);

    if (section.empty()) {
      if (key == "seeds") {
        cfg.seeds.clear();
        for (const std::string& tok : split_list(value)) {
          cfg.seeds.push_back(to_u64(at, key, tok));
        }
        if (cfg.seeds.empty()) fail(at, "seeds list is empty");
      } else {
        fail(at, "unknown key '" + key + "' before the first section (only 'seeds')");
      }
      continue;
    }

    if (section == "env") {
      if (!family_known && key != "family") {
        fail(at, "'family' must be the first key of [env], got '" + key + "'");
      }
      if (key == "family") {
        if (value == "grid") cfg.family = EnvFamily::kGrid;
        else if (value == "islands") cfg.family = EnvFamily::kIslands;
        else fail(at, "unknown env family '" + value + "' (grid or islands)");
        family_known = true;
      } else if (key == "kappa") {
        double kappa = to_double(at, key, value);
        if (!(kappa >= 0.0)) fail(at, "kappa must be >= 0");
        cfg.grid.kappa = kappa;
        cfg.islands.crowd_kappa = kappa;
      } else if (key == "mu_floor") {
        double f = to_double(at, key, value);
        if (!(f > 0.0)) fail(at, "mu_floor must be > 0");
        cfg.grid.mu_floor = f;
        cfg.islands.mu_floor = f;
      } else if (cfg.family == EnvFamily::kGrid) {
        if (key == "width") {
          cfg.grid.width = to_int(at, key, value);
          if (cfg.grid.width < 1) fail(at, "width must be >= 1");
        } else if (key == "height") {
          cfg.grid.height = to_int(at, key, value);
          if (cfg.grid.height < 1) fail(at, "height must be >= 1");
        } else if (key == "walls") {
          cfg.grid.walls.clear();
          for (const std::string& tok : split_list(value)) {
            cfg.grid.walls.push_back(to_cell(at, key, tok));
          }
        } else if (key == "target") {
          if (value == "none") cfg.grid.target.reset();
          else cfg.grid.target = to_cell(at, key, value);
        } else if (key == "initial_cell") {
          cfg.grid.initial_cell = to_cell(at, key, value);
        } else if (key == "slipperiness") {
          cfg.grid.slipperiness = to_double(at, key, value);
          if (!(cfg.grid.slipperiness >= 0.0 && cfg.grid.slipperiness < 1.0)) {
            fail(at, "slipperiness must lie in [0, 1)");
          }
        } else {
          fail(at, "unknown key '" + key + "' in [env] for family grid");
        }
      } else {
        if (key == "n_states") {
          cfg.islands.n_states = to_int(at, key, value);
          if (cfg.islands.n_states < 2) fail(at, "n_states must be >= 2");
        } else if (key == "branching") {
          cfg.islands.branching = to_int(at, key, value);
          if (cfg.islands.branching != 2) {
            fail(at, "branching must be 2 (the only supported value)");
          }
        } else if (key == "env_seed") {
          cfg.islands.seed = to_u64(at, key, value);
        } else if (key == "initial_state") {
          cfg.islands.initial_state = to_int(at, key, value);
          if (cfg.islands.initial_state < 0) fail(at, "initial_state must be >= 0");
        } else {
          fail(at, "unknown key '" + key + "' in [env] for family islands");
        }
      }
      continue;
    }

    if (section == "solver") {
      SolverSection& s = cfg.solver;
      if (key == "algorithm") {
        if (value == "exact-mftrpo") s.algorithm = SolverAlgorithm::kExactMftrpo;
        else if (value == "sampled-mftrpo") s.algorithm = SolverAlgorithm::kSampledMftrpo;
        else if (value == "exact-fixed-point")
          s.algorithm = SolverAlgorithm::kExactFixedPoint;
        else if (value == "fp") s.algorithm = SolverAlgorithm::kFictitiousPlay;
        else if (value == "omd") s.algorithm = SolverAlgorithm::kOnlineMirrorDescent;
        else
          fail(at, "unknown algorithm '" + value +
                       "' (exact-mftrpo, sampled-mftrpo, exact-fixed-point, fp, omd)");
      } else if (key == "gamma") {
        s.gamma = to_double(at, key, value);
        if (!(s.gamma >= 0.0 && s.gamma < 1.0)) fail(at, "gamma must lie in [0, 1)");
      } else if (key == "eta") {
        s.eta = to_double(at, key, value);
        if (!(s.eta > 0.0)) fail(at, "eta must be > 0");
      } else if (key == "kappa") {
        if (seen.has("env", "kappa")) {
          fail(at, "kappa already set in [env] at line " +
                       std::to_string(seen.line_of("env", "kappa")));
        }
        double kappa = to_double(at, key, value);
        if (!(kappa >= 0.0)) fail(at, "kappa must be >= 0");
        cfg.grid.kappa = kappa;
        cfg.islands.crowd_kappa = kappa;
      } else if (key == "big_l") {
        s.big_l = to_int(at, key, value);
        if (s.big_l < 0) fail(at, "big_l must be >= 0");
      } else if (key == "beta") {
        s.beta = to_double(at, key, value);
        if (!(s.beta >= 0.0 && s.beta <= 1.0)) fail(at, "beta must lie in [0, 1]");
      } else if (key == "i_per_level") {
        s.i_per_level = to_long(at, key, value);
        if (s.i_per_level < 0) fail(at, "i_per_level must be >= 0");
      } else if (key == "p_trajectories") {
        s.p_trajectories = to_long(at, key, value);
        if (s.p_trajectories < 0) fail(at, "p_trajectories must be >= 0");
      } else if (key == "big_m") {
        s.big_m = to_int(at, key, value);
        if (s.big_m < 1) fail(at, "big_m must be >= 1");
      } else if (key == "big_k") {
        s.big_k = to_int(at, key, value);
        if (s.big_k < 1) fail(at, "big_k must be >= 1");
      } else if (key == "t_rollout") {
        s.t_rollout = to_int(at, key, value);
        if (s.t_rollout < 0) fail(at, "t_rollout must be >= 0");
      } else if (key == "epsilon") {
        s.epsilon = to_double(at, key, value);
        if (!(s.epsilon > 0.0)) fail(at, "epsilon must be > 0");
      } else if (key == "delta") {
        s.delta = to_double(at, key, value);
        if (!(s.delta > 0.0 && s.delta < 1.0)) fail(at, "delta must lie in (0, 1)");
      } else if (key == "learning_rate") {
        s.learning_rate = to_double(at, key, value);
        if (!(s.learning_rate >= 0.0)) fail(at, "learning_rate must be >= 0");
      } else if (key == "classical_averaging") {
        s.classical_averaging = to_bool(at, key, value);
      } else if (key == "warm_start") {
        s.warm_start = to_bool(at, key, value);
      } else if (key == "eval_every") {
        s.eval_every = to_int(at, key, value);
        if (s.eval_every < 0) fail(at, "eval_every must be >= 0");
      } else if (key == "eval_tol") {
        s.eval_tol = to_double(at, key, value);
        if (!(s.eval_tol > 0.0)) fail(at, "eval_tol must be > 0");
      } else if (key == "mu0") {
        if (value == "nu") s.mu0 = Mu0Choice::kNu;
        else if (value == "uniform") s.mu0 = Mu0Choice::kUniform;
        else fail(at, "unknown mu0 '" + value + "' (nu or uniform)");
      } else {
        fail(at, "unknown key '" + key + "' in [solver]");
      }
      continue;
    }

    // [output]
    OutputSection& o = cfg.output;
    if (key == "directory") {
      o.directory = value;
    } else if (key == "snapshot_every") {
      o.snapshot_every = to_int(at, key, value);
      if (o.snapshot_every < 0) fail(at, "snapshot_every must be >= 0");
    } else if (key == "snapshot_steps") {
      o.snapshot_steps.clear();
      for (const std::string& tok : split_list(value)) {
        int step = to_int(at, key, tok);
        if (step < 0) fail(at, "snapshot steps must be >= 0");
        o.snapshot_steps.push_back(step);
      }
    } else if (key == "heatmaps") {
      o.heatmaps = to_bool(at, key, value);
    } else {
      fail(at, "unknown key '" + key + "' in [output]");
    }
  }

  // Section-level requirements; errors point just past the last line.
  Cursor end{&name, at.line + 1};
  if (!env_header_line) fail(end, "missing required section [env]");
  if (!solver_header_line) fail(end, "missing required section [solver]");
  if (!family_known) {
    fail(Cursor{&name, env_header_line}, "[env] must set 'family'");
  }
  if (!seen.has("solver", "algorithm")) {
    fail(Cursor{&name, solver_header_line}, "[solver] must set 'algorithm'");
  }
  if (cfg.solver.algorithm == SolverAlgorithm::kOnlineMirrorDescent &&
      !(cfg.solver.learning_rate > 0.0)) {
    int where = seen.has("solver", "learning_rate")
                    ? seen.line_of("solver", "learning_rate")
                    : seen.line_of("solver", "algorithm");
    fail(Cursor{&name, where}, "omd requires learning_rate > 0");
  }
  return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string cell_str(const std::pair<int, int>& c) {
  return std::to_string(c.first) + ":" + std::to_string(c.second);
}

}  // namespace

std::string config_to_text(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "seeds = ";
  for (size_t i = 0; i < cfg.seeds.size(); ++i) {
    out << (i ? ", " : "") << cfg.seeds[i];
  }
  out << "\n\n[env]\n";
  if (cfg.family == EnvFamily::kGrid) {
    const GridSpec& g = cfg.grid;
    out << "family = grid\n";
    out << "width = " << g.width << "\n";
    out << "height = " << g.height << "\n";
    if (!g.walls.empty()) {
      out << "walls = ";
      for (size_t i = 0; i < g.walls.size(); ++i) {
        out << (i ? ", " : "") << cell_str(g.walls[i]);
      }
      out << "\n";
    }
    if (g.target) out << "target = " << cell_str(*g.target) << "\n";
    out << "initial_cell = " << cell_str(g.initial_cell) << "\n";
    out << "kappa = " << fmt_double(g.kappa) << "\n";
    out << "slipperiness = " << fmt_double(g.slipperiness) << "\n";
    out << "mu_floor = " << fmt_double(g.mu_floor) << "\n";
  } else {
    const IslandsSpec& i = cfg.islands;
    out << "family = islands\n";
    out << "n_states = " << i.n_states << "\n";
    out << "branching = " << i.branching << "\n";
    out << "env_seed = " << i.seed << "\n";
    out << "initial_state = " << i.initial_state << "\n";
    out << "kappa = " << fmt_double(i.crowd_kappa) << "\n";
    out << "mu_floor = " << fmt_double(i.mu_floor) << "\n";
  }
  const SolverSection& s = cfg.solver;
  out << "\n[solver]\n";
  const char* alg = nullptr;
  switch (s.algorithm) {
    case SolverAlgorithm::kExactMftrpo: alg = "exact-mftrpo"; break;
    case SolverAlgorithm::kSampledMftrpo: alg = "sampled-mftrpo"; break;
    case SolverAlgorithm::kExactFixedPoint: alg = "exact-fixed-point"; break;
    case SolverAlgorithm::kFictitiousPlay: alg = "fp"; break;
    case SolverAlgorithm::kOnlineMirrorDescent: alg = "omd"; break;
  }
  out << "algorithm = " << alg << "\n";
  out << "gamma = " << fmt_double(s.gamma) << "\n";
  out << "eta = " << fmt_double(s.eta) << "\n";
  out << "big_l = " << s.big_l << "\n";
  out << "beta = " << fmt_double(s.beta) << "\n";
  out << "big_m = " << s.big_m << "\n";
  out << "big_k = " << s.big_k << "\n";
  if (s.algorithm == SolverAlgorithm::kSampledMftrpo) {
    out << "i_per_level = " << s.i_per_level << "\n";
    out << "p_trajectories = " << s.p_trajectories << "\n";
    out << "t_rollout = " << s.t_rollout << "\n";
    out << "epsilon = " << fmt_double(s.epsilon) << "\n";
    out << "delta = " << fmt_double(s.delta) << "\n";
  }
  if (s.algorithm == SolverAlgorithm::kOnlineMirrorDescent) {
    out << "learning_rate = " << fmt_double(s.learning_rate) << "\n";
  }
  if (s.algorithm == SolverAlgorithm::kFictitiousPlay && s.classical_averaging) {
    out << "classical_averaging = true\n";
  }
  out << "warm_start = " << (s.warm_start ? "true" : "false") << "\n";
  if (s.eval_every) out << "eval_every = " << s.eval_every << "\n";
  out << "eval_tol = " << fmt_double(s.eval_tol) << "\n";
  out << "mu0 = " << (s.mu0 == Mu0Choice::kNu ? "nu" : "uniform") << "\n";
  const OutputSection& o = cfg.output;
  out << "\n[output]\n";
  out << "directory = " << o.directory << "\n";
  if (o.snapshot_every) out << "snapshot_every = " << o.snapshot_every << "\n";
  if (!o.snapshot_steps.empty()) {
    out << "snapshot_steps = ";
    for (size_t i = 0; i < o.snapshot_steps.size(); ++i) {
      out << (i ? ", " : "") << o.snapshot_steps[i];
    }
    out << "\n";
  }
  out << "heatmaps = " << (o.heatmaps ? "true" : "false") << "\n";
  return out.str();
}

namespace {

struct Preset {
  const char* name;
  const char* text;
};

// Paper-scale presets mirror the published parameter table; desk presets trade
// sample counts for runtime and are what the acceptance checks run.
const Preset kPresets[] = {
    {"table2-exact",
     "# Exact solver on the crowd-averse grid, paper-scale parameters.\n"
     "seeds = 0\n"
     "[env]\n"
     "family = grid\n"
     "walls = 1:2, 2:2, 3:2\n"
     "target = 4:4\n"
     "[solver]\n"
     "algorithm = exact-mftrpo\n"
     "gamma = 0.9\n"
     "eta = 0.05\n"
     "kappa = 0.2\n"
     "big_l = 10\n"
     "beta = 0.01\n"
     "big_m = 100\n"
     "big_k = 5000\n"
     "[output]\n"
     "directory = out/table2-exact\n"
     "snapshot_steps = 0, 10, 200\n"
     "heatmaps = true\n"},
    {"table2-exact-eta03",
     "seeds = 0\n"
     "[env]\n"
     "family = grid\n"
     "walls = 1:2, 2:2, 3:2\n"
     "target = 4:4\n"
     "[solver]\n"
     "algorithm = exact-mftrpo\n"
     "gamma = 0.9\n"
     "eta = 0.3\n"
     "kappa = 0.2\n"
     "big_l = 10\n"
     "beta = 0.01\n"
     "big_m = 100\n"
     "big_k = 5000\n"
     "[output]\n"
     "directory = out/table2-exact-eta03\n"
     "snapshot_steps = 0, 10, 200\n"
     "heatmaps = true\n"},
    {"table2-exact-kappa04",
     "seeds = 0\n"
     "[env]\n"
     "family = grid\n"
     "walls = 1:2, 2:2, 3:2\n"
     "target = 4:4\n"
     "[solver]\n"
     "algorithm = exact-mftrpo\n"
     "gamma = 0.9\n"
     "eta = 0.05\n"
     "kappa = 0.4\n"
     "big_l = 10\n"
     "beta = 0.01\n"
     "big_m = 100\n"
     "big_k = 5000\n"
     "[output]\n"
     "directory = out/table2-exact-kappa04\n"
     "heatmaps = true\n"},
    {"table2-sampled",
     "# Paper-scale sampled run: hours of compute; see the desk presets for\n"
     "# something that finishes over coffee.\n"
     "seeds = 0, 1, 2, 3, 4, 5, 6, 7, 8, 9\n"
     "[env]\n"
     "family = grid\n"
     "walls = 1:2, 2:2, 3:2\n"
     "target = 4:4\n"
     "[solver]\n"
     "algorithm = sampled-mftrpo\n"
     "gamma = 0.9\n"
     "eta = 0.05\n"
     "kappa = 0.2\n"
     "big_l = 100\n"
     "beta = 0.1\n"
     "i_per_level = 300000\n"
     "p_trajectories = 300000\n"
     "big_m = 100\n"
     "big_k = 300\n"
     "t_rollout = 100\n"
     "[output]\n"
     "directory = out/table2-sampled\n"
     "snapshot_steps = 0, 10, 200\n"
     "heatmaps = true\n"},
    {"table2-sampled-eta03",
     "seeds = 0, 1, 2\n"
     "[env]\n"
     "family = grid\n"
     "walls = 1:2, 2:2, 3:2\n"
     "target = 4:4\n"
     "[solver]\n"
     "algorithm = sampled-mftrpo\n"
     "gamma = 0.9\n"
     "eta = 0.3\n"
     "kappa = 0.2\n"
     "big_l = 100\n"
     "beta = 0.1\n"
     "i_per_level = 300000\n"
     "p_trajectories = 300000\n"
     "big_m = 100\n"
     "big_k = 300\n"
     "t_rollout = 100\n"
     "[output]\n"
     "directory = out/table2-sampled-eta03\n"
     "snapshot_steps = 0, 10, 200\n"
     "heatmaps = true\n"},
    {"desk-sampled",
     "# Desk-scale sampled run (minutes, not hours).\n"
     "seeds = 1, 2, 3\n"
     "[env]\n"
     "family = grid\n"
     "walls = 1:2, 2:2, 3:2\n"
     "target = 4:4\n"
     "[solver]\n"
     "algorithm = sampled-mftrpo\n"
     "gamma = 0.9\n"
     "eta = 0.05\n"
     "kappa = 0.2\n"
     "big_l = 20\n"
     "beta = 0.1\n"
     "i_per_level = 10000\n"
     "p_trajectories = 10000\n"
     "big_m = 20\n"
     "big_k = 50\n"
     "t_rollout = 40\n"
     "eval_every = 5\n"
     "[output]\n"
     "directory = out/desk-sampled\n"
     "heatmaps = true\n"},
    {"desk-sampled-eta03",
     "seeds = 1, 2, 3\n"
     "[env]\n"
     "family = grid\n"
     "walls = 1:2, 2:2, 3:2\n"
     "target = 4:4\n"
     "[solver]\n"
     "algorithm = sampled-mftrpo\n"
     "gamma = 0.9\n"
     "eta = 0.3\n"
     "kappa = 0.2\n"
     "big_l = 20\n"
     "beta = 0.1\n"
     "i_per_level = 10000\n"
     "p_trajectories = 10000\n"
     "big_m = 20\n"
     "big_k = 50\n"
     "t_rollout = 40\n"
     "eval_every = 5\n"
     "[output]\n"
     "directory = out/desk-sampled-eta03\n"
     "heatmaps = true\n"},
    {"desk-sampled-k200",
     "# Longer desk run for distribution-evolution snapshots at 0/10/200.\n"
     "seeds = 1\n"
     "[env]\n"
     "family = grid\n"
     "walls = 1:2, 2:2, 3:2\n"
     "target = 4:4\n"
     "[solver]\n"
     "algorithm = sampled-mftrpo\n"
     "gamma = 0.9\n"
     "eta = 0.05\n"
     "kappa = 0.2\n"
     "big_l = 20\n"
     "beta = 0.1\n"
     "i_per_level = 10000\n"
     "p_trajectories = 10000\n"
     "big_m = 20\n"
     "big_k = 200\n"
     "t_rollout = 40\n"
     "eval_every = 10\n"
     "[output]\n"
     "directory = out/desk-sampled-k200\n"
     "snapshot_steps = 0, 10, 200\n"
     "heatmaps = true\n"},
    {"fp-grid",
     "seeds = 0\n"
     "[env]\n"
     "family = grid\n"
     "walls = 1:2, 2:2, 3:2\n"
     "target = 4:4\n"
     "[solver]\n"
     "algorithm = fp\n"
     "gamma = 0.9\n"
     "eta = 0.05\n"
     "kappa = 0.2\n"
     "beta = 0.01\n"
     "big_m = 100\n"
     "big_k = 5000\n"
     "[output]\n"
     "directory = out/fp-grid\n"},
    {"omd-grid",
     "seeds = 0\n"
     "[env]\n"
     "family = grid\n"
     "walls = 1:2, 2:2, 3:2\n"
     "target = 4:4\n"
     "[solver]\n"
     "algorithm = omd\n"
     "gamma = 0.9\n"
     "eta = 0.05\n"
     "kappa = 0.2\n"
     "beta = 0.01\n"
     "big_m = 100\n"
     "big_k = 5000\n"
     "learning_rate = 0.5\n"
     "[output]\n"
     "directory = out/omd-grid\n"},
    {"islands-exact",
     "seeds = 0\n"
     "[env]\n"
     "family = islands\n"
     "env_seed = 0\n"
     "[solver]\n"
     "algorithm = exact-mftrpo\n"
     "gamma = 0.9\n"
     "eta = 0.3\n"
     "kappa = 0.2\n"
     "big_l = 10\n"
     "beta = 0.01\n"
     "big_m = 100\n"
     "big_k = 2000\n"
     "[output]\n"
     "directory = out/islands-exact\n"},
};

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const Preset& p : kPresets) names.push_back(p.name);
  return names;
}

std::string preset_text(const std::string& name) {
  for (const Preset& p : kPresets) {
    if (name == p.name) return p.text;
  }
  throw std::invalid_argument("unknown preset '" + name + "'");
}

}  // namespace mfg

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfg/envs.hpp"

namespace mfg {

// Parse or validation failure, always carrying "<file>:<line>: <what>" so
// errors point at the offending config line.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class EnvFamily { kGrid, kIslands };

enum class SolverAlgorithm {
  kExactMftrpo,
  kSampledMftrpo,
  kExactFixedPoint,
  kFictitiousPlay,
  kOnlineMirrorDescent,
};

// Starting mean field: the environment's reset distribution or uniform over
// states.
enum class Mu0Choice { kNu, kUniform };

struct SolverSection {
  SolverAlgorithm algorithm = SolverAlgorithm::kExactMftrpo;
  double gamma = 0.9;
  double eta = 0.05;
  int big_l = 10;            // inner policy iterations per outer step
  double beta = 0.01;        // constant population step size
  long i_per_level = 0;      // sampled inner draws; 0 = derive from epsilon/delta
  long p_trajectories = 0;   // pushforward trajectories; 0 = derive
  int big_m = 100;           // pushforward horizon
  int big_k = 100;           // outer iterations
  int t_rollout = 0;         // rollout truncation; 0 = derive
  double epsilon = 0.1;      // accuracy target feeding the sample-size bounds
  double delta = 0.1;        // failure probability for the bounds
  double learning_rate = 0.0;  // omd only; must be > 0 there
  bool classical_averaging = false;  // fp only
  bool warm_start = true;
  int eval_every = 0;
  double eval_tol = 1e-8;
  Mu0Choice mu0 = Mu0Choice::kNu;
};

struct OutputSection {
  std::string directory = "out";
  int snapshot_every = 0;          // 0 = no periodic snapshots
  std::vector<int> snapshot_steps; // explicit extra snapshot iterations
  bool heatmaps = false;           // grid family only
};

// One experiment: an environment, a solver with its hyperparameters, output
// options, and the seed list the harness fans out over. The crowd-aversion
// weight may be set either as env.kappa or solver.kappa (they alias the same
// model constant; setting both is an error).
struct ExperimentConfig {
  EnvFamily family = EnvFamily::kGrid;
  GridSpec grid;
  IslandsSpec islands;
  SolverSection solver;
  OutputSection output;
  std::vector<std::uint64_t> seeds{0};
  std::string source_name = "<none>";  // config path, for error messages
};

// Sectioned key-value format:
//   seeds = 1, 2, 3          # global keys come before the first section
//   [env]
//   family = grid            # must be the first key of [env]
//   walls = 1:2, 2:2         # cell lists use x:y pairs
//   [solver]
//   algorithm = exact-mftrpo
//   ...
//   [output]
//   directory = out/run
// '#' starts a comment; blank lines are ignored; keys may appear at most
// once. Unknown sections, unknown keys, and values that fail to parse are
// hard errors with file:line positions. [env] and [solver] are required.
ExperimentConfig parse_config(const std::string& path);

// Same grammar from an in-memory string; `name` stands in for the file path
// in error messages.
ExperimentConfig parse_config_text(const std::string& text, const std::string& name);

// Render a config back to the text grammar (round-trips through parse).
std::string config_to_text(const ExperimentConfig& cfg);

// Built-in presets: paper-scale Table-2 runs plus desk-scale variants that
// finish in minutes. preset_text throws std::invalid_argument for unknown
// names.
std::vector<std::string> preset_names();
std::string preset_text(const std::string& name);

}  // namespace mfg

#pragma once

#include <optional>
#include <vector>

#include "mfg/core.hpp"
#include "mfg/trace.hpp"

namespace mfg {

enum class BaselineAlgorithm { kFictitiousPlay, kOnlineMirrorDescent };

// Shared knobs for the two population baselines. learning_rate matters only
// for online mirror descent; classical_averaging only for fictitious play.
// Both solvers are deterministic and single-threaded.
struct BaselineConfig {
  BaselineAlgorithm algorithm = BaselineAlgorithm::kFictitiousPlay;
  int big_k = 100;                  // outer iterations
  double eta = 0.1;                 // regularization for best responses / mirror steps
  double learning_rate = 0.0;       // OMD step on the cumulative Q table; >= 0.
                                    // 0 freezes the policy at uniform.
  std::optional<Dist> mu0;          // required
  int big_m = 100;                  // pushforward steps per population update
  BetaSchedule beta = BetaSchedule::constant(0.01);
  bool classical_averaging = false; // FP only: replace the damped M-step push
                                    // by the stationary distribution of the
                                    // current best response
  int eval_every = 0;               // exploitability cadence; 0 = shared default
  std::vector<int> snapshot_steps;
  double eval_tol = 1e-8;
};

// Fictitious play on the averaged mean field. Per iteration k:
//   pi_k    = soft best response at mu_bar_{k-1},
//   mu_k    = damped M-step pushforward of mu_{k-1} under pi_k
//             (classical_averaging: stationary distribution of pi_k at
//              mu_bar_{k-1} instead),
//   mu_bar_k = (1 - 1/k) mu_bar_{k-1} + (1/k) mu_k.
// Trace rows pair pi_k with mu_bar_k; at k = 1 the average equals mu_1.
RunTrace fictitious_play(const MfMdp& mdp, const BaselineConfig& cfg);

// Online mirror descent on cumulative Q tables. Per iteration k:
//   Y_k  = Y_{k-1} + learning_rate * Q^{pi_{k-1}}_{mu_{k-1}}   (Y_0 = 0),
//   pi_k = rowwise softmax(Y_k / eta),
//   mu_k = damped M-step pushforward of mu_{k-1} under pi_k.
// pi_0 is uniform, so learning_rate = 0 leaves the policy frozen there.
RunTrace online_mirror_descent(const MfMdp& mdp, const BaselineConfig& cfg);

}  // namespace mfg

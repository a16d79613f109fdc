#pragma once

#include <optional>
#include <vector>

#include "mfg/core.hpp"
#include "mfg/trace.hpp"

namespace mfg {

// One mirror-style policy improvement step with step size 1 / (eta (l + 2)):
//   pi'(a|s) proportional to pi(a|s) * exp(alpha_l (Q(s,a) - eta log pi(a|s)))
// applied on the listed states only; other rows are returned unchanged.
// Exponentials are max-subtracted. Requires eta > 0, ell >= 0, finite Q, and
// strictly positive pi rows on the updated states. Output rows are strictly
// positive: entries whose exponential underflows are floored at a tiny
// constant so later updates can take their log.
Policy policy_update(const Policy& pi, const Eigen::MatrixXd& q, double eta, int ell,
                     const std::vector<int>& states);

struct ExactTrpoConfig {
  double eta = 0.1;
  int big_l = 10;                    // improvement steps per call
  std::optional<Policy> warm_start;  // starting policy; uniform when absent
  std::optional<Dist> nu;            // restart distribution for the update
                                     // support set; defaults to the mean field
  double support_threshold = 1e-12;  // occupation mass below which a state is
                                     // considered unvisited and left unchanged
};

struct ExactTrpoResult {
  Policy policy;                    // final iterate
  std::vector<double> value_trace;  // J^MFG(pi_l, mu, mu) for l = 0..big_l
};

// Policy improvement against a frozen mean field, with exact evaluation each
// step. The value trace is non-decreasing up to solver precision.
ExactTrpoResult exact_trpo(const MfMdp& mdp, const Dist& mu, const ExactTrpoConfig& cfg);
ExactTrpoResult exact_trpo(const DenseModel& model, const Dist& mu,
                           const ExactTrpoConfig& cfg);

struct ExactMftrpoConfig {
  ExactTrpoConfig trpo;
  int big_k = 100;                 // outer population iterations
  int big_m = 100;                 // pushforward steps per population update
  BetaSchedule beta = BetaSchedule::constant(0.01);
  std::optional<Dist> mu0;         // required
  bool warm_start = true;          // thread the policy across iterations
  int eval_every = 0;              // exploitability cadence; 0 = every
                                   // iteration up to K = 1000, then ceil(K/1000)
  std::vector<int> snapshot_steps; // iterations whose mean field is kept
  double eval_tol = 1e-8;
};

// Outer loop: pi_k from exact_trpo at mu_{k-1}, then the damped M-step
// pushforward mu_k = mu_{k-1} + beta_k (mu_{k-1} (P^{pi_k})^M - mu_{k-1}).
// After the loop one more exact_trpo on the final mean field produces the
// reported policy (final_policy); last_policy is pi_K.
RunTrace exact_mftrpo(const MfMdp& mdp, const ExactMftrpoConfig& cfg);

struct ExactFixedPointConfig {
  double eta = 0.1;
  int big_k = 100;
  int big_m = 100;
  BetaSchedule beta = BetaSchedule::constant(0.01);
  std::optional<Dist> mu0;         // required
  double vi_tol = 1e-8;
  int eval_every = 0;
  std::vector<int> snapshot_steps;
};

// Ground-truth population iteration: the policy is the exact soft best
// response at each step rather than a TRPO iterate. Same damped M-step
// update. Returns the final mean field; the optional trace receives the same
// record structure as the other solvers.
Dist exact_fixed_point(const MfMdp& mdp, const ExactFixedPointConfig& cfg,
                       RunTrace* trace = nullptr);

// Shared cadence rule: every iteration up to 1000 total, else ceil(K / 1000).
int default_eval_every(int big_k);

}  // namespace mfg

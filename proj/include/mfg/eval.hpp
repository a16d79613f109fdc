#pragma once

#include <cstdint>
#include <vector>

#include "mfg/core.hpp"
#include "mfg/rng.hpp"

namespace mfg {

// Exploitability of (pi, mu): the population is pushed to the stationary
// distribution Gamma of the kernel induced by pi at mu, and the gap
//   phi = max_pi' J(pi', Gamma, Gamma) - J(pi, Gamma, Gamma)
// is evaluated there, with the regularized return. phi_unreg re-evaluates the
// same two policies (candidate and soft best response) with eta = 0 returns;
// it is a comparability diagnostic and may be slightly negative.
struct ExploitabilityReport {
  double phi = 0.0;
  double phi_unreg = 0.0;
  double best_response_value = 0.0;
  double policy_value = 0.0;
  Dist stationary;
};

ExploitabilityReport exploitability(const MfMdp& mdp, const Policy& pi, const Dist& mu,
                                    double eta, double tol = 1e-8);

// How far (pi, mu) is from a regularized equilibrium at mu itself:
//   value_gap       = V*(mu, mu) - J(pi, mu, mu)      (best-response gap)
//   fixed_point_gap = || mu - mu P^pi_mu ||_1          (stationarity gap)
struct MfneResidual {
  double value_gap = 0.0;
  double fixed_point_gap = 0.0;
};

MfneResidual mfne_residual(const MfMdp& mdp, const Policy& pi, const Dist& mu, double eta);

// Per-state check of the information-theoretic bound
//   ||pi(.|s) - pi_mu(.|s)||_1^2 <= (2 / (eta (1-gamma))) (J_mu(s) - J_pi(s)),
// where pi_mu is the soft best response at mu. This is a theorem for exact
// quantities; a failure beyond numerical slack indicates an implementation
// bug, not a property of the instance. min_slack = min_s (rhs - lhs).
struct PinskerCheck {
  bool pass = false;
  double min_slack = 0.0;
};

PinskerCheck pinsker_bound_check(const MfMdp& mdp, const Policy& pi, const Dist& mu,
                                 double eta);

// Empirical probe of population-update monotonicity. Phi(mu) is the M-step
// pushforward of mu under the soft best response at mu; for random simplex
// pairs the probe records
//   ratio = <mu - mu', Phi(mu) - Phi(mu')> / ||mu - mu'||_2^2
// and reports the max. max_ratio < 1 is evidence the damped update contracts
// on this instance; it is a diagnostic, not a certificate. Pairs closer than
// 1e-8 in l2 are resampled. Single-state models are degenerate (no
// non-trivial pairs): zero samples, flagged.
struct MonotonicityProbeReport {
  int samples = 0;
  int big_m = 1;
  double max_ratio = 0.0;
  bool degenerate = false;
  std::vector<double> ratios;
};

MonotonicityProbeReport monotonicity_probe(const MfMdp& mdp, double eta, int big_m,
                                           int samples, RngStream& rng);

}  // namespace mfg

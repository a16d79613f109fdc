#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "mfg/core.hpp"
#include "mfg/oracle.hpp"
#include "mfg/rng.hpp"
#include "mfg/trace.hpp"

namespace mfg {

struct SampledTrpoConfig {
  double eta = 0.1;
  int big_l = 10;                  // policy updates per run
  double epsilon = 0.1;            // accuracy target, used by the bound helpers
  double delta = 0.1;              // confidence, used by the bound helpers
  std::int64_t i_per_iter = 1000;  // sampled (state, action, rollout) triples per update
  int t_rollout = 50;              // rollout truncation horizon
  std::optional<Policy> warm_start;
  std::uint64_t seed = 0;          // used by the overload without a stream argument
};

// Uniform mixture over the big_l + 1 policy snapshots of one sampled TRPO
// run. The mixture acts by redrawing a snapshot, so its per-state action
// marginal equals the snapshot average; average() materializes that policy
// for exact evaluation and for driving population rollouts.
struct MixturePolicy {
  std::vector<Policy> policies;

  Policy average() const;
};

const Policy& mixture_policy_draw(const MixturePolicy& mix, RngStream& rng);

// State distributed as the discounted occupation marginal of pi from the
// oracle's reset distribution: walk the chain, stopping with probability
// 1 - gamma before each step.
int sample_occupation_state(EnvOracle& env, const Policy& pi, const Dist& mu,
                            RngStream& rng);

// Single-trajectory estimate of Q(s, a) under the entropy-regularized return:
// r(s, a, mu) plus t_rollout discounted steps of r - eta * log pi along one
// rollout of pi.
double rollout_q_estimate(EnvOracle& env, const Policy& pi, const Dist& mu, int s, int a,
                          int t_rollout, double eta, RngStream& rng);

// Model-free counterpart of exact_trpo at a fixed mean field. Per update:
// i_per_iter states are drawn from the occupation sampler with uniform
// actions; one rollout each accumulates into per-(s, a) sums; visited states
// get Q(s, a) = n_actions * sum(s, a) / (total visits of s) and a policy
// update, unvisited states keep their rows. Sampling is parallelized over
// per-index seeded streams, so results do not depend on the worker count.
MixturePolicy sample_based_trpo(EnvOracle& env, const Dist& mu,
                                const SampledTrpoConfig& cfg, RngStream& rng);
// Same, driven by a fresh stream seeded with cfg.seed.
MixturePolicy sample_based_trpo(EnvOracle& env, const Dist& mu,
                                const SampledTrpoConfig& cfg);

// Pr(level = l) = beta_l * prod_{j=l+1..k}(1 - beta_j), with level 0 taking
// the full survival product. The k + 1 probabilities telescope to 1.
std::vector<double> level_probabilities(const BetaSchedule& beta, int k);
int sample_level(const BetaSchedule& beta, int k, RngStream& rng);

// Start-state sampler for population rollouts: reset, then for each history
// entry up to `level` run big_m steps under that entry's policy and mean
// field. The marginal is nu pushed through the stored kernels in order.
int init_state_from_history(EnvOracle& env,
                            const std::vector<std::pair<Policy, Dist>>& history, int level,
                            int big_m, RngStream& rng);

// Empirical estimate of the big_m-step pushforward of the current population
// under pi_k at mean field mu: p trajectories, each initialized by a sampled
// level of the history, then big_m steps under pi_k; returns the empirical
// distribution of terminal states. k must equal the number of usable history
// entries (the level categorical's upper index).
Dist population_pushforward_estimate(EnvOracle& env, const Policy& pi_k, const Dist& mu,
                                     const std::vector<std::pair<Policy, Dist>>& history,
                                     const BetaSchedule& beta, int k, int big_m,
                                     std::int64_t p, RngStream& rng);

struct SampledMftrpoConfig {
  SampledTrpoConfig trpo;
  int big_k = 10;
  BetaSchedule beta = BetaSchedule::constant(0.1);
  int big_m = 10;                  // chain steps per population update
  std::int64_t p_trajectories = 1000;
  std::uint64_t seed = 0;
  std::optional<Dist> mu0;         // defaults to the oracle's reset distribution
  int eval_every = 0;              // 0: automatic cadence
  std::vector<int> snapshot_steps;
  // When set, trace values and exploitability are computed with the exact
  // evaluator on this model. Diagnostics only: the solver itself touches
  // nothing but the sampling oracle.
  std::optional<MfMdp> exact_model;
  double eval_tol = 1e-8;
};

// Population loop over sample_based_trpo: per iteration the TRPO mixture is
// flattened to its average policy, the pushforward is estimated from p
// trajectories, and the population takes a beta_k-damped step toward it.
// History grows by one (policy, mean field) pair per iteration. For a fixed
// seed the trace is bit-identical across reruns and worker counts.
RunTrace sample_based_mftrpo(EnvOracle& env, const SampledMftrpoConfig& cfg);

// Sample-complexity shapes from the convergence analysis, for sizing configs.
// Each result is clamped to 1e7 (and at least 1).
std::int64_t bound_i_per_iter(double eps, double delta, int n_states, int n_actions,
                              double gamma, double reward_bound, double eta);
int bound_t_rollout(double eps, double gamma, int n_actions, double reward_bound,
                    double eta);
std::int64_t bound_p_trajectories(double eps, double delta);

}  // namespace mfg

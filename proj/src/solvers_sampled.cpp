#include "mfg/solvers_sampled.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "mfg/eval.hpp"
#include "mfg/parallel.hpp"
#include "mfg/solvers_exact.hpp"

namespace mfg {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

bool wants_snapshot(const std::vector<int>& steps, int k) {
  return std::find(steps.begin(), steps.end(), k) != steps.end();
}

int sample_action(const Policy& pi, int s, RngStream& rng) {
  return rng.categorical(pi.probs().row(s), pi.n_actions());
}

void check_policy_matches(const EnvOracle& env, const Policy& pi, const char* who) {
  if (pi.n_states() != env.n_states() || pi.n_actions() != env.n_actions()) {
    throw std::invalid_argument(std::string(who) + ": policy dimensions do not match env");
  }
}

void check_trpo_config(const EnvOracle& env, const SampledTrpoConfig& cfg) {
  if (!(cfg.eta > 0.0)) throw std::invalid_argument("sample_based_trpo: eta must be > 0");
  if (cfg.big_l < 0) throw std::invalid_argument("sample_based_trpo: big_l must be >= 0");
  if (cfg.i_per_iter < 1) {
    throw std::invalid_argument("sample_based_trpo: i_per_iter must be >= 1");
  }
  if (cfg.t_rollout < 1) {
    throw std::invalid_argument("sample_based_trpo: t_rollout must be >= 1");
  }
  if (!(cfg.epsilon > 0.0) || !(cfg.delta > 0.0)) {
    throw std::invalid_argument("sample_based_trpo: epsilon and delta must be > 0");
  }
  if (cfg.warm_start) check_policy_matches(env, *cfg.warm_start, "sample_based_trpo");
}

}  // namespace

Policy MixturePolicy::average() const {
  if (policies.empty()) {
    throw std::invalid_argument("MixturePolicy::average: empty mixture");
  }
  Eigen::MatrixXd acc = policies[0].probs();
  for (std::size_t i = 1; i < policies.size(); ++i) acc += policies[i].probs();
  return Policy(acc / static_cast<double>(policies.size()));
}

const Policy& mixture_policy_draw(const MixturePolicy& mix, RngStream& rng) {
  if (mix.policies.empty()) {
    throw std::invalid_argument("mixture_policy_draw: empty mixture");
  }
  return mix.policies[rng.uniform_int(static_cast<int>(mix.policies.size()))];
}

int sample_occupation_state(EnvOracle& env, const Policy& pi, const Dist& mu,
                            RngStream& rng) {
  check_policy_matches(env, pi, "sample_occupation_state");
  const double gamma = env.gamma();
  int s = env.reset(rng);
  while (rng.uniform() < gamma) {
    int a = sample_action(pi, s, rng);
    s = env.step(s, a, mu, rng).next;
  }
  return s;
}

double rollout_q_estimate(EnvOracle& env, const Policy& pi, const Dist& mu, int s, int a,
                          int t_rollout, double eta, RngStream& rng) {
  if (t_rollout < 1) {
    throw std::invalid_argument("rollout_q_estimate: t_rollout must be >= 1");
  }
  check_policy_matches(env, pi, "rollout_q_estimate");
  const double gamma = env.gamma();
  EnvOracle::Step first = env.step(s, a, mu, rng);
  double total = first.reward;
  double disc = 1.0;
  int cur = first.next;
  for (int t = 1; t <= t_rollout; ++t) {
    disc *= gamma;
    int at = sample_action(pi, cur, rng);
    double p = pi(cur, at);
    if (!(p > 0.0)) {
      throw std::logic_error("rollout_q_estimate: sampled a zero-probability action");
    }
    EnvOracle::Step step = env.step(cur, at, mu, rng);
    total += disc * (step.reward - eta * std::log(p));
    cur = step.next;
  }
  // per-step terms are bounded by r_inf plus the worst entropy bonus the
  // policy can produce, so the discounted sum has this hard cap
  double log_floor = -std::log(pi.probs().minCoeff());
  double cap = (env.reward_bound() + eta * std::max(log_floor, 0.0)) / (1.0 - gamma);
  if (!std::isfinite(total) || std::abs(total) > cap * (1.0 + 1e-12)) {
    throw std::logic_error("rollout_q_estimate: estimate outside its a priori bound");
  }
  return total;
}

MixturePolicy sample_based_trpo(EnvOracle& env, const Dist& mu,
                                const SampledTrpoConfig& cfg, RngStream& rng) {
  check_trpo_config(env, cfg);
  const int n = env.n_states();
  const int m = env.n_actions();
  if (mu.size() != n) {
    throw std::invalid_argument("sample_based_trpo: mu dimension mismatch");
  }
  Policy pi = cfg.warm_start ? *cfg.warm_start : Policy::uniform(n, m);

  MixturePolicy out;
  out.policies.reserve(cfg.big_l + 1);
  out.policies.push_back(pi);

  const std::uint64_t base = rng.next_u64();
  const std::int64_t big_i = cfg.i_per_iter;
  std::vector<int> states(big_i);
  std::vector<int> actions(big_i);
  std::vector<double> returns(big_i);

  for (int ell = 0; ell < cfg.big_l; ++ell) {
    const std::uint64_t ell_base = mix_seed({base, static_cast<std::uint64_t>(ell)});
    parallel_chunks(big_i, [&](std::int64_t lo, std::int64_t hi) {
      auto worker = env.clone();
      for (std::int64_t i = lo; i < hi; ++i) {
        RngStream task(mix_seed({ell_base, static_cast<std::uint64_t>(i)}));
        int si = sample_occupation_state(*worker, pi, mu, task);
        int ai = task.uniform_int(m);
        returns[i] =
            rollout_q_estimate(*worker, pi, mu, si, ai, cfg.t_rollout, cfg.eta, task);
        states[i] = si;
        actions[i] = ai;
      }
    });

    // reductions in index order keep the result worker-count independent
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(n, m);
    Eigen::VectorXd state_visits = Eigen::VectorXd::Zero(n);
    for (std::int64_t i = 0; i < big_i; ++i) {
      sums(states[i], actions[i]) += returns[i];
      state_visits(states[i]) += 1.0;
    }
    Eigen::MatrixXd qhat = Eigen::MatrixXd::Zero(n, m);
    std::vector<int> visited;
    visited.reserve(n);
    for (int s = 0; s < n; ++s) {
      if (state_visits(s) > 0.0) {
        visited.push_back(s);
        for (int a = 0; a < m; ++a) {
          qhat(s, a) = static_cast<double>(m) * sums(s, a) / state_visits(s);
        }
      }
    }
    pi = policy_update(pi, qhat, cfg.eta, ell, visited);
    out.policies.push_back(pi);
  }
  return out;
}

MixturePolicy sample_based_trpo(EnvOracle& env, const Dist& mu,
                                const SampledTrpoConfig& cfg) {
  RngStream rng(cfg.seed);
  return sample_based_trpo(env, mu, cfg, rng);
}

std::vector<double> level_probabilities(const BetaSchedule& beta, int k) {
  if (k < 0) throw std::invalid_argument("level_probabilities: k must be >= 0");
  std::vector<double> probs(k + 1, 0.0);
  double survival = 1.0;
  for (int level = k; level >= 1; --level) {
    double b = beta(level);
    probs[level] = b * survival;
    survival *= 1.0 - b;
  }
  probs[0] = survival;
  double total = 0.0;
  for (double p : probs) total += p;
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::logic_error("level_probabilities: probabilities do not telescope to 1");
  }
  return probs;
}

int sample_level(const BetaSchedule& beta, int k, RngStream& rng) {
  if (k < 1) throw std::invalid_argument("sample_level: k must be >= 1");
  std::vector<double> probs = level_probabilities(beta, k);
  return rng.categorical(probs, k + 1);
}

int init_state_from_history(EnvOracle& env,
                            const std::vector<std::pair<Policy, Dist>>& history, int level,
                            int big_m, RngStream& rng) {
  if (level < 0 || level > static_cast<int>(history.size())) {
    throw std::invalid_argument("init_state_from_history: level out of range");
  }
  if (big_m < 0) throw std::invalid_argument("init_state_from_history: big_m must be >= 0");
  int s = env.reset(rng);
  for (int j = 0; j < level; ++j) {
    const auto& [pi_j, mu_j] = history[j];
    for (int t = 0; t < big_m; ++t) {
      int a = sample_action(pi_j, s, rng);
      s = env.step(s, a, mu_j, rng).next;
    }
  }
  return s;
}

Dist population_pushforward_estimate(EnvOracle& env, const Policy& pi_k, const Dist& mu,
                                     const std::vector<std::pair<Policy, Dist>>& history,
                                     const BetaSchedule& beta, int k, int big_m,
                                     std::int64_t p, RngStream& rng) {
  if (p < 1) {
    throw std::invalid_argument("population_pushforward_estimate: p must be >= 1");
  }
  if (k < 0 || k > static_cast<int>(history.size())) {
    throw std::invalid_argument("population_pushforward_estimate: k out of range");
  }
  check_policy_matches(env, pi_k, "population_pushforward_estimate");
  const std::vector<double> probs =
      k >= 1 ? level_probabilities(beta, k) : std::vector<double>{1.0};
  const std::uint64_t base = rng.next_u64();
  std::vector<int> terminal(p);
  parallel_chunks(p, [&](std::int64_t lo, std::int64_t hi) {
    auto worker = env.clone();
    for (std::int64_t i = lo; i < hi; ++i) {
      RngStream task(mix_seed({base, static_cast<std::uint64_t>(i)}));
      int level = task.categorical(probs, k + 1);
      int s = init_state_from_history(*worker, history, level, big_m, task);
      for (int t = 0; t < big_m; ++t) {
        int a = sample_action(pi_k, s, task);
        s = worker->step(s, a, mu, task).next;
      }
      terminal[i] = s;
    }
  });
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(env.n_states());
  for (std::int64_t i = 0; i < p; ++i) counts(terminal[i]) += 1.0;
  return Dist::normalized(counts / static_cast<double>(p));
}

RunTrace sample_based_mftrpo(EnvOracle& env, const SampledMftrpoConfig& cfg) {
  if (cfg.big_k < 1) throw std::invalid_argument("sample_based_mftrpo: big_k must be >= 1");
  if (cfg.big_m < 1) throw std::invalid_argument("sample_based_mftrpo: big_m must be >= 1");
  if (cfg.p_trajectories < 1) {
    throw std::invalid_argument("sample_based_mftrpo: p_trajectories must be >= 1");
  }
  check_trpo_config(env, cfg.trpo);
  const double eta = cfg.trpo.eta;
  const int cadence = cfg.eval_every > 0 ? cfg.eval_every : default_eval_every(cfg.big_k);

  Dist mu = cfg.mu0 ? *cfg.mu0 : env.reset_distribution();
  if (mu.size() != env.n_states()) {
    throw std::invalid_argument("sample_based_mftrpo: mu0 dimension mismatch");
  }
  Policy pi = cfg.trpo.warm_start ? *cfg.trpo.warm_start
                                  : Policy::uniform(env.n_states(), env.n_actions());
  std::vector<std::pair<Policy, Dist>> history;
  history.reserve(cfg.big_k);

  RunTrace trace;
  if (cfg.exact_model) {
    TraceRecord rec;
    rec.k = 0;
    rec.value =
        mfg_value(policy_evaluation_regularized(*cfg.exact_model, pi, mu, eta), mu);
    ExploitabilityReport rep = exploitability(*cfg.exact_model, pi, mu, eta, cfg.eval_tol);
    rec.exploitability_reg = rep.phi;
    rec.exploitability_unreg = rep.phi_unreg;
    trace.initial = rec;
  } else {
    TraceRecord rec;
    rec.k = 0;
    trace.initial = rec;
  }
  if (wants_snapshot(cfg.snapshot_steps, 0)) {
    trace.mu_snapshots.emplace_back(0, mu);
    trace.policy_snapshots.emplace_back(0, pi);
  }

  for (int k = 1; k <= cfg.big_k; ++k) {
    auto t0 = Clock::now();
    try {
      SampledTrpoConfig inner = cfg.trpo;
      inner.warm_start = pi;
      RngStream trpo_rng(mix_seed({cfg.seed, static_cast<std::uint64_t>(k), 1}));
      MixturePolicy mix = sample_based_trpo(env, mu, inner, trpo_rng);
      Policy pibar = mix.average();
      pi = mix.policies.back();

      RngStream push_rng(mix_seed({cfg.seed, static_cast<std::uint64_t>(k), 2}));
      Dist pushed = population_pushforward_estimate(
          env, pibar, mu, history, cfg.beta, static_cast<int>(history.size()), cfg.big_m,
          cfg.p_trajectories, push_rng);

      double beta_k = cfg.beta(k);
      Dist mu_next = Dist::normalized(mu.vec() + beta_k * (pushed.vec() - mu.vec()));

      TraceRecord rec;
      rec.k = k;
      rec.mu_drift_l1 = (mu_next.vec() - mu.vec()).lpNorm<1>();
      // the history pairs pi_bar with the field its pushforward was run at,
      // so level replays reconstruct the same kernels
      history.emplace_back(pibar, mu);
      mu = mu_next;

      if (cfg.exact_model) {
        rec.value =
            mfg_value(policy_evaluation_regularized(*cfg.exact_model, pibar, mu, eta), mu);
        if (k % cadence == 0 || k == cfg.big_k) {
          ExploitabilityReport rep =
              exploitability(*cfg.exact_model, pibar, mu, eta, cfg.eval_tol);
          rec.exploitability_reg = rep.phi;
          rec.exploitability_unreg = rep.phi_unreg;
        }
      }
      rec.wall_ms = ms_since(t0);
      trace.records.push_back(std::move(rec));
      if (wants_snapshot(cfg.snapshot_steps, k)) {
        trace.mu_snapshots.emplace_back(k, mu);
        trace.policy_snapshots.emplace_back(k, history.back().first);
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("sample_based_mftrpo iteration " + std::to_string(k) +
                               ": " + e.what());
    }
  }

  trace.final_mu = mu;
  trace.last_policy = pi;
  trace.final_policy = history.back().first;
  if (cfg.exact_model) {
    ExploitabilityReport rep =
        exploitability(*cfg.exact_model, history.back().first, mu, eta, cfg.eval_tol);
    trace.final_exploitability_reg = rep.phi;
    trace.final_exploitability_unreg = rep.phi_unreg;
    Policy br = soft_value_iteration(*cfg.exact_model, mu, eta, cfg.eval_tol).second;
    trace.final_fixed_point_residual =
        mfne_residual(*cfg.exact_model, br, mu, eta).fixed_point_gap;
  }
  return trace;
}

namespace {

std::int64_t clamp_bound(double v) {
  if (!(v > 0.0)) return 1;
  double capped = std::min(v, 1e7);
  return static_cast<std::int64_t>(std::ceil(capped));
}

}  // namespace

std::int64_t bound_i_per_iter(double eps, double delta, int n_states, int n_actions,
                              double gamma, double reward_bound, double eta) {
  if (!(eps > 0.0) || !(delta > 0.0)) {
    throw std::invalid_argument("bound_i_per_iter: eps and delta must be > 0");
  }
  double log_a = std::log(static_cast<double>(n_actions));
  double scale2 = reward_bound * reward_bound + eta * eta * log_a * log_a;
  double cover = n_states * std::log(2.0 * n_actions) + std::log(1.0 / delta);
  double denom = (1.0 - gamma) * (1.0 - gamma) * eps * eps;
  double v = n_actions * static_cast<double>(n_actions) * scale2 * cover / denom;
  return clamp_bound(v);
}

int bound_t_rollout(double eps, double gamma, int n_actions, double reward_bound,
                    double eta) {
  if (!(eps > 0.0)) throw std::invalid_argument("bound_t_rollout: eps must be > 0");
  double scale = n_actions * (reward_bound + eta * std::log(static_cast<double>(n_actions)));
  double v = std::log(std::max(scale / eps, 1.0)) / (1.0 - gamma);
  return static_cast<int>(clamp_bound(v));
}

std::int64_t bound_p_trajectories(double eps, double delta) {
  if (!(eps > 0.0) || !(delta > 0.0)) {
    throw std::invalid_argument("bound_p_trajectories: eps and delta must be > 0");
  }
  return clamp_bound(64.0 / (eps * eps) * std::log(2.0 / delta));
}

}  // namespace mfg

#include "mfg/solvers_exact.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "mfg/eval.hpp"

namespace mfg {

namespace {

// Positivity floor for mirror-step rows; keeps log pi finite after exp
// underflow while staying orders of magnitude below every tolerance in use.
constexpr double kMinProb = 1e-300;

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

bool wants_snapshot(const std::vector<int>& steps, int k) {
  return std::find(steps.begin(), steps.end(), k) != steps.end();
}

}  // namespace

int default_eval_every(int big_k) {
  if (big_k <= 1000) return 1;
  return (big_k + 999) / 1000;
}

Policy policy_update(const Policy& pi, const Eigen::MatrixXd& q, double eta, int ell,
                     const std::vector<int>& states) {
  if (!(eta > 0.0)) throw std::invalid_argument("policy_update: eta must be > 0");
  if (ell < 0) throw std::invalid_argument("policy_update: ell must be >= 0");
  if (q.rows() != pi.n_states() || q.cols() != pi.n_actions()) {
    throw std::invalid_argument("policy_update: Q dimensions do not match policy");
  }
  if (!q.allFinite()) {
    throw std::invalid_argument("policy_update: Q has non-finite entries");
  }
  double alpha = 1.0 / (eta * (ell + 2));
  Eigen::MatrixXd probs = pi.probs();
  int m = pi.n_actions();
  for (int s : states) {
    if (s < 0 || s >= pi.n_states()) {
      throw std::invalid_argument("policy_update: state index out of range");
    }
    Eigen::VectorXd w(m);
    for (int a = 0; a < m; ++a) {
      double p = probs(s, a);
      if (!(p > 0.0)) {
        throw std::invalid_argument(
            "policy_update: zero-probability action on an updated state");
      }
      double logp = std::log(p);
      w(a) = logp + alpha * (q(s, a) - eta * logp);
    }
    double wmax = w.maxCoeff();
    double norm = 0.0;
    for (int a = 0; a < m; ++a) {
      w(a) = std::exp(w(a) - wmax);
      norm += w(a);
    }
    probs.row(s) = (w / norm).transpose();
    // The mirror step preserves strict positivity in exact arithmetic, but a
    // large enough sampled-Q spread can push exp below the smallest double.
    // Floor those entries so downstream log pi stays finite; the mass taken
    // from the dominant actions is far below any tolerance in use.
    bool floored = false;
    for (int a = 0; a < m; ++a) {
      if (probs(s, a) < kMinProb) {
        probs(s, a) = kMinProb;
        floored = true;
      }
    }
    if (floored) probs.row(s) /= probs.row(s).sum();
  }
  return Policy(std::move(probs));
}

ExactTrpoResult exact_trpo(const DenseModel& model, const Dist& mu,
                           const ExactTrpoConfig& cfg) {
  if (cfg.big_l < 0) throw std::invalid_argument("exact_trpo: big_l must be >= 0");
  if (!(cfg.eta > 0.0)) throw std::invalid_argument("exact_trpo: eta must be > 0");
  int n = model.n_states();
  int m = model.n_actions();
  if (mu.size() != n) throw std::invalid_argument("exact_trpo: mu dimension mismatch");
  Policy pi = cfg.warm_start ? *cfg.warm_start : Policy::uniform(n, m);
  if (pi.n_states() != n || pi.n_actions() != m) {
    throw std::invalid_argument("exact_trpo: warm start dimensions do not match");
  }
  const Dist& nu = cfg.nu ? *cfg.nu : mu;
  if (nu.size() != n) throw std::invalid_argument("exact_trpo: nu dimension mismatch");

  ExactTrpoResult out{pi, {}};
  out.value_trace.reserve(cfg.big_l + 1);
  for (int ell = 0; ell < cfg.big_l; ++ell) {
    ValueTable values = policy_evaluation_regularized(model, pi, cfg.eta);
    out.value_trace.push_back(mfg_value(values, mu));
    Eigen::MatrixXd d = occupation_measure(model, pi, nu);
    Eigen::VectorXd dbar = d.rowwise().sum();
    std::vector<int> support;
    support.reserve(n);
    for (int s = 0; s < n; ++s) {
      if (dbar(s) > cfg.support_threshold) support.push_back(s);
    }
    pi = policy_update(pi, values.q, cfg.eta, ell, support);
  }
  out.value_trace.push_back(
      mfg_value(policy_evaluation_regularized(model, pi, cfg.eta), mu));
  out.policy = pi;
  return out;
}

ExactTrpoResult exact_trpo(const MfMdp& mdp, const Dist& mu, const ExactTrpoConfig& cfg) {
  return exact_trpo(materialize(mdp, mu), mu, cfg);
}

RunTrace exact_mftrpo(const MfMdp& mdp, const ExactMftrpoConfig& cfg) {
  validate_model(mdp);
  if (!cfg.mu0) throw std::invalid_argument("exact_mftrpo: mu0 is required");
  if (cfg.big_k < 1) throw std::invalid_argument("exact_mftrpo: big_k must be >= 1");
  if (cfg.big_m < 1) throw std::invalid_argument("exact_mftrpo: big_m must be >= 1");
  double eta = cfg.trpo.eta;
  int cadence = cfg.eval_every > 0 ? cfg.eval_every : default_eval_every(cfg.big_k);

  Dist mu = *cfg.mu0;
  Policy pi = cfg.trpo.warm_start ? *cfg.trpo.warm_start
                                  : Policy::uniform(mdp.n_states, mdp.n_actions);
  DenseModel model = materialize(mdp, mu);

  RunTrace trace;
  {
    TraceRecord rec;
    rec.k = 0;
    rec.value = mfg_value(policy_evaluation_regularized(model, pi, eta), mu);
    ExploitabilityReport rep = exploitability(mdp, pi, mu, eta, cfg.eval_tol);
    rec.exploitability_reg = rep.phi;
    rec.exploitability_unreg = rep.phi_unreg;
    trace.initial = rec;
  }
  if (wants_snapshot(cfg.snapshot_steps, 0)) trace.mu_snapshots.emplace_back(0, mu);

  if (wants_snapshot(cfg.snapshot_steps, 0)) trace.policy_snapshots.emplace_back(0, pi);

  for (int k = 1; k <= cfg.big_k; ++k) {
    auto t0 = Clock::now();
    try {
      ExactTrpoConfig inner = cfg.trpo;
      if (cfg.warm_start) inner.warm_start = pi;
      ExactTrpoResult res = exact_trpo(model, mu, inner);
      pi = res.policy;

      Kernel k_pi = induced_kernel(model, pi);
      Dist pushed = kernel_power_apply(mu, k_pi, cfg.big_m);
      double beta_k = cfg.beta(k);
      Dist mu_next = Dist::normalized(mu.vec() + beta_k * (pushed.vec() - mu.vec()));

      TraceRecord rec;
      rec.k = k;
      rec.mu_drift_l1 = (mu_next.vec() - mu.vec()).lpNorm<1>();
      mu = mu_next;
      model = materialize(mdp, mu);
      rec.value = mfg_value(policy_evaluation_regularized(model, pi, eta), mu);
      if (k % cadence == 0 || k == cfg.big_k) {
        ExploitabilityReport rep = exploitability(mdp, pi, mu, eta, cfg.eval_tol);
        rec.exploitability_reg = rep.phi;
        rec.exploitability_unreg = rep.phi_unreg;
      }
      rec.wall_ms = ms_since(t0);
      trace.records.push_back(std::move(rec));
      if (wants_snapshot(cfg.snapshot_steps, k)) {
        trace.mu_snapshots.emplace_back(k, mu);
        trace.policy_snapshots.emplace_back(k, pi);
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("exact_mftrpo iteration " + std::to_string(k) + ": " +
                               e.what());
    }
  }

  trace.last_policy = pi;
  trace.final_mu = mu;
  {
    // Refit on the final mean field; this pairing is what gets reported. The
    // stationarity residual instead pairs mu with its own soft best response.
    ExactTrpoConfig inner = cfg.trpo;
    if (cfg.warm_start) inner.warm_start = pi;
    Policy refit = exact_trpo(model, mu, inner).policy;
    ExploitabilityReport rep = exploitability(mdp, refit, mu, eta, cfg.eval_tol);
    trace.final_policy = refit;
    trace.final_exploitability_reg = rep.phi;
    trace.final_exploitability_unreg = rep.phi_unreg;
    Policy br = soft_value_iteration(model, eta, cfg.eval_tol).second;
    trace.final_fixed_point_residual = mfne_residual(mdp, br, mu, eta).fixed_point_gap;
  }
  return trace;
}

Dist exact_fixed_point(const MfMdp& mdp, const ExactFixedPointConfig& cfg,
                       RunTrace* trace) {
  validate_model(mdp);
  if (!cfg.mu0) throw std::invalid_argument("exact_fixed_point: mu0 is required");
  if (cfg.big_k < 1) throw std::invalid_argument("exact_fixed_point: big_k must be >= 1");
  if (cfg.big_m < 1) throw std::invalid_argument("exact_fixed_point: big_m must be >= 1");
  int cadence = cfg.eval_every > 0 ? cfg.eval_every : default_eval_every(cfg.big_k);

  Dist mu = *cfg.mu0;
  if (trace) {
    TraceRecord rec;
    rec.k = 0;
    Policy uni = Policy::uniform(mdp.n_states, mdp.n_actions);
    rec.value = mfg_value(policy_evaluation_regularized(mdp, uni, mu, cfg.eta), mu);
    ExploitabilityReport rep = exploitability(mdp, uni, mu, cfg.eta, cfg.vi_tol);
    rec.exploitability_reg = rep.phi;
    rec.exploitability_unreg = rep.phi_unreg;
    trace->initial = rec;
    if (wants_snapshot(cfg.snapshot_steps, 0)) trace->mu_snapshots.emplace_back(0, mu);
  }

  for (int k = 1; k <= cfg.big_k; ++k) {
    auto t0 = Clock::now();
    DenseModel model = materialize(mdp, mu);
    auto [values, br] = soft_value_iteration(model, cfg.eta, cfg.vi_tol);
    Kernel k_br = induced_kernel(model, br);
    Dist pushed = kernel_power_apply(mu, k_br, cfg.big_m);
    double beta_k = cfg.beta(k);
    Dist mu_next = Dist::normalized(mu.vec() + beta_k * (pushed.vec() - mu.vec()));
    double drift = (mu_next.vec() - mu.vec()).lpNorm<1>();
    mu = mu_next;
    if (trace) {
      TraceRecord rec;
      rec.k = k;
      rec.mu_drift_l1 = drift;
      DenseModel next_model = materialize(mdp, mu);
      rec.value = mfg_value(policy_evaluation_regularized(next_model, br, cfg.eta), mu);
      if (k % cadence == 0 || k == cfg.big_k) {
        ExploitabilityReport rep = exploitability(mdp, br, mu, cfg.eta, cfg.vi_tol);
        rec.exploitability_reg = rep.phi;
        rec.exploitability_unreg = rep.phi_unreg;
      }
      rec.wall_ms = ms_since(t0);
      trace->records.push_back(std::move(rec));
      if (wants_snapshot(cfg.snapshot_steps, k)) {
        trace->mu_snapshots.emplace_back(k, mu);
        trace->policy_snapshots.emplace_back(k, br);
      }
      trace->last_policy = br;
    }
  }

  if (trace) {
    auto [values, br] = soft_value_iteration(mdp, mu, cfg.eta, cfg.vi_tol);
    ExploitabilityReport rep = exploitability(mdp, br, mu, cfg.eta, cfg.vi_tol);
    trace->final_mu = mu;
    trace->final_policy = br;
    trace->final_exploitability_reg = rep.phi;
    trace->final_exploitability_unreg = rep.phi_unreg;
    trace->final_fixed_point_residual = mfne_residual(mdp, br, mu, cfg.eta).fixed_point_gap;
  }
  return mu;
}

}  // namespace mfg

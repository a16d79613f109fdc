#include "mfg/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mfg/eval.hpp"
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

void validate_common(const MfMdp& mdp, const BaselineConfig& cfg, const char* who) {
  validate_model(mdp);
  std::string w(who);
  if (cfg.big_k < 1) throw std::invalid_argument(w + ": big_k must be >= 1");
  if (cfg.big_m < 1) throw std::invalid_argument(w + ": big_m must be >= 1");
  if (!(cfg.eta > 0.0)) throw std::invalid_argument(w + ": eta must be > 0");
  if (!cfg.mu0) throw std::invalid_argument(w + ": mu0 is required");
  if (cfg.mu0->size() != mdp.n_states) {
    throw std::invalid_argument(w + ": mu0 dimension does not match the model");
  }
}

// Rowwise softmax of y / eta with max subtraction.
Policy softmax_policy(const Eigen::MatrixXd& y, double eta) {
  Eigen::MatrixXd probs(y.rows(), y.cols());
  for (int s = 0; s < y.rows(); ++s) {
    Eigen::VectorXd w = y.row(s).transpose() / eta;
    double wmax = w.maxCoeff();
    Eigen::VectorXd e = (w.array() - wmax).exp();
    probs.row(s) = (e / e.sum()).transpose();
  }
  return Policy(std::move(probs));
}

void fill_eval(const MfMdp& mdp, const Policy& pi, const Dist& mu, double eta,
               double tol, TraceRecord& rec) {
  ExploitabilityReport rep = exploitability(mdp, pi, mu, eta, tol);
  rec.exploitability_reg = rep.phi;
  rec.exploitability_unreg = rep.phi_unreg;
}

// Final refit shared by both baselines: the reported policy is the soft best
// response on the final mean field, matching the trace convention of the
// population solvers.
void fill_final(const MfMdp& mdp, const Dist& mu, const Policy& last, double eta,
                double tol, RunTrace& trace) {
  trace.last_policy = last;
  trace.final_mu = mu;
  Policy br = soft_value_iteration(mdp, mu, eta, tol).second;
  ExploitabilityReport rep = exploitability(mdp, br, mu, eta, tol);
  trace.final_policy = br;
  trace.final_exploitability_reg = rep.phi;
  trace.final_exploitability_unreg = rep.phi_unreg;
  trace.final_fixed_point_residual = mfne_residual(mdp, br, mu, eta).fixed_point_gap;
}

}  // namespace

RunTrace fictitious_play(const MfMdp& mdp, const BaselineConfig& cfg) {
  validate_common(mdp, cfg, "fictitious_play");
  if (cfg.algorithm != BaselineAlgorithm::kFictitiousPlay) {
    throw std::invalid_argument("fictitious_play: config selects a different algorithm");
  }
  const double eta = cfg.eta;
  int cadence = cfg.eval_every > 0 ? cfg.eval_every : default_eval_every(cfg.big_k);

  Dist mu = *cfg.mu0;      // current population
  Dist mu_bar = *cfg.mu0;  // running average, the reported mean field
  Policy pi = Policy::uniform(mdp.n_states, mdp.n_actions);

  RunTrace trace;
  {
    TraceRecord rec;
    rec.k = 0;
    rec.value = mfg_value(policy_evaluation_regularized(mdp, pi, mu_bar, eta), mu_bar);
    fill_eval(mdp, pi, mu_bar, eta, cfg.eval_tol, rec);
    trace.initial = rec;
  }
  if (wants_snapshot(cfg.snapshot_steps, 0)) {
    trace.mu_snapshots.emplace_back(0, mu_bar);
    trace.policy_snapshots.emplace_back(0, pi);
  }

  for (int k = 1; k <= cfg.big_k; ++k) {
    auto t0 = Clock::now();
    try {
      DenseModel at_bar = materialize(mdp, mu_bar);
      pi = soft_value_iteration(at_bar, eta, cfg.eval_tol).second;

      if (cfg.classical_averaging) {
        mu = stationary_distribution(induced_kernel(at_bar, pi));
      } else {
        Kernel k_pi = induced_kernel(mdp, pi, mu);
        Dist pushed = kernel_power_apply(mu, k_pi, cfg.big_m);
        double beta_k = cfg.beta(k);
        mu = Dist::normalized(mu.vec() + beta_k * (pushed.vec() - mu.vec()));
      }
      Dist bar_next =
          Dist::normalized(mu_bar.vec() + (mu.vec() - mu_bar.vec()) / double(k));

      TraceRecord rec;
      rec.k = k;
      rec.mu_drift_l1 = (bar_next.vec() - mu_bar.vec()).lpNorm<1>();
      mu_bar = bar_next;
      rec.value = mfg_value(policy_evaluation_regularized(mdp, pi, mu_bar, eta), mu_bar);
      if (k % cadence == 0 || k == cfg.big_k) {
        fill_eval(mdp, pi, mu_bar, eta, cfg.eval_tol, rec);
      }
      rec.wall_ms = ms_since(t0);
      trace.records.push_back(std::move(rec));
      if (wants_snapshot(cfg.snapshot_steps, k)) {
        trace.mu_snapshots.emplace_back(k, mu_bar);
        trace.policy_snapshots.emplace_back(k, pi);
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("fictitious_play iteration " + std::to_string(k) + ": " +
                               e.what());
    }
  }

  fill_final(mdp, mu_bar, pi, eta, cfg.eval_tol, trace);
  return trace;
}

RunTrace online_mirror_descent(const MfMdp& mdp, const BaselineConfig& cfg) {
  validate_common(mdp, cfg, "online_mirror_descent");
  if (cfg.algorithm != BaselineAlgorithm::kOnlineMirrorDescent) {
    throw std::invalid_argument(
        "online_mirror_descent: config selects a different algorithm");
  }
  if (!(cfg.learning_rate >= 0.0)) {
    throw std::invalid_argument("online_mirror_descent: learning_rate must be >= 0");
  }
  const double eta = cfg.eta;
  int cadence = cfg.eval_every > 0 ? cfg.eval_every : default_eval_every(cfg.big_k);

  Dist mu = *cfg.mu0;
  Policy pi = Policy::uniform(mdp.n_states, mdp.n_actions);
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(mdp.n_states, mdp.n_actions);

  RunTrace trace;
  {
    TraceRecord rec;
    rec.k = 0;
    rec.value = mfg_value(policy_evaluation_regularized(mdp, pi, mu, eta), mu);
    fill_eval(mdp, pi, mu, eta, cfg.eval_tol, rec);
    trace.initial = rec;
  }
  if (wants_snapshot(cfg.snapshot_steps, 0)) {
    trace.mu_snapshots.emplace_back(0, mu);
    trace.policy_snapshots.emplace_back(0, pi);
  }

  for (int k = 1; k <= cfg.big_k; ++k) {
    auto t0 = Clock::now();
    try {
      y += cfg.learning_rate * policy_evaluation_regularized(mdp, pi, mu, eta).q;
      pi = softmax_policy(y, eta);

      Kernel k_pi = induced_kernel(mdp, pi, mu);
      Dist pushed = kernel_power_apply(mu, k_pi, cfg.big_m);
      double beta_k = cfg.beta(k);
      Dist mu_next = Dist::normalized(mu.vec() + beta_k * (pushed.vec() - mu.vec()));

      TraceRecord rec;
      rec.k = k;
      rec.mu_drift_l1 = (mu_next.vec() - mu.vec()).lpNorm<1>();
      mu = mu_next;
      rec.value = mfg_value(policy_evaluation_regularized(mdp, pi, mu, eta), mu);
      if (k % cadence == 0 || k == cfg.big_k) {
        fill_eval(mdp, pi, mu, eta, cfg.eval_tol, rec);
      }
      rec.wall_ms = ms_since(t0);
      trace.records.push_back(std::move(rec));
      if (wants_snapshot(cfg.snapshot_steps, k)) {
        trace.mu_snapshots.emplace_back(k, mu);
        trace.policy_snapshots.emplace_back(k, pi);
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("online_mirror_descent iteration " + std::to_string(k) +
                               ": " + e.what());
    }
  }

  fill_final(mdp, mu, pi, eta, cfg.eval_tol, trace);
  return trace;
}

}  // namespace mfg

#include "mfg/eval.hpp"

#include <cmath>

#include "mfg/parallel.hpp"

namespace mfg {

ExploitabilityReport exploitability(const MfMdp& mdp, const Policy& pi, const Dist& mu,
                                    double eta, double tol) {
  Kernel k = induced_kernel(mdp, pi, mu);
  // Sampled solvers can hand in near-deterministic policies whose kernels mix
  // far slower than the default cap's 0.999 assumption; spend the full
  // iteration budget before declaring failure.
  Dist gamma_dist = stationary_distribution(k, 1e-10, 1000000);
  DenseModel at_gamma = materialize(mdp, gamma_dist);

  auto [opt_values, br] = soft_value_iteration(at_gamma, eta, tol);
  ValueTable pi_values = policy_evaluation_regularized(at_gamma, pi, eta);

  ExploitabilityReport report{0.0, 0.0, 0.0, 0.0, gamma_dist};
  report.best_response_value = mfg_value(opt_values, gamma_dist);
  report.policy_value = mfg_value(pi_values, gamma_dist);
  report.phi = report.best_response_value - report.policy_value;

  double br_unreg = mfg_value(policy_evaluation_regularized(at_gamma, br, 0.0), gamma_dist);
  double pi_unreg = mfg_value(policy_evaluation_regularized(at_gamma, pi, 0.0), gamma_dist);
  report.phi_unreg = br_unreg - pi_unreg;
  return report;
}

MfneResidual mfne_residual(const MfMdp& mdp, const Policy& pi, const Dist& mu, double eta) {
  DenseModel model = materialize(mdp, mu);
  auto [opt_values, br] = soft_value_iteration(model, eta, 1e-10);
  ValueTable pi_values = policy_evaluation_regularized(model, pi, eta);
  MfneResidual res;
  res.value_gap = mfg_value(opt_values, mu) - mfg_value(pi_values, mu);
  Eigen::VectorXd pushed = induced_kernel(model, pi).mat().transpose() * mu.vec();
  res.fixed_point_gap = (mu.vec() - pushed).lpNorm<1>();
  return res;
}

PinskerCheck pinsker_bound_check(const MfMdp& mdp, const Policy& pi, const Dist& mu,
                                 double eta) {
  if (!(eta > 0.0)) {
    throw std::invalid_argument("pinsker_bound_check: eta must be > 0");
  }
  DenseModel model = materialize(mdp, mu);
  // The slack is amplified by 2 / (eta (1-gamma)); solve the optimal values
  // tightly enough that the amplified evaluation error stays below 1e-10.
  double tol = std::min(1e-10, 0.5e-10 * eta * (1.0 - mdp.gamma));
  auto [opt_values, br] = soft_value_iteration(model, eta, tol);
  ValueTable pi_values = policy_evaluation_regularized(model, pi, eta);
  double factor = 2.0 / (eta * (1.0 - mdp.gamma));
  double min_slack = std::numeric_limits<double>::infinity();
  for (int s = 0; s < mdp.n_states; ++s) {
    double tv = (pi.probs().row(s) - br.probs().row(s)).lpNorm<1>();
    double rhs = factor * (opt_values.j(s) - pi_values.j(s));
    double slack = rhs - tv * tv;
    if (slack < min_slack) min_slack = slack;
  }
  PinskerCheck check;
  check.min_slack = min_slack;
  check.pass = min_slack >= -1e-9;
  return check;
}

namespace {

Eigen::VectorXd dirichlet_unit(RngStream& rng, int n) {
  Eigen::VectorXd p(n);
  for (int i = 0; i < n; ++i) p(i) = rng.exponential();
  return p / p.sum();
}

// M-step pushforward of mu under its own soft best response.
Eigen::VectorXd best_response_pushforward(const MfMdp& mdp, const Eigen::VectorXd& mu,
                                          double eta, int big_m) {
  Dist d = Dist::normalized(mu);
  DenseModel model = materialize(mdp, d);
  auto [values, br] = soft_value_iteration(model, eta, 1e-10);
  Kernel k = induced_kernel(model, br);
  return kernel_power_apply(d, k, big_m).vec();
}

}  // namespace

MonotonicityProbeReport monotonicity_probe(const MfMdp& mdp, double eta, int big_m,
                                           int samples, RngStream& rng) {
  if (samples < 1) throw std::invalid_argument("monotonicity_probe: samples must be >= 1");
  if (big_m < 1) throw std::invalid_argument("monotonicity_probe: big_m must be >= 1");
  validate_model(mdp);
  MonotonicityProbeReport report;
  report.big_m = big_m;
  if (mdp.n_states < 2) {
    report.degenerate = true;
    return report;
  }
  std::uint64_t base = rng.next_u64();
  report.samples = samples;
  report.ratios.assign(samples, 0.0);
  auto* slots = &report.ratios;
  parallel_chunks(samples, [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t i = lo; i < hi; ++i) {
      RngStream task_rng(mix_seed({base, static_cast<std::uint64_t>(i)}));
      Eigen::VectorXd mu1, mu2;
      double dist;
      do {
        mu1 = dirichlet_unit(task_rng, mdp.n_states);
        mu2 = dirichlet_unit(task_rng, mdp.n_states);
        dist = (mu1 - mu2).norm();
      } while (dist < 1e-8);
      Eigen::VectorXd push1 = best_response_pushforward(mdp, mu1, eta, big_m);
      Eigen::VectorXd push2 = best_response_pushforward(mdp, mu2, eta, big_m);
      (*slots)[i] = (mu1 - mu2).dot(push1 - push2) / (dist * dist);
    }
  });
  double max_ratio = -std::numeric_limits<double>::infinity();
  for (double r : report.ratios) max_ratio = std::max(max_ratio, r);
  report.max_ratio = samples > 0 ? max_ratio : 0.0;
  return report;
}

}  // namespace mfg

#include "mfg/core.hpp"

#include <cmath>
#include <limits>

namespace mfg {

namespace detail {

void check_prob_vector(const Eigen::VectorXd& p, const char* what) {
  if (p.size() == 0) {
    throw std::invalid_argument(std::string(what) + ": empty probability vector");
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    double v = p(i);
    if (!std::isfinite(v) || v < 0.0) {
      throw std::invalid_argument(std::string(what) + ": entry " + std::to_string(i) +
                                  " is " + std::to_string(v));
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kSumTol) {
    throw std::invalid_argument(std::string(what) + ": entries sum to " +
                                std::to_string(sum) + ", expected 1");
  }
}

}  // namespace detail

Dist::Dist(Eigen::VectorXd p) : p_(std::move(p)) {
  detail::check_prob_vector(p_, "Dist");
}

Dist Dist::uniform(int n) {
  if (n <= 0) throw std::invalid_argument("Dist::uniform: n must be positive");
  return Dist(Eigen::VectorXd::Constant(n, 1.0 / n));
}

Dist Dist::point_mass(int n, int s) {
  if (n <= 0 || s < 0 || s >= n) {
    throw std::invalid_argument("Dist::point_mass: index out of range");
  }
  Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
  p(s) = 1.0;
  return Dist(std::move(p));
}

Dist Dist::normalized(Eigen::VectorXd p) {
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (!std::isfinite(p(i)) || p(i) < -detail::kSumTol) {
      throw std::invalid_argument("Dist::normalized: entry " + std::to_string(i) +
                                  " is " + std::to_string(p(i)));
    }
    if (p(i) < 0.0) p(i) = 0.0;
  }
  double sum = p.sum();
  if (!(sum > 0.0)) {
    throw std::invalid_argument("Dist::normalized: nonpositive total mass");
  }
  p /= sum;
  return Dist(std::move(p));
}

Policy::Policy(Eigen::MatrixXd probs) : probs_(std::move(probs)) {
  if (probs_.rows() == 0 || probs_.cols() == 0) {
    throw std::invalid_argument("Policy: empty table");
  }
  for (Eigen::Index s = 0; s < probs_.rows(); ++s) {
    detail::check_prob_vector(probs_.row(s).transpose(), "Policy row");
  }
}

Policy Policy::uniform(int n_states, int n_actions) {
  if (n_states <= 0 || n_actions <= 0) {
    throw std::invalid_argument("Policy::uniform: sizes must be positive");
  }
  return Policy(Eigen::MatrixXd::Constant(n_states, n_actions, 1.0 / n_actions));
}

Kernel::Kernel(Eigen::MatrixXd mat) : mat_(std::move(mat)) {
  if (mat_.rows() == 0 || mat_.rows() != mat_.cols()) {
    throw std::invalid_argument("Kernel: matrix must be square and nonempty");
  }
  for (Eigen::Index s = 0; s < mat_.rows(); ++s) {
    detail::check_prob_vector(mat_.row(s).transpose(), "Kernel row");
  }
}

void validate_model(const MfMdp& mdp) {
  if (mdp.n_states <= 0 || mdp.n_actions <= 0) {
    throw std::invalid_argument("MfMdp: state and action counts must be positive");
  }
  if (!(mdp.gamma >= 0.0) || mdp.gamma >= 1.0) {
    throw std::invalid_argument("MfMdp: gamma must lie in [0, 1)");
  }
  if (!(mdp.reward_bound > 0.0)) {
    throw std::invalid_argument("MfMdp: reward_bound must be positive");
  }
  if (!mdp.transition || !mdp.reward) {
    throw std::invalid_argument("MfMdp: transition and reward must be set");
  }
}

namespace {

// Direct LU solves up to this size; fixed-point iteration beyond it.
constexpr int kDirectSolveMaxStates = 2000;
constexpr long kHardIterCap = 1000000;

void check_mu(const MfMdp& mdp, const Dist& mu) {
  if (mu.size() != mdp.n_states) {
    throw std::invalid_argument("mean field dimension does not match n_states");
  }
}

void check_policy_dims(int n_states, int n_actions, const Policy& pi) {
  if (pi.n_states() != n_states || pi.n_actions() != n_actions) {
    throw std::invalid_argument("policy dimensions do not match model");
  }
}

long geometric_iter_cap(double gamma, double target, double scale) {
  if (gamma <= 0.0) return 3;
  double steps = std::log(target / (scale + 1.0)) / std::log(gamma);
  if (!std::isfinite(steps) || steps < 3.0) return 3;
  if (steps > static_cast<double>(kHardIterCap)) return kHardIterCap;
  return static_cast<long>(steps) + 5;
}

// J for a fixed policy given its induced kernel and expected one-step
// regularized reward.
Eigen::VectorXd solve_policy_values(const Eigen::MatrixXd& k, const Eigen::VectorXd& rtil,
                                    double gamma, double scale) {
  int n = static_cast<int>(k.rows());
  if (n <= kDirectSolveMaxStates) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) - gamma * k;
    return a.partialPivLu().solve(rtil);
  }
  Eigen::VectorXd j = Eigen::VectorXd::Zero(n);
  double target = 1e-8 * (1.0 - gamma);
  long cap = geometric_iter_cap(gamma, target, scale);
  double res = std::numeric_limits<double>::infinity();
  for (long it = 0; it < cap; ++it) {
    Eigen::VectorXd next = rtil + gamma * (k * j);
    res = (next - j).lpNorm<Eigen::Infinity>();
    j.swap(next);
    if (res <= target) return j;
  }
  throw ConvergenceError("policy evaluation fixed point did not converge", res);
}

}  // namespace

DenseModel materialize(const MfMdp& mdp, const Dist& mu) {
  validate_model(mdp);
  check_mu(mdp, mu);
  DenseModel model;
  model.gamma = mdp.gamma;
  model.reward_bound = mdp.reward_bound;
  model.p.assign(mdp.n_actions, Eigen::MatrixXd(mdp.n_states, mdp.n_states));
  model.r.resize(mdp.n_states, mdp.n_actions);
  for (int a = 0; a < mdp.n_actions; ++a) {
    for (int s = 0; s < mdp.n_states; ++s) {
      Eigen::VectorXd row = mdp.transition(s, a, mu.vec());
      if (row.size() != mdp.n_states) {
        throw std::invalid_argument("transition row has wrong dimension");
      }
      detail::check_prob_vector(row, "transition row");
      model.p[a].row(s) = row.transpose();
      double rew = mdp.reward(s, a, mu.vec());
      if (!std::isfinite(rew) || std::abs(rew) > mdp.reward_bound + 1e-9) {
        throw std::invalid_argument("reward " + std::to_string(rew) +
                                    " exceeds reward_bound " +
                                    std::to_string(mdp.reward_bound));
      }
      model.r(s, a) = rew;
    }
  }
  return model;
}

Kernel induced_kernel(const DenseModel& model, const Policy& pi) {
  check_policy_dims(model.n_states(), model.n_actions(), pi);
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(model.n_states(), model.n_states());
  for (int a = 0; a < model.n_actions(); ++a) {
    k.noalias() += pi.probs().col(a).asDiagonal() * model.p[a];
  }
  return Kernel(std::move(k));
}

Kernel induced_kernel(const MfMdp& mdp, const Policy& pi, const Dist& mu) {
  return induced_kernel(materialize(mdp, mu), pi);
}

Dist kernel_power_apply(const Dist& mu, const Kernel& k, int m) {
  if (m < 0) throw std::invalid_argument("kernel_power_apply: m must be >= 0");
  if (mu.size() != k.size()) {
    throw std::invalid_argument("kernel_power_apply: dimension mismatch");
  }
  Eigen::VectorXd x = mu.vec();
  for (int i = 0; i < m; ++i) {
    x = k.mat().transpose() * x;
  }
  return Dist::normalized(std::move(x));
}

Dist stationary_distribution(const Kernel& k, double tol, long max_iter) {
  if (!(tol > 0.0)) throw std::invalid_argument("stationary_distribution: tol must be > 0");
  long cap = max_iter;
  if (cap <= 0) {
    double auto_cap = std::ceil(std::log(tol) / std::log(0.999));
    cap = auto_cap < 1.0 ? 1 : static_cast<long>(auto_cap);
    if (cap > kHardIterCap) cap = kHardIterCap;
  }
  int n = k.size();
  Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / n);
  double res = std::numeric_limits<double>::infinity();
  for (long it = 0; it < cap; ++it) {
    Eigen::VectorXd y = k.mat().transpose() * x;
    y /= y.sum();
    res = (y - x).lpNorm<1>();
    if (res <= tol) {
      return Dist::normalized(std::move(x));
    }
    x.swap(y);
  }
  throw ConvergenceError("stationary distribution power iteration did not converge", res);
}

ValueTable policy_evaluation_regularized(const DenseModel& model, const Policy& pi,
                                         double eta) {
  check_policy_dims(model.n_states(), model.n_actions(), pi);
  if (eta < 0.0) throw std::invalid_argument("policy evaluation: eta must be >= 0");
  int n = model.n_states();
  int m = model.n_actions();
  Eigen::VectorXd rtil = Eigen::VectorXd::Zero(n);
  for (int s = 0; s < n; ++s) {
    double acc = 0.0;
    for (int a = 0; a < m; ++a) {
      double p = pi(s, a);
      if (p > 0.0) {
        double bonus = eta > 0.0 ? -eta * std::log(p) : 0.0;
        acc += p * (model.r(s, a) + bonus);
      }
    }
    rtil(s) = acc;
  }
  Eigen::MatrixXd k = induced_kernel(model, pi).mat();
  double scale = value_scale(model.reward_bound, eta, m, model.gamma);
  ValueTable out;
  out.j = solve_policy_values(k, rtil, model.gamma, scale);
  out.q.resize(n, m);
  for (int a = 0; a < m; ++a) {
    out.q.col(a) = model.r.col(a) + model.gamma * (model.p[a] * out.j);
  }
  return out;
}

ValueTable policy_evaluation_regularized(const MfMdp& mdp, const Policy& pi,
                                         const Dist& mu, double eta) {
  return policy_evaluation_regularized(materialize(mdp, mu), pi, eta);
}

std::pair<ValueTable, Policy> soft_value_iteration(const DenseModel& model, double eta,
                                                   double tol) {
  if (!(eta > 0.0)) {
    throw std::invalid_argument("soft_value_iteration: eta must be > 0");
  }
  if (!(tol > 0.0)) {
    throw std::invalid_argument("soft_value_iteration: tol must be > 0");
  }
  int n = model.n_states();
  int m = model.n_actions();
  double gamma = model.gamma;
  double scale = value_scale(model.reward_bound, eta, m, gamma);
  double target = tol * (1.0 - gamma);
  long cap = geometric_iter_cap(gamma, target, scale);
  Eigen::VectorXd j = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd q(n, m);
  double res = std::numeric_limits<double>::infinity();
  bool converged = false;
  for (long it = 0; it < cap; ++it) {
    for (int a = 0; a < m; ++a) {
      q.col(a) = model.r.col(a) + gamma * (model.p[a] * j);
    }
    Eigen::VectorXd next(n);
    for (int s = 0; s < n; ++s) {
      double qmax = q.row(s).maxCoeff();
      double acc = 0.0;
      for (int a = 0; a < m; ++a) {
        acc += std::exp((q(s, a) - qmax) / eta);
      }
      next(s) = qmax + eta * std::log(acc);
    }
    res = (next - j).lpNorm<Eigen::Infinity>();
    j.swap(next);
    if (res <= target) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw ConvergenceError("soft value iteration did not converge", res);
  }
  // Final Q consistent with the returned J, and the soft-greedy policy.
  for (int a = 0; a < m; ++a) {
    q.col(a) = model.r.col(a) + gamma * (model.p[a] * j);
  }
  Eigen::MatrixXd probs(n, m);
  for (int s = 0; s < n; ++s) {
    double qmax = q.row(s).maxCoeff();
    double norm = 0.0;
    for (int a = 0; a < m; ++a) {
      probs(s, a) = std::exp((q(s, a) - qmax) / eta);
      norm += probs(s, a);
    }
    probs.row(s) /= norm;
  }
  ValueTable values;
  values.j = std::move(j);
  values.q = std::move(q);
  return {std::move(values), Policy(std::move(probs))};
}

std::pair<ValueTable, Policy> soft_value_iteration(const MfMdp& mdp, const Dist& mu,
                                                   double eta, double tol) {
  return soft_value_iteration(materialize(mdp, mu), eta, tol);
}

Eigen::MatrixXd occupation_measure(const DenseModel& model, const Policy& pi,
                                   const Dist& xi) {
  check_policy_dims(model.n_states(), model.n_actions(), pi);
  if (xi.size() != model.n_states()) {
    throw std::invalid_argument("occupation_measure: xi dimension mismatch");
  }
  int n = model.n_states();
  double gamma = model.gamma;
  Eigen::MatrixXd kt = induced_kernel(model, pi).mat().transpose();
  Eigen::VectorXd dbar;
  if (n <= kDirectSolveMaxStates) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) - gamma * kt;
    dbar = a.partialPivLu().solve((1.0 - gamma) * xi.vec());
  } else {
    dbar = Eigen::VectorXd::Zero(n);
    double target = 1e-8 * (1.0 - gamma);
    long cap = geometric_iter_cap(gamma, target, 1.0);
    double res = std::numeric_limits<double>::infinity();
    bool done = false;
    for (long it = 0; it < cap; ++it) {
      Eigen::VectorXd next = (1.0 - gamma) * xi.vec() + gamma * (kt * dbar);
      res = (next - dbar).lpNorm<1>();
      dbar.swap(next);
      if (res <= target) {
        done = true;
        break;
      }
    }
    if (!done) throw ConvergenceError("occupation measure fixed point did not converge", res);
  }
  return dbar.asDiagonal() * pi.probs();
}

Eigen::MatrixXd occupation_measure(const MfMdp& mdp, const Policy& pi, const Dist& mu,
                                   const Dist& xi) {
  return occupation_measure(materialize(mdp, mu), pi, xi);
}

double value_scale(double reward_bound, double eta, int n_actions, double gamma) {
  double log_a = n_actions > 1 ? std::log(static_cast<double>(n_actions)) : 0.0;
  return (reward_bound + std::abs(eta) * log_a) / (1.0 - gamma);
}

}  // namespace mfg

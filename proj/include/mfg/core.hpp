#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mfg {

// Thrown by iterative routines that hit their iteration cap before reaching
// the requested tolerance. Carries the last observed residual.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what + " (last residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

namespace detail {
// Validation tolerance for simplex/stochasticity checks.
inline constexpr double kSumTol = 1e-12;
void check_prob_vector(const Eigen::VectorXd& p, const char* what);
}  // namespace detail

// Probability distribution over states (or any finite set). Immutable;
// entries nonnegative, summing to 1 within 1e-12.
class Dist {
 public:
  explicit Dist(Eigen::VectorXd p);

  static Dist uniform(int n);
  static Dist point_mass(int n, int s);
  // Clamps negatives above -1e-12 to zero and rescales to sum exactly 1.
  // For outputs of arithmetic that is exact up to rounding (convex updates,
  // power iteration); anything more negative still throws.
  static Dist normalized(Eigen::VectorXd p);

  const Eigen::VectorXd& vec() const { return p_; }
  double operator()(int i) const { return p_(i); }
  int size() const { return static_cast<int>(p_.size()); }

 private:
  Eigen::VectorXd p_;
};

// Stationary policy: row s = distribution over actions in state s.
class Policy {
 public:
  explicit Policy(Eigen::MatrixXd probs);

  static Policy uniform(int n_states, int n_actions);

  const Eigen::MatrixXd& probs() const { return probs_; }
  double operator()(int s, int a) const { return probs_(s, a); }
  int n_states() const { return static_cast<int>(probs_.rows()); }
  int n_actions() const { return static_cast<int>(probs_.cols()); }

 private:
  Eigen::MatrixXd probs_;
};

// Row-stochastic state transition matrix: row s = next-state distribution.
class Kernel {
 public:
  explicit Kernel(Eigen::MatrixXd mat);

  const Eigen::MatrixXd& mat() const { return mat_; }
  double operator()(int s, int t) const { return mat_(s, t); }
  int size() const { return static_cast<int>(mat_.rows()); }

 private:
  Eigen::MatrixXd mat_;
};

// State values J and state-action values Q for one (policy, mean field) pair.
struct ValueTable {
  Eigen::VectorXd j;  // per state
  Eigen::MatrixXd q;  // states x actions
};

// Mean-field MDP: finite state and action sets with transition and reward
// depending on the population distribution mu. transition(s, a, mu) returns
// the next-state distribution as a plain vector (row-stochastic, validated
// when materialized); reward(s, a, mu) is bounded by reward_bound in
// absolute value.
struct MfMdp {
  int n_states = 0;
  int n_actions = 0;
  double gamma = 0.9;
  double reward_bound = 1.0;
  std::function<Eigen::VectorXd(int, int, const Eigen::VectorXd&)> transition;
  std::function<double(int, int, const Eigen::VectorXd&)> reward;
};

// Throws invalid_argument unless sizes are positive, gamma is in [0,1),
// reward_bound > 0 and both callables are set.
void validate_model(const MfMdp& mdp);

// Transition tensor and reward table materialized at a fixed mean field.
// p[a](s, t) = P(t | s, a, mu); r(s, a) = reward. Lets the exact solvers
// evaluate many policies against one mu without re-querying the model.
struct DenseModel {
  std::vector<Eigen::MatrixXd> p;
  Eigen::MatrixXd r;
  double gamma = 0.0;
  double reward_bound = 0.0;

  int n_states() const { return static_cast<int>(r.rows()); }
  int n_actions() const { return static_cast<int>(r.cols()); }
};

DenseModel materialize(const MfMdp& mdp, const Dist& mu);

// Single-agent kernel induced by a policy at a fixed mean field:
// K(s, t) = sum_a pi(a|s) P(t | s, a, mu).
Kernel induced_kernel(const MfMdp& mdp, const Policy& pi, const Dist& mu);
Kernel induced_kernel(const DenseModel& model, const Policy& pi);

// mu K^m, computed by m successive vector-matrix products. m >= 0.
Dist kernel_power_apply(const Dist& mu, const Kernel& k, int m);

// Stationary distribution by power iteration from the uniform start, stopped
// when ||xK - x||_1 <= tol. The iteration cap is ceil(log(tol)/log(0.999))
// clamped to 1e6 unless max_iter overrides it; hitting the cap throws
// ConvergenceError with the last residual.
Dist stationary_distribution(const Kernel& k, double tol = 1e-10, long max_iter = 0);

// Values of a fixed policy under the entropy-regularized return
//   J(s) = E[ sum_t gamma^t ( r(s_t, a_t, mu) - eta * log pi(a_t | s_t) ) ],
// with the convention 0 * log 0 = 0 for zero-probability actions.
// Q(s, a) = r(s, a, mu) + gamma * sum_t P(t|s,a,mu) J(t); the entropy term
// enters Q only through J. Solved directly via LU for n_states <= 2000,
// otherwise by Bellman fixed-point iteration to 1e-10 * (value scale).
ValueTable policy_evaluation_regularized(const MfMdp& mdp, const Policy& pi,
                                         const Dist& mu, double eta);
ValueTable policy_evaluation_regularized(const DenseModel& model, const Policy& pi,
                                         double eta);

// Optimal regularized values and the soft-greedy policy at a fixed mean
// field, by value iteration on
//   J(s) <- eta * log sum_a exp(Q(s, a) / eta),
//   Q(s, a) = r(s, a, mu) + gamma * sum_t P(t|s,a,mu) J(t),
// with max-subtracted exponentials. Requires eta > 0. Stops when the sup-norm
// change is <= tol * (1 - gamma); returns {values, softmax policy}.
std::pair<ValueTable, Policy> soft_value_iteration(const MfMdp& mdp, const Dist& mu,
                                                   double eta, double tol = 1e-8);
std::pair<ValueTable, Policy> soft_value_iteration(const DenseModel& model, double eta,
                                                   double tol = 1e-8);

// Discounted state-action occupation measure with restart distribution xi:
//   d(s, a) = (1 - gamma) * sum_t gamma^t Pr(s_t = s, a_t = a).
// Returned as a states x actions matrix summing to 1. The state marginal
// solves dbar = (1-gamma) xi + gamma * K^T dbar.
Eigen::MatrixXd occupation_measure(const MfMdp& mdp, const Policy& pi, const Dist& mu,
                                   const Dist& xi);
Eigen::MatrixXd occupation_measure(const DenseModel& model, const Policy& pi,
                                   const Dist& xi);

// J^MFG(pi, mu, xi) = sum_s xi(s) J(s) for an already-computed value table.
inline double mfg_value(const ValueTable& values, const Dist& xi) {
  return xi.vec().dot(values.j);
}

// Upper bound (r_inf + eta log|A|) / (1 - gamma) on |J| under the
// regularized return; used for iteration caps and test tolerances.
double value_scale(double reward_bound, double eta, int n_actions, double gamma);

}  // namespace mfg

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "mfg/core.hpp"
#include "mfg/rng.hpp"
#include "test_util.hpp"

using namespace mfg;
using namespace mfg_test;

namespace {

// Two-state chain used across several cases. Rows [[0.7,0.3],[0.6,0.4]];
// stationary distribution (2/3, 1/3) by balance: 0.3*g0 = 0.6*g1.
Kernel two_state_chain() {
  Eigen::MatrixXd k(2, 2);
  k << 0.7, 0.3, 0.6, 0.4;
  return Kernel(std::move(k));
}

// Single-state MDP with one scalar reward.
MfMdp single_state(double reward, double gamma) {
  MfMdp mdp;
  mdp.n_states = 1;
  mdp.n_actions = 1;
  mdp.gamma = gamma;
  mdp.reward_bound = std::abs(reward) + 1.0;
  mdp.transition = [](int, int, const Eigen::VectorXd&) {
    return Eigen::VectorXd::Ones(1);
  };
  mdp.reward = [reward](int, int, const Eigen::VectorXd&) { return reward; };
  return mdp;
}

// One state, two actions, rewards r0/r1, gamma = 0: the regularized control
// problem with closed-form soft optimum.
MfMdp bandit(double r0, double r1) {
  MfMdp mdp;
  mdp.n_states = 1;
  mdp.n_actions = 2;
  mdp.gamma = 0.0;
  mdp.reward_bound = std::max(std::abs(r0), std::abs(r1)) + 1.0;
  mdp.transition = [](int, int, const Eigen::VectorXd&) {
    return Eigen::VectorXd::Ones(1);
  };
  mdp.reward = [r0, r1](int, int a, const Eigen::VectorXd&) {
    return a == 0 ? r0 : r1;
  };
  return mdp;
}

}  // namespace

TEST_CASE("dist and policy validation") {
  CHECK_THROWS_AS(Dist{Eigen::VectorXd::Constant(3, 0.5)}, std::invalid_argument);
  Eigen::VectorXd neg(2);
  neg << 1.2, -0.2;
  CHECK_THROWS_AS(Dist{neg}, std::invalid_argument);
  CHECK_THROWS_AS(Dist::normalized(Eigen::VectorXd::Zero(2)), std::invalid_argument);

  Eigen::VectorXd drift(2);
  drift << 0.5 + 3e-13, 0.5;  // within ctor tolerance
  CHECK_NOTHROW(Dist{drift});

  Eigen::MatrixXd bad_rows(2, 2);
  bad_rows << 0.5, 0.5, 0.9, 0.2;
  CHECK_THROWS_AS(Policy{bad_rows}, std::invalid_argument);

  Eigen::MatrixXd rect(2, 3);
  rect.setConstant(0.5);
  CHECK_THROWS_AS(Kernel{rect}, std::invalid_argument);

  // Dimension mismatches are invalid-argument, not silent recycling.
  MfMdp mdp = make_random_mfmdp(7, 3, 2, 0.9);
  CHECK_THROWS_AS(induced_kernel(mdp, Policy::uniform(4, 2), Dist::uniform(3)),
                  std::invalid_argument);
  CHECK_THROWS_AS(materialize(mdp, Dist::uniform(2)), std::invalid_argument);
}

TEST_CASE("induced kernel matches definition") {
  SUBCASE("deterministic policy selects the action row") {
    MfMdp mdp = make_random_mfmdp(11, 3, 2, 0.9);
    Dist mu = Dist::uniform(3);
    Eigen::MatrixXd det(3, 2);
    det << 1, 0, 0, 1, 1, 0;
    Policy pi(det);
    Kernel k = induced_kernel(mdp, pi, mu);
    for (int s = 0; s < 3; ++s) {
      int a = s == 1 ? 1 : 0;
      Eigen::VectorXd row = mdp.transition(s, a, mu.vec());
      CHECK(l1_diff(k.mat().row(s).transpose(), row) < 1e-14);
    }
  }

  SUBCASE("uniform mix of opposite point kernels is a coin flip") {
    MfMdp mdp;
    mdp.n_states = 2;
    mdp.n_actions = 2;
    mdp.gamma = 0.5;
    mdp.reward_bound = 1.0;
    mdp.transition = [](int, int a, const Eigen::VectorXd&) {
      Eigen::VectorXd row = Eigen::VectorXd::Zero(2);
      row(a) = 1.0;
      return row;
    };
    mdp.reward = [](int, int, const Eigen::VectorXd&) { return 0.0; };
    Kernel k = induced_kernel(mdp, Policy::uniform(2, 2), Dist::uniform(2));
    CHECK(k(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(k(1, 1) == doctest::Approx(0.5).epsilon(1e-14));
  }

  SUBCASE("random instance against the loop oracle") {
    MfMdp mdp = make_random_mfmdp(13, 3, 4, 0.9);
    RngStream rng(99);
    Policy pi = random_policy(rng, 3, 4);
    Dist mu = random_dist(rng, 3);
    Kernel k = induced_kernel(mdp, pi, mu);
    Eigen::MatrixXd want = oracle_induced_kernel(mdp, pi, mu);
    CHECK((k.mat() - want).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("kernel power apply") {
  Kernel k = two_state_chain();
  Dist mu = Dist::point_mass(2, 0);

  CHECK(l1_diff(kernel_power_apply(mu, k, 0).vec(), mu.vec()) == 0.0);

  // (1,0) K^2 = (0.67, 0.33), by hand.
  Dist two = kernel_power_apply(mu, k, 2);
  CHECK(two(0) == doctest::Approx(0.67).epsilon(1e-12));
  CHECK(two(1) == doctest::Approx(0.33).epsilon(1e-12));

  Kernel id{Eigen::MatrixXd::Identity(4, 4)};
  Dist x = Dist::uniform(4);
  CHECK(l1_diff(kernel_power_apply(x, id, 57).vec(), x.vec()) < 1e-15);

  CHECK_THROWS_AS(kernel_power_apply(mu, k, -1), std::invalid_argument);
}

TEST_CASE("stationary distribution") {
  SUBCASE("two-state chain has stationary (2/3, 1/3)") {
    Dist g = stationary_distribution(two_state_chain(), 1e-12);
    CHECK(g(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
    CHECK(g(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
  }

  SUBCASE("doubly stochastic kernel is uniform") {
    Eigen::MatrixXd m(3, 3);
    m << 0.2, 0.3, 0.5, 0.5, 0.2, 0.3, 0.3, 0.5, 0.2;
    Dist g = stationary_distribution(Kernel(m), 1e-11);
    for (int i = 0; i < 3; ++i) CHECK(g(i) == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  }

  SUBCASE("postcondition holds on a random chain") {
    MfMdp mdp = make_random_mfmdp(17, 5, 3, 0.9);
    RngStream rng(3);
    Kernel k = induced_kernel(mdp, random_policy(rng, 5, 3), random_dist(rng, 5));
    double tol = 1e-10;
    Dist g = stationary_distribution(k, tol);
    Eigen::VectorXd gk = k.mat().transpose() * g.vec();
    CHECK(l1_diff(gk, g.vec()) <= tol);
  }

  SUBCASE("iteration cap reached raises with residual") {
    Eigen::MatrixXd slow(2, 2);
    slow << 0.999, 0.001, 0.002, 0.998;
    CHECK_THROWS_AS(stationary_distribution(Kernel(slow), 1e-12, 1), ConvergenceError);
    try {
      stationary_distribution(Kernel(slow), 1e-12, 1);
    } catch (const ConvergenceError& e) {
      CHECK(e.residual() > 0.0);
    }
  }
}

TEST_CASE("policy evaluation, regularized") {
  SUBCASE("single state geometric series, entropy-free point mass") {
    // r = 1, gamma = 0.9: J = 10. A point-mass policy has log pi = 0, so
    // eta does not change the value.
    MfMdp mdp = single_state(1.0, 0.9);
    Policy pi = Policy::uniform(1, 1);
    for (double eta : {0.0, 1.0}) {
      ValueTable v = policy_evaluation_regularized(mdp, pi, Dist::uniform(1), eta);
      CHECK(v.j(0) == doctest::Approx(10.0).epsilon(1e-12));
      CHECK(v.q(0, 0) == doctest::Approx(10.0).epsilon(1e-12));
    }
  }

  SUBCASE("gamma = 0 reduces to the expected one-step regularized reward") {
    MfMdp mdp = bandit(1.0, 0.0);
    Policy pi = Policy::uniform(1, 2);
    double eta = 0.7;
    ValueTable v = policy_evaluation_regularized(mdp, pi, Dist::uniform(1), eta);
    double want = 0.5 * 1.0 + eta * std::log(2.0);  // mean reward + eta * entropy
    CHECK(v.j(0) == doctest::Approx(want).epsilon(1e-13));
    CHECK(v.q(0, 0) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(v.q(0, 1) == doctest::Approx(0.0).epsilon(1e-13));
  }

  SUBCASE("uniform policy entropy accumulates geometrically") {
    // Zero rewards, uniform policy over 2 actions: J = eta*log(2)/(1-gamma).
    MfMdp mdp = bandit(0.0, 0.0);
    mdp.gamma = 0.8;
    ValueTable v = policy_evaluation_regularized(mdp, Policy::uniform(1, 2),
                                                 Dist::uniform(1), 1.0);
    CHECK(v.j(0) == doctest::Approx(std::log(2.0) / 0.2).epsilon(1e-12));
  }

  SUBCASE("random instance agrees with the Bellman iteration oracle") {
    MfMdp mdp = make_random_mfmdp(23, 3, 2, 0.9);
    RngStream rng(5);
    Policy pi = random_policy(rng, 3, 2);
    Dist mu = random_dist(rng, 3);
    double eta = 0.1;
    ValueTable v = policy_evaluation_regularized(mdp, pi, mu, eta);
    Eigen::VectorXd want = oracle_policy_values(mdp, pi, mu, eta, 400);
    CHECK(l1_diff(v.j, want) < 1e-6);

    // Bellman consistency of the Q table against the returned J.
    DenseModel model = materialize(mdp, mu);
    for (int s = 0; s < 3; ++s) {
      for (int a = 0; a < 2; ++a) {
        double rhs = model.r(s, a) + mdp.gamma * model.p[a].row(s).dot(v.j);
        CHECK(v.q(s, a) == doctest::Approx(rhs).epsilon(1e-12));
      }
    }
  }

  SUBCASE("zero-probability actions contribute zero entropy") {
    // Deterministic row in a 2-action model: 0 * log 0 must be treated as 0.
    MfMdp mdp = bandit(1.0, 0.0);
    mdp.gamma = 0.5;
    Eigen::MatrixXd det(1, 2);
    det << 1.0, 0.0;
    ValueTable v = policy_evaluation_regularized(mdp, Policy(det), Dist::uniform(1), 1.0);
    CHECK(std::isfinite(v.j(0)));
    CHECK(v.j(0) == doctest::Approx(2.0).epsilon(1e-12));
  }

  CHECK_THROWS_AS(policy_evaluation_regularized(bandit(1, 0), Policy::uniform(1, 2),
                                                Dist::uniform(1), -0.1),
                  std::invalid_argument);
}

TEST_CASE("soft value iteration") {
  SUBCASE("closed form on the two-armed bandit") {
    // r = (1, 0), gamma = 0, eta = 1: J = log(1 + e),
    // pi = (e, 1) / (1 + e).
    auto [values, pi] = soft_value_iteration(bandit(1.0, 0.0), Dist::uniform(1), 1.0, 1e-12);
    CHECK(values.j(0) == doctest::Approx(std::log(1.0 + std::exp(1.0))).epsilon(1e-12));
    CHECK(pi(0, 0) == doctest::Approx(std::exp(1.0) / (1.0 + std::exp(1.0))).epsilon(1e-12));
    CHECK(pi(0, 1) == doctest::Approx(1.0 / (1.0 + std::exp(1.0))).epsilon(1e-12));
  }

  SUBCASE("equal rewards give the uniform soft-greedy policy") {
    auto [values, pi] = soft_value_iteration(bandit(0.4, 0.4), Dist::uniform(1), 0.3, 1e-10);
    CHECK(pi(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(values.j(0) == doctest::Approx(0.4 + 0.3 * std::log(2.0)).epsilon(1e-10));
  }

  SUBCASE("optimal values dominate every sampled policy and match self-evaluation") {
    MfMdp mdp = make_random_mfmdp(31, 4, 3, 0.9);
    RngStream rng(8);
    Dist mu = random_dist(rng, 4);
    double eta = 0.2;
    double tol = 1e-10;
    auto [values, pi_star] = soft_value_iteration(mdp, mu, eta, tol);

    ValueTable self = policy_evaluation_regularized(mdp, pi_star, mu, eta);
    CHECK(l1_diff(values.j, self.j) < 1e-7);

    for (int trial = 0; trial < 20; ++trial) {
      Policy pi = random_policy(rng, 4, 3);
      ValueTable v = policy_evaluation_regularized(mdp, pi, mu, eta);
      for (int s = 0; s < 4; ++s) CHECK(v.j(s) <= values.j(s) + 1e-8);
    }

    double bound = value_scale(mdp.reward_bound, eta, 3, mdp.gamma);
    CHECK(values.j.lpNorm<Eigen::Infinity>() <= bound + 1e-9);
  }

  SUBCASE("eta must be positive") {
    CHECK_THROWS_AS(soft_value_iteration(bandit(1, 0), Dist::uniform(1), 0.0, 1e-8),
                    std::invalid_argument);
  }
}

TEST_CASE("occupation measure") {
  SUBCASE("gamma = 0 collapses to the restart joint") {
    MfMdp mdp = make_random_mfmdp(37, 3, 2, 0.9);
    mdp.gamma = 0.0;
    RngStream rng(21);
    Policy pi = random_policy(rng, 3, 2);
    Dist xi = random_dist(rng, 3);
    Eigen::MatrixXd d = occupation_measure(mdp, pi, Dist::uniform(3), xi);
    for (int s = 0; s < 3; ++s) {
      for (int a = 0; a < 2; ++a) {
        CHECK(d(s, a) == doctest::Approx(xi(s) * pi(s, a)).epsilon(1e-13));
      }
    }
  }

  SUBCASE("single absorbing state weights the policy row") {
    MfMdp mdp = bandit(0.0, 0.0);
    mdp.gamma = 0.9;
    Eigen::MatrixXd probs(1, 2);
    probs << 0.3, 0.7;
    Eigen::MatrixXd d = occupation_measure(mdp, Policy(probs), Dist::uniform(1),
                                           Dist::uniform(1));
    CHECK(d(0, 0) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(d(0, 1) == doctest::Approx(0.7).epsilon(1e-12));
  }

  SUBCASE("random instance against the truncated series oracle") {
    MfMdp mdp = make_random_mfmdp(41, 3, 3, 0.9);
    RngStream rng(6);
    Policy pi = random_policy(rng, 3, 3);
    Dist mu = random_dist(rng, 3);
    Dist xi = random_dist(rng, 3);
    Eigen::MatrixXd d = occupation_measure(mdp, pi, mu, xi);
    Eigen::MatrixXd want = oracle_occupation_series(mdp, pi, mu, xi, 500);
    CHECK((d - want).cwiseAbs().sum() < 1e-8);

    // Total mass 1, and the state marginal recomposes through pi.
    CHECK(d.sum() == doctest::Approx(1.0).epsilon(1e-10));
    Eigen::VectorXd dbar = d.rowwise().sum();
    for (int s = 0; s < 3; ++s) {
      for (int a = 0; a < 3; ++a) {
        CHECK(d(s, a) == doctest::Approx(dbar(s) * pi(s, a)).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("value scale bound") {
  // (r_inf + eta log|A|) / (1 - gamma); sanity on the numbers used all over.
  CHECK(value_scale(1.0, 0.0, 2, 0.9) == doctest::Approx(10.0));
  CHECK(value_scale(1.0, 1.0, 1, 0.5) == doctest::Approx(2.0));
  CHECK(value_scale(2.0, 0.5, 4, 0.0) ==
        doctest::Approx(2.0 + 0.5 * std::log(4.0)));
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "mfg/baselines.hpp"
#include "mfg/envs.hpp"
#include "mfg/eval.hpp"
#include "test_util.hpp"

using namespace mfg;
using namespace mfg_test;

namespace {

BaselineConfig fp_config(const Dist& mu0) {
  BaselineConfig cfg;
  cfg.algorithm = BaselineAlgorithm::kFictitiousPlay;
  cfg.mu0 = mu0;
  return cfg;
}

BaselineConfig omd_config(const Dist& mu0, double lr) {
  BaselineConfig cfg;
  cfg.algorithm = BaselineAlgorithm::kOnlineMirrorDescent;
  cfg.mu0 = mu0;
  cfg.learning_rate = lr;
  return cfg;
}

// Dynamics that ignore state, action and population: every row uniform.
MfMdp uniform_rows_mdp(int n, int m) {
  MfMdp mdp;
  mdp.n_states = n;
  mdp.n_actions = m;
  mdp.gamma = 0.9;
  mdp.reward_bound = 1.0;
  mdp.transition = [n](int, int, const Eigen::VectorXd&) {
    return Eigen::VectorXd::Constant(n, 1.0 / n).eval();
  };
  mdp.reward = [](int s, int a, const Eigen::VectorXd& mu) {
    return 0.3 * (a == 0) + 0.1 * mu(s);
  };
  return mdp;
}

}  // namespace

TEST_CASE("fictitious play") {
  SUBCASE("one step: the average equals the first pushed population") {
    MfMdp mdp = make_random_mfmdp(11, 4, 3, 0.9);
    RngStream rng(7);
    Dist mu0 = random_dist(rng, 4);
    BaselineConfig cfg = fp_config(mu0);
    cfg.big_k = 1;
    cfg.big_m = 5;
    cfg.beta = BetaSchedule::constant(0.2);
    RunTrace trace = fictitious_play(mdp, cfg);

    // Recompute mu_1 with the same primitive operations.
    Policy br = soft_value_iteration(mdp, mu0, cfg.eta, cfg.eval_tol).second;
    Dist pushed = kernel_power_apply(mu0, induced_kernel(mdp, br, mu0), 5);
    Dist mu1 = Dist::normalized(mu0.vec() + 0.2 * (pushed.vec() - mu0.vec()));

    REQUIRE(trace.records.size() == 1);
    REQUIRE(trace.final_mu.has_value());
    CHECK(l1_diff(trace.final_mu->vec(), mu1.vec()) < 1e-14);
    CHECK(trace.records[0].mu_drift_l1 ==
          doctest::Approx(l1_diff(mu1.vec(), mu0.vec())).epsilon(1e-12));
  }

  SUBCASE("single-state game has zero exploitability throughout") {
    MfMdp mdp;
    mdp.n_states = 1;
    mdp.n_actions = 2;
    mdp.gamma = 0.8;
    mdp.reward_bound = 1.0;
    mdp.transition = [](int, int, const Eigen::VectorXd&) {
      return Eigen::VectorXd::Ones(1).eval();
    };
    mdp.reward = [](int, int a, const Eigen::VectorXd&) { return a == 0 ? 1.0 : 0.2; };
    BaselineConfig cfg = fp_config(Dist::point_mass(1, 0));
    cfg.big_k = 8;
    RunTrace trace = fictitious_play(mdp, cfg);
    REQUIRE(trace.initial.has_value());
    for (const auto& rec : trace.records) {
      REQUIRE(rec.exploitability_reg.has_value());
      CHECK(std::abs(*rec.exploitability_reg) < 1e-8);
    }
    CHECK(std::abs(*trace.final_exploitability_reg) < 1e-8);
  }

  SUBCASE("classical averaging replaces the push by the stationary distribution") {
    MfMdp mdp = uniform_rows_mdp(4, 2);
    RngStream rng(3);
    BaselineConfig cfg = fp_config(random_dist(rng, 4));
    cfg.big_k = 1;
    cfg.classical_averaging = true;
    RunTrace trace = fictitious_play(mdp, cfg);
    // Every induced kernel is the uniform matrix, so mu_1 (and hence the
    // k = 1 average) is uniform regardless of mu0.
    Eigen::VectorXd uniform = Eigen::VectorXd::Constant(4, 0.25);
    CHECK(l1_diff(trace.final_mu->vec(), uniform) < 1e-9);
  }

  SUBCASE("exploitability trends down on the crowd-averse grid") {
    GridSpec spec;
    spec.kappa = 0.2;
    GridGame game = build_grid_crowd(spec, 0.9);
    BaselineConfig cfg = fp_config(game.nu);
    cfg.eta = 0.05;
    cfg.big_k = 600;
    cfg.big_m = 100;
    cfg.beta = BetaSchedule::constant(0.05);
    cfg.eval_every = 100;
    RunTrace trace = fictitious_play(game.mdp, cfg);
    // Reference run reaches ~3e-4 by k = 600 from phi0 ~ 2.4.
    double phi0 = *trace.initial->exploitability_reg;
    double phi_end = *trace.records.back().exploitability_reg;
    CHECK(phi_end < 0.05 * phi0);
  }

  SUBCASE("rejects mismatched configuration") {
    MfMdp mdp = make_random_mfmdp(5, 3, 2, 0.9);
    RngStream rng(1);
    Dist mu0 = random_dist(rng, 3);
    BaselineConfig omd = omd_config(mu0, 0.1);
    CHECK_THROWS_AS(fictitious_play(mdp, omd), std::invalid_argument);
    BaselineConfig no_mu = fp_config(mu0);
    no_mu.mu0.reset();
    CHECK_THROWS_AS(fictitious_play(mdp, no_mu), std::invalid_argument);
    BaselineConfig bad_k = fp_config(mu0);
    bad_k.big_k = 0;
    CHECK_THROWS_AS(fictitious_play(mdp, bad_k), std::invalid_argument);
  }
}

TEST_CASE("online mirror descent") {
  SUBCASE("zero learning rate freezes the policy at uniform") {
    MfMdp mdp = make_random_mfmdp(21, 4, 3, 0.9);
    RngStream rng(5);
    BaselineConfig cfg = omd_config(random_dist(rng, 4), 0.0);
    cfg.big_k = 6;
    cfg.snapshot_steps = {3, 6};
    RunTrace trace = online_mirror_descent(mdp, cfg);
    Eigen::MatrixXd uniform = Eigen::MatrixXd::Constant(4, 3, 1.0 / 3.0);
    CHECK((trace.last_policy->probs() - uniform).cwiseAbs().maxCoeff() < 1e-15);
    for (const auto& [k, pol] : trace.policy_snapshots) {
      CHECK((pol.probs() - uniform).cwiseAbs().maxCoeff() < 1e-15);
    }
  }

  SUBCASE("one step matches the softmax of the scaled Q table") {
    MfMdp mdp = make_random_mfmdp(33, 3, 2, 0.85);
    RngStream rng(9);
    Dist mu0 = random_dist(rng, 3);
    double lr = 0.7;
    double eta = 0.4;
    BaselineConfig cfg = omd_config(mu0, lr);
    cfg.eta = eta;
    cfg.big_k = 1;
    RunTrace trace = online_mirror_descent(mdp, cfg);

    Policy uniform = Policy::uniform(3, 2);
    Eigen::MatrixXd q = policy_evaluation_regularized(mdp, uniform, mu0, eta).q;
    for (int s = 0; s < 3; ++s) {
      double w0 = lr * q(s, 0) / eta;
      double w1 = lr * q(s, 1) / eta;
      double wmax = std::max(w0, w1);
      double e0 = std::exp(w0 - wmax);
      double e1 = std::exp(w1 - wmax);
      CHECK((*trace.last_policy)(s, 0) == doctest::Approx(e0 / (e0 + e1)).epsilon(1e-12));
      CHECK((*trace.last_policy)(s, 1) == doctest::Approx(e1 / (e0 + e1)).epsilon(1e-12));
    }
  }

  SUBCASE("population update matches the damped pushforward") {
    MfMdp mdp = make_random_mfmdp(41, 4, 2, 0.9);
    RngStream rng(13);
    Dist mu0 = random_dist(rng, 4);
    BaselineConfig cfg = omd_config(mu0, 0.5);
    cfg.big_k = 1;
    cfg.big_m = 3;
    cfg.beta = BetaSchedule::constant(0.1);
    RunTrace trace = online_mirror_descent(mdp, cfg);
    Dist pushed = kernel_power_apply(mu0, induced_kernel(mdp, *trace.last_policy, mu0), 3);
    Dist mu1 = Dist::normalized(mu0.vec() + 0.1 * (pushed.vec() - mu0.vec()));
    CHECK(l1_diff(trace.final_mu->vec(), mu1.vec()) < 1e-14);
  }

  SUBCASE("rejects negative learning rate and mismatched algorithm") {
    MfMdp mdp = make_random_mfmdp(5, 3, 2, 0.9);
    RngStream rng(1);
    Dist mu0 = random_dist(rng, 3);
    BaselineConfig cfg = omd_config(mu0, -0.1);
    CHECK_THROWS_AS(online_mirror_descent(mdp, cfg), std::invalid_argument);
    BaselineConfig fp = fp_config(mu0);
    CHECK_THROWS_AS(online_mirror_descent(mdp, fp), std::invalid_argument);
  }
}

TEST_CASE("baseline traces") {
  SUBCASE("snapshots stay on the simplex and rows stay stochastic") {
    MfMdp mdp = make_random_mfmdp(55, 5, 3, 0.9);
    RngStream rng(17);
    Dist mu0 = random_dist(rng, 5);
    for (int variant = 0; variant < 2; ++variant) {
      BaselineConfig cfg = variant == 0 ? fp_config(mu0) : omd_config(mu0, 0.3);
      cfg.big_k = 10;
      cfg.snapshot_steps = {0, 1, 5, 10};
      RunTrace trace = variant == 0 ? fictitious_play(mdp, cfg)
                                    : online_mirror_descent(mdp, cfg);
      REQUIRE(trace.records.size() == 10);
      CHECK(trace.mu_snapshots.size() == 4);
      for (const auto& [k, mu] : trace.mu_snapshots) {
        CHECK(mu.vec().minCoeff() >= 0.0);
        CHECK(mu.vec().sum() == doctest::Approx(1.0).epsilon(1e-12));
      }
      for (const auto& [k, pol] : trace.policy_snapshots) {
        for (int s = 0; s < pol.n_states(); ++s) {
          CHECK(pol.probs().row(s).sum() == doctest::Approx(1.0).epsilon(1e-12));
          CHECK(pol.probs().row(s).minCoeff() > 0.0);
        }
      }
    }
  }

  SUBCASE("identical configs give identical runs") {
    MfMdp mdp = make_random_mfmdp(77, 4, 3, 0.9);
    RngStream rng(19);
    Dist mu0 = random_dist(rng, 4);
    BaselineConfig cfg = omd_config(mu0, 0.4);
    cfg.big_k = 7;
    RunTrace a = online_mirror_descent(mdp, cfg);
    RunTrace b = online_mirror_descent(mdp, cfg);
    CHECK((a.final_mu->vec() - b.final_mu->vec()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.last_policy->probs() - b.last_policy->probs()).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(a.records.size() == b.records.size());
    for (size_t i = 0; i < a.records.size(); ++i) {
      CHECK(*a.records[i].value == *b.records[i].value);
      CHECK(a.records[i].mu_drift_l1 == b.records[i].mu_drift_l1);
    }
  }
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "mfg/envs.hpp"
#include "mfg/oracle.hpp"
#include "test_util.hpp"

using namespace mfg;
using namespace mfg_test;

namespace {

GridSpec paper_grid() {
  GridSpec spec;
  spec.width = 5;
  spec.height = 5;
  spec.walls = {{1, 2}, {2, 2}, {3, 2}};
  spec.kappa = 0.2;
  spec.slipperiness = 0.1;
  spec.target = {{4, 4}};
  return spec;
}

}  // namespace

TEST_CASE("grid crowd construction") {
  SUBCASE("walled 5x5 grid has 22 states and stochastic rows") {
    GridGame game = build_grid_crowd(paper_grid(), 0.9);
    CHECK(game.mdp.n_states == 22);
    CHECK(game.mdp.n_actions == 5);
    Dist mu = Dist::uniform(22);
    for (int s = 0; s < 22; ++s) {
      for (int a = 0; a < 5; ++a) {
        Eigen::VectorXd row = game.mdp.transition(s, a, mu.vec());
        CHECK(row.sum() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(row.minCoeff() >= 0.0);
      }
    }
    CHECK(game.state_at(1, 2) == -1);
    CHECK(game.nu.vec()(game.state_at(0, 0)) == 1.0);
  }

  SUBCASE("stay reward at uniform quarter mass") {
    // mu(s) = 0.25, kappa = 0.2, Stay: -0.2 log(0.25) + 0.2 = 0.4772588...
    GridSpec spec;
    spec.width = 2;
    spec.height = 2;
    spec.kappa = 0.2;
    GridGame game = build_grid_crowd(spec, 0.9);
    Eigen::VectorXd mu = Eigen::VectorXd::Constant(4, 0.25);
    double want = -0.2 * std::log(0.25) + 0.2;
    CHECK(game.mdp.reward(0, kStay, mu) == doctest::Approx(want).epsilon(1e-12));
    CHECK(want == doctest::Approx(0.47726).epsilon(1e-4));
    CHECK(game.mdp.reward(0, kLeft, mu) ==
          doctest::Approx(-0.2 * std::log(0.25) - 0.2).epsilon(1e-12));
  }

  SUBCASE("target bonus follows the clipped l1 distance") {
    GridGame game = build_grid_crowd(paper_grid(), 0.9);
    Eigen::VectorXd mu = Eigen::VectorXd::Constant(22, 1.0 / 22);
    double base = -0.2 * std::log(1.0 / 22) - 0.2;  // crowd term + move penalty
    int at_target = game.state_at(4, 4);
    int dist1 = game.state_at(3, 4);
    int dist3 = game.state_at(1, 4);
    int dist4 = game.state_at(0, 4);
    CHECK(game.mdp.reward(at_target, kLeft, mu) == doctest::Approx(base + 0.3).epsilon(1e-12));
    CHECK(game.mdp.reward(dist1, kLeft, mu) == doctest::Approx(base + 0.2).epsilon(1e-12));
    CHECK(game.mdp.reward(dist3, kLeft, mu) == doctest::Approx(base).epsilon(1e-12));
    CHECK(game.mdp.reward(dist4, kLeft, mu) == doctest::Approx(base).epsilon(1e-12));
  }

  SUBCASE("wall and boundary moves stay in place") {
    GridGame game = build_grid_crowd(paper_grid(), 0.9);
    Dist mu = Dist::uniform(22);
    int corner = game.state_at(0, 0);
    Eigen::VectorXd row = game.mdp.transition(corner, kLeft, mu.vec());
    // intended move hits the boundary; 1 - slip stays, slip/4 also stays (Up)
    CHECK(row(corner) == doctest::Approx(0.9 + 0.025 + 0.025).epsilon(1e-12));
    int above_wall = game.state_at(1, 1);
    row = game.mdp.transition(above_wall, kDown, mu.vec());
    CHECK(row(above_wall) == doctest::Approx(0.9 + 0.025).epsilon(1e-12));  // wall below
  }

  SUBCASE("open grid with uniform mean field is translation symmetric") {
    GridSpec spec;
    spec.width = 3;
    spec.height = 3;
    spec.kappa = 0.3;
    GridGame game = build_grid_crowd(spec, 0.9);
    Eigen::VectorXd mu = Eigen::VectorXd::Constant(9, 1.0 / 9);
    // interior state sees the same reward as any other state for each action
    for (int a = 0; a < 5; ++a) {
      double r0 = game.mdp.reward(game.state_at(1, 1), a, mu);
      for (int s = 0; s < 9; ++s) {
        CHECK(game.mdp.reward(s, a, mu) == doctest::Approx(r0).epsilon(1e-12));
      }
    }
    // kernel commutes with the horizontal flip x -> 2 - x
    auto flip = [&](int s) {
      auto [x, y] = game.cells[s];
      return game.state_at(2 - x, y);
    };
    auto flip_action = [](int a) {
      if (a == kLeft) return static_cast<int>(kRight);
      if (a == kRight) return static_cast<int>(kLeft);
      return a;
    };
    for (int s = 0; s < 9; ++s) {
      for (int a = 0; a < 5; ++a) {
        Eigen::VectorXd row = game.mdp.transition(s, a, mu);
        Eigen::VectorXd mirrored = game.mdp.transition(flip(s), flip_action(a), mu);
        for (int t = 0; t < 9; ++t) {
          CHECK(row(t) == doctest::Approx(mirrored(flip(t))).epsilon(1e-12));
        }
      }
    }
  }

  SUBCASE("invalid specs throw") {
    GridSpec spec = paper_grid();
    spec.walls.push_back({7, 7});
    CHECK_THROWS_AS(build_grid_crowd(spec, 0.9), std::invalid_argument);
    spec = paper_grid();
    spec.initial_cell = {1, 2};  // a wall
    CHECK_THROWS_AS(build_grid_crowd(spec, 0.9), std::invalid_argument);
    spec = paper_grid();
    spec.target = {{2, 2}};  // a wall
    CHECK_THROWS_AS(build_grid_crowd(spec, 0.9), std::invalid_argument);
    spec = paper_grid();
    spec.slipperiness = 1.0;
    CHECK_THROWS_AS(build_grid_crowd(spec, 0.9), std::invalid_argument);
    // a full wall row splits the grid
    spec = paper_grid();
    spec.walls = {{0, 2}, {1, 2}, {2, 2}, {3, 2}, {4, 2}};
    spec.target = std::nullopt;
    CHECK_THROWS_AS(build_grid_crowd(spec, 0.9), std::invalid_argument);
  }

  SUBCASE("model validates on the floored simplex") {
    GridGame game = build_grid_crowd(paper_grid(), 0.9);
    CHECK_NOTHROW(materialize(game.mdp, Dist::point_mass(22, 0)));
    CHECK_NOTHROW(materialize(game.mdp, Dist::uniform(22)));
  }
}

TEST_CASE("two islands construction") {
  SUBCASE("structure: two cycles, one bridge, branching two") {
    IslandsSpec spec;
    spec.seed = 7;
    IslandsGame game = build_two_islands(spec, 0.9);
    CHECK(game.mdp.n_states == 14);
    CHECK(game.mdp.n_actions == 2);
    int bridge_edges = 0;
    for (int s = 0; s < 14; ++s) {
      CHECK(game.neighbors[s][0] != s);
      CHECK(game.neighbors[s][1] != s);
      for (int a = 0; a < 2; ++a) {
        bool s_first = s < 7;
        bool t_first = game.neighbors[s][a] < 7;
        if (s_first != t_first) ++bridge_edges;
      }
    }
    CHECK(bridge_edges == 2);  // one bridge, both directions
  }

  SUBCASE("rewards double on the second island") {
    IslandsSpec spec;
    spec.seed = 7;
    spec.crowd_kappa = 0.2;
    IslandsGame game = build_two_islands(spec, 0.9);
    Eigen::VectorXd mu = Eigen::VectorXd::Constant(14, 1.0 / 14);
    double first = game.mdp.reward(2, 0, mu);
    double second = game.mdp.reward(9, 0, mu);
    CHECK(first == doctest::Approx(-0.2 * std::log(1.0 / 14)).epsilon(1e-12));
    CHECK(first == doctest::Approx(0.52781).epsilon(1e-4));
    CHECK(second == doctest::Approx(2.0 * first).epsilon(1e-12));
    CHECK(game.mdp.reward(9, 0, mu) == game.mdp.reward(9, 1, mu));
  }

  SUBCASE("fixed seed reproduces the table bit-exactly") {
    IslandsSpec spec;
    spec.seed = 99;
    IslandsGame a = build_two_islands(spec, 0.9);
    IslandsGame b = build_two_islands(spec, 0.9);
    CHECK((a.self_weight - b.self_weight).cwiseAbs().maxCoeff() == 0.0);
    Dist mu = Dist::uniform(14);
    CHECK(transition_table_csv(a.mdp, mu) == transition_table_csv(b.mdp, mu));
    spec.seed = 100;
    IslandsGame c = build_two_islands(spec, 0.9);
    CHECK((a.self_weight - c.self_weight).cwiseAbs().maxCoeff() > 0.0);
  }

  SUBCASE("start state and validation") {
    IslandsSpec spec;
    spec.seed = 3;
    IslandsGame game = build_two_islands(spec, 0.9);
    CHECK(game.nu.vec()(2) == 1.0);
    spec.n_states = 12;
    CHECK_THROWS_AS(build_two_islands(spec, 0.9), std::invalid_argument);
    spec = IslandsSpec{};
    spec.initial_state = 14;
    CHECK_THROWS_AS(build_two_islands(spec, 0.9), std::invalid_argument);
  }
}

TEST_CASE("sampling oracle") {
  SUBCASE("point-mass reset always returns that state") {
    MfMdp mdp = make_random_mfmdp(1, 3, 2, 0.9);
    auto env = make_oracle(mdp, Dist::point_mass(3, 1), 5);
    RngStream rng(8);
    for (int i = 0; i < 50; ++i) CHECK(env->reset(rng) == 1);
  }

  SUBCASE("reset frequencies match a mixed nu") {
    MfMdp mdp = make_random_mfmdp(2, 3, 2, 0.9);
    Eigen::VectorXd nu(3);
    nu << 0.5, 0.3, 0.2;
    auto env = make_oracle(mdp, Dist(nu), 5);
    RngStream rng(9);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(3);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) counts(env->reset(rng)) += 1.0;
    CHECK(l1_diff(counts / draws, nu) <= 0.02);
  }

  SUBCASE("step frequencies match the exact transition row") {
    MfMdp mdp = make_random_mfmdp(3, 4, 3, 0.9);
    auto env = make_oracle(mdp, Dist::uniform(4), 5);
    Dist mu = Dist::uniform(4);
    Eigen::VectorXd row = mdp.transition(2, 1, mu.vec());
    RngStream rng(10);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(4);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) counts(env->step(2, 1, mu, rng).next) += 1.0;
    CHECK(l1_diff(counts / draws, row) <= 0.02);
  }

  SUBCASE("reward passes through exactly, cache survives mu switches") {
    MfMdp mdp = make_random_mfmdp(4, 3, 2, 0.9);
    auto env = make_oracle(mdp, Dist::uniform(3), 5);
    RngStream rng(11);
    Dist mu1 = Dist::uniform(3);
    Dist mu2 = Dist::point_mass(3, 0);
    for (int rep = 0; rep < 3; ++rep) {
      for (const Dist* mu : {&mu1, &mu2}) {
        for (int s = 0; s < 3; ++s) {
          for (int a = 0; a < 2; ++a) {
            CHECK(env->step(s, a, *mu, rng).reward == mdp.reward(s, a, mu->vec()));
          }
        }
      }
    }
  }

  SUBCASE("mu-free declaration is verified against the model") {
    GridGame game = build_grid_crowd(paper_grid(), 0.9);
    CHECK_NOTHROW(make_oracle(game.mdp, game.nu, 1, true));
    MfMdp dependent = make_random_mfmdp(5, 3, 2, 0.9);  // transitions mix in mu
    CHECK_THROWS_AS(make_oracle(dependent, Dist::uniform(3), 1, true),
                    std::invalid_argument);
  }

  SUBCASE("mu-free fast path samples the same law as the general path") {
    GridGame game = build_grid_crowd(paper_grid(), 0.9);
    auto fast = make_oracle(game.mdp, game.nu, 1, true);
    auto slow = make_oracle(game.mdp, game.nu, 1, false);
    Dist mu = Dist::uniform(22);
    RngStream r1(12);
    RngStream r2(12);
    for (int i = 0; i < 2000; ++i) {
      auto a = fast->step(i % 22, i % 5, mu, r1);
      auto b = slow->step(i % 22, i % 5, mu, r2);
      CHECK(a.next == b.next);
      CHECK(a.reward == b.reward);
    }
  }

  SUBCASE("clones are independent") {
    MfMdp mdp = make_random_mfmdp(6, 3, 2, 0.9);
    auto env = make_oracle(mdp, Dist::uniform(3), 5);
    auto cloned = env->clone();
    Dist mu = Dist::uniform(3);
    RngStream r1(13);
    RngStream r2(13);
    auto a = env->step(0, 0, mu, r1);
    auto b = cloned->step(0, 0, mu, r2);
    CHECK(a.next == b.next);
    CHECK(a.reward == b.reward);
  }

  SUBCASE("transition csv round trip is dense and ordered") {
    IslandsSpec spec;
    spec.seed = 21;
    IslandsGame game = build_two_islands(spec, 0.9);
    std::string csv = transition_table_csv(game.mdp, Dist::uniform(14));
    CHECK(csv.rfind("state,action,next,prob\n", 0) == 0);
    // every (state, action) pair contributes exactly two entries: self + edge
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 14 * 2 * 2);
  }
}

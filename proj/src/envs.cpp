#include "mfg/envs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <memory>
#include <set>

#include "mfg/rng.hpp"

namespace mfg {

namespace {

bool strongly_connected(const std::vector<std::vector<int>>& out) {
  const int n = static_cast<int>(out.size());
  // forward and reverse reachability from node 0
  for (int pass = 0; pass < 2; ++pass) {
    std::vector<std::vector<int>> adj(n);
    if (pass == 0) {
      adj = out;
    } else {
      for (int u = 0; u < n; ++u) {
        for (int v : out[u]) adj[v].push_back(u);
      }
    }
    std::vector<char> seen(n, 0);
    std::deque<int> frontier{0};
    seen[0] = 1;
    while (!frontier.empty()) {
      int u = frontier.front();
      frontier.pop_front();
      for (int v : adj[u]) {
        if (!seen[v]) {
          seen[v] = 1;
          frontier.push_back(v);
        }
      }
    }
    if (std::count(seen.begin(), seen.end(), 1) != n) return false;
  }
  return true;
}

double crowd_term(double mu_s, double kappa, double floor) {
  return -kappa * std::log(std::max(mu_s, floor));
}

}  // namespace

GridGame build_grid_crowd(const GridSpec& spec, double gamma) {
  if (spec.width < 1 || spec.height < 1) {
    throw std::invalid_argument("build_grid_crowd: grid dimensions must be positive");
  }
  if (spec.kappa < 0.0) {
    throw std::invalid_argument("build_grid_crowd: kappa must be >= 0");
  }
  if (!(spec.slipperiness >= 0.0 && spec.slipperiness < 1.0)) {
    throw std::invalid_argument("build_grid_crowd: slipperiness must be in [0, 1)");
  }
  if (!(spec.mu_floor > 0.0)) {
    throw std::invalid_argument("build_grid_crowd: mu_floor must be > 0");
  }

  std::set<std::pair<int, int>> walls(spec.walls.begin(), spec.walls.end());
  auto in_bounds = [&](int x, int y) {
    return x >= 0 && x < spec.width && y >= 0 && y < spec.height;
  };
  for (const auto& [wx, wy] : walls) {
    if (!in_bounds(wx, wy)) {
      throw std::invalid_argument("build_grid_crowd: wall outside the grid");
    }
  }
  auto traversable = [&](int x, int y) { return in_bounds(x, y) && !walls.count({x, y}); };
  if (!traversable(spec.initial_cell.first, spec.initial_cell.second)) {
    throw std::invalid_argument("build_grid_crowd: initial cell is a wall or off-grid");
  }
  if (spec.target && !traversable(spec.target->first, spec.target->second)) {
    throw std::invalid_argument("build_grid_crowd: target is a wall or off-grid");
  }

  GridGame game;
  game.spec = spec;
  game.cell_state.assign(spec.width * spec.height, -1);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      if (traversable(x, y)) {
        game.cell_state[y * spec.width + x] = static_cast<int>(game.cells.size());
        game.cells.emplace_back(x, y);
      }
    }
  }
  const int n = static_cast<int>(game.cells.size());
  if (n == 0) throw std::invalid_argument("build_grid_crowd: no traversable cells");

  // action displacements: Left, Right, Up, Down, Stay
  constexpr int kDx[5] = {-1, 1, 0, 0, 0};
  constexpr int kDy[5] = {0, 0, -1, 1, 0};

  // resolved[s][a]: state reached by attempting move a from s
  std::vector<std::array<int, 5>> resolved(n);
  std::vector<std::vector<int>> union_graph(n);
  for (int s = 0; s < n; ++s) {
    auto [x, y] = game.cells[s];
    for (int a = 0; a < 5; ++a) {
      int tx = x + kDx[a];
      int ty = y + kDy[a];
      int t = traversable(tx, ty) ? game.state_at(tx, ty) : s;
      resolved[s][a] = t;
      if (t != s) union_graph[s].push_back(t);
    }
  }
  if (!strongly_connected(union_graph)) {
    throw std::invalid_argument("build_grid_crowd: traversable cells are disconnected");
  }

  auto rows = std::make_shared<Eigen::MatrixXd>(Eigen::MatrixXd::Zero(n * 5, n));
  const double slip_each = spec.slipperiness / 4.0;
  for (int s = 0; s < n; ++s) {
    for (int a = 0; a < 5; ++a) {
      (*rows)(s * 5 + a, resolved[s][a]) += 1.0 - spec.slipperiness;
      for (int b = 0; b < 5; ++b) {
        if (b != a) (*rows)(s * 5 + a, resolved[s][b]) += slip_each;
      }
    }
  }

  // per-state target bonus, zero when no target is configured
  auto bonus = std::make_shared<Eigen::VectorXd>(Eigen::VectorXd::Zero(n));
  if (spec.target) {
    for (int s = 0; s < n; ++s) {
      auto [x, y] = game.cells[s];
      int d = std::abs(x - spec.target->first) + std::abs(y - spec.target->second);
      (*bonus)(s) = std::max(0.3 - 0.1 * d, 0.0);
    }
  }

  const double kappa = spec.kappa;
  const double floor = spec.mu_floor;
  game.mdp.n_states = n;
  game.mdp.n_actions = 5;
  game.mdp.gamma = gamma;
  game.mdp.reward_bound = kappa * std::log(1.0 / floor) + 0.2 + (spec.target ? 0.3 : 0.0);
  game.mdp.transition = [rows](int s, int a, const Eigen::VectorXd&) {
    return Eigen::VectorXd(rows->row(s * 5 + a).transpose());
  };
  game.mdp.reward = [kappa, floor, bonus](int s, int a, const Eigen::VectorXd& mu) {
    double move_term = a == kStay ? 0.2 : -0.2;
    return crowd_term(mu(s), kappa, floor) + move_term + (*bonus)(s);
  };
  game.nu = Dist::point_mass(n, game.state_at(spec.initial_cell.first, spec.initial_cell.second));
  return game;
}

IslandsGame build_two_islands(const IslandsSpec& spec, double gamma) {
  if (spec.n_states != 14 || spec.branching != 2) {
    throw std::invalid_argument(
        "build_two_islands: the graph family is fixed at 14 states with branching 2");
  }
  if (spec.crowd_kappa < 0.0) {
    throw std::invalid_argument("build_two_islands: crowd_kappa must be >= 0");
  }
  if (!(spec.mu_floor > 0.0)) {
    throw std::invalid_argument("build_two_islands: mu_floor must be > 0");
  }
  if (spec.initial_state < 0 || spec.initial_state >= spec.n_states) {
    throw std::invalid_argument("build_two_islands: initial state out of range");
  }
  for (int s : spec.island2) {
    if (s < 0 || s >= spec.n_states) {
      throw std::invalid_argument("build_two_islands: island2 state out of range");
    }
  }

  IslandsGame game;
  game.spec = spec;
  game.neighbors.resize(14);
  for (int i = 0; i < 7; ++i) {
    game.neighbors[i] = {(i + 6) % 7, (i + 1) % 7};
    game.neighbors[7 + i] = {7 + (i + 6) % 7, 7 + (i + 1) % 7};
  }
  game.neighbors[6][1] = 7;  // bridge: next-of-6 crosses instead of closing the cycle
  game.neighbors[7][0] = 6;  // prev-of-7 crosses back

  RngStream rng(spec.seed);
  game.self_weight.resize(14, 2);
  for (int s = 0; s < 14; ++s) {
    for (int a = 0; a < 2; ++a) game.self_weight(s, a) = 0.1 + 0.8 * rng.uniform();
  }

  std::vector<std::vector<int>> union_graph(14);
  for (int s = 0; s < 14; ++s) {
    for (int a = 0; a < 2; ++a) union_graph[s].push_back(game.neighbors[s][a]);
  }
  if (!strongly_connected(union_graph)) {
    throw std::invalid_argument("build_two_islands: graph is not strongly connected");
  }

  auto rows = std::make_shared<Eigen::MatrixXd>(Eigen::MatrixXd::Zero(14 * 2, 14));
  for (int s = 0; s < 14; ++s) {
    for (int a = 0; a < 2; ++a) {
      (*rows)(s * 2 + a, s) += game.self_weight(s, a);
      (*rows)(s * 2 + a, game.neighbors[s][a]) += 1.0 - game.self_weight(s, a);
    }
  }

  auto weight = std::make_shared<Eigen::VectorXd>(Eigen::VectorXd::Ones(14));
  for (int s : spec.island2) (*weight)(s) = 2.0;

  const double kappa = spec.crowd_kappa;
  const double floor = spec.mu_floor;
  game.mdp.n_states = 14;
  game.mdp.n_actions = 2;
  game.mdp.gamma = gamma;
  game.mdp.reward_bound = std::max(2.0 * kappa * std::log(1.0 / floor), 1e-9);
  game.mdp.transition = [rows](int s, int a, const Eigen::VectorXd&) {
    return Eigen::VectorXd(rows->row(s * 2 + a).transpose());
  };
  game.mdp.reward = [kappa, floor, weight](int s, int, const Eigen::VectorXd& mu) {
    return crowd_term(mu(s), kappa, floor) * (*weight)(s);
  };
  game.nu = Dist::point_mass(14, spec.initial_state);
  return game;
}

std::string transition_table_csv(const MfMdp& mdp, const Dist& mu) {
  DenseModel model = materialize(mdp, mu);
  std::string out = "state,action,next,prob\n";
  char line[96];
  for (int s = 0; s < model.n_states(); ++s) {
    for (int a = 0; a < model.n_actions(); ++a) {
      for (int t = 0; t < model.n_states(); ++t) {
        double p = model.p[a](s, t);
        if (p == 0.0) continue;
        std::snprintf(line, sizeof line, "%d,%d,%d,%.17g\n", s, a, t, p);
        out += line;
      }
    }
  }
  return out;
}

}  // namespace mfg

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mfg/core.hpp"

namespace mfg {

// Crowd model on a rectangular grid. Coordinates are (x = column, y = row)
// with the origin at the top-left cell; walls are removed from the state set.
struct GridSpec {
  int width = 5;
  int height = 5;
  std::vector<std::pair<int, int>> walls;
  double kappa = 0.2;          // crowd aversion weight on -log mu(s)
  double slipperiness = 0.1;   // probability mass diverted to the other moves
  std::optional<std::pair<int, int>> target;
  double mu_floor = 1e-10;     // floor inside the log only
  std::pair<int, int> initial_cell{0, 0};
};

// Actions of the grid walker, in fixed order.
enum GridAction : int { kLeft = 0, kRight = 1, kUp = 2, kDown = 3, kStay = 4 };

struct GridGame {
  MfMdp mdp;
  Dist nu = Dist::point_mass(1, 0);  // replaced by the initial-cell point mass
  GridSpec spec;
  std::vector<std::pair<int, int>> cells;  // state index -> (x, y)
  std::vector<int> cell_state;             // y * width + x -> state index, -1 for walls

  int state_at(int x, int y) const { return cell_state[y * spec.width + x]; }
};

// States are the traversable cells in row-major order. Each action moves one
// cell (or stays) with probability 1 - slipperiness; the remaining mass is
// split evenly across the four other actions' moves. Moves into walls or off
// the grid resolve to staying put, keeping the moving action's reward.
// Reward: -kappa * log(max(mu(s), mu_floor)) + 0.2 for Stay, -0.2 otherwise,
// plus max{0.3 - 0.1 * (l1 distance to target), 0} when a target is set.
// Throws if the traversable set is disconnected.
GridGame build_grid_crowd(const GridSpec& spec, double gamma);

// Two 7-cycles joined by a single bridge edge. Each state has two outgoing
// neighbors (action 0 = previous on its cycle, action 1 = next); the bridge
// replaces edge 6->0 with 6->7 and 7->13 with 7->6. Self-loop weights are
// drawn once at construction from the seed, uniformly in [0.1, 0.9], so a
// fixed seed reproduces the transition table bit-exactly.
struct IslandsSpec {
  int n_states = 14;
  int branching = 2;
  double crowd_kappa = 0.2;
  std::vector<int> island2 = {7, 8, 9, 10, 11, 12, 13};
  std::uint64_t seed = 0;
  double mu_floor = 1e-10;
  int initial_state = 2;
};

struct IslandsGame {
  MfMdp mdp;
  Dist nu = Dist::point_mass(1, 0);  // replaced by the initial-state point mass
  IslandsSpec spec;
  std::vector<std::array<int, 2>> neighbors;  // per state: {action 0, action 1}
  Eigen::MatrixXd self_weight;                // n_states x 2 self-loop probabilities
};

// Reward: -kappa * log(max(mu(s), mu_floor)), doubled on the second island,
// identical across actions. Throws if the union graph over both actions is
// not strongly connected.
IslandsGame build_two_islands(const IslandsSpec& spec, double gamma);

// Transition table at a fixed mean field as CSV (state,action,next,prob per
// line, header included), for auditing constructed environments.
std::string transition_table_csv(const MfMdp& mdp, const Dist& mu);

}  // namespace mfg

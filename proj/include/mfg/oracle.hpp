#pragma once

#include <cstdint>
#include <memory>

#include "mfg/core.hpp"
#include "mfg/rng.hpp"

namespace mfg {

// Sampling view of a mean-field MDP. reset draws the start state from a fixed
// distribution nu; step samples one transition from P(.|s, a, mu) and reports
// r(s, a, mu) exactly. Implementations must be memoryless given (s, a, mu).
//
// All randomness is drawn from the stream passed in, so callers control
// determinism; the overloads without a stream use the oracle's own stream,
// seeded at construction. Concurrent tasks must each own a clone().
class EnvOracle {
 public:
  virtual ~EnvOracle() = default;

  virtual int n_states() const = 0;
  virtual int n_actions() const = 0;
  virtual double gamma() const = 0;
  virtual double reward_bound() const = 0;
  virtual const Dist& reset_distribution() const = 0;

  struct Step {
    int next = 0;
    double reward = 0.0;
  };

  virtual int reset(RngStream& rng) = 0;
  virtual Step step(int s, int a, const Dist& mu, RngStream& rng) = 0;

  // Clones share immutable model data but no mutable state, so each may be
  // driven by its own thread.
  virtual std::unique_ptr<EnvOracle> clone() const = 0;

  int reset() { return reset(stream_); }
  Step step(int s, int a, const Dist& mu) { return step(s, a, mu, stream_); }

 protected:
  explicit EnvOracle(std::uint64_t seed) : stream_(seed) {}
  EnvOracle(const EnvOracle&) = default;
  EnvOracle& operator=(const EnvOracle&) = delete;

 private:
  RngStream stream_;
};

// Wraps an exact model as a sampling oracle. Transition rows and rewards are
// materialized per mean field and cached (bounded, recently-used first), so
// long runs that revisit the same mu pay the model query cost once.
// mu_free_transitions declares that transition(s, a, mu) ignores mu (true for
// both benchmark families); the shared row tables are then built once. The
// claim is checked against the model at construction.
std::unique_ptr<EnvOracle> make_oracle(const MfMdp& mdp, Dist nu, std::uint64_t seed,
                                       bool mu_free_transitions = false);

}  // namespace mfg

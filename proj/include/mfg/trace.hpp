#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mfg/core.hpp"

namespace mfg {

// Population step-size schedule beta_k, k >= 1, with values in [0, 1].
class BetaSchedule {
 public:
  static BetaSchedule constant(double beta) {
    if (!(beta >= 0.0 && beta <= 1.0)) {
      throw std::invalid_argument("BetaSchedule: constant beta must lie in [0, 1]");
    }
    return BetaSchedule([beta](int) { return beta; });
  }

  // min(1, c / k); the classical decaying choice.
  static BetaSchedule inverse_k(double c) {
    if (!(c > 0.0)) throw std::invalid_argument("BetaSchedule: c must be > 0");
    return BetaSchedule([c](int k) {
      double b = c / k;
      return b > 1.0 ? 1.0 : b;
    });
  }

  double operator()(int k) const {
    if (k < 1) throw std::invalid_argument("BetaSchedule: k must be >= 1");
    double b = f_(k);
    if (!(b >= 0.0 && b <= 1.0)) {
      throw std::invalid_argument("BetaSchedule: beta_k outside [0, 1]");
    }
    return b;
  }

 private:
  explicit BetaSchedule(std::function<double(int)> f) : f_(std::move(f)) {}
  std::function<double(int)> f_;
};

// One completed outer iteration of a population solver. Exploitability fields
// are filled only at the evaluation cadence; drift always is. value holds the
// exact policy value when an exact evaluator is available for the run.
struct TraceRecord {
  int k = 0;
  std::optional<double> exploitability_reg;
  std::optional<double> exploitability_unreg;
  double mu_drift_l1 = 0.0;
  std::optional<double> value;
  double wall_ms = 0.0;
};

// Full run history of a population solver. `initial` is the k = 0 baseline
// (starting policy and mu0); `records` holds exactly one entry per completed
// iteration k = 1..K. The final_* fields pair the final mean field with the
// policy refit on it after the loop, which is what headline exploitability
// numbers report; last_policy is the last in-loop iterate.
struct RunTrace {
  std::optional<TraceRecord> initial;
  std::vector<TraceRecord> records;
  std::vector<std::pair<int, Dist>> mu_snapshots;
  std::vector<std::pair<int, Policy>> policy_snapshots;
  std::optional<Dist> final_mu;
  std::optional<Policy> last_policy;
  std::optional<Policy> final_policy;
  std::optional<double> final_exploitability_reg;
  std::optional<double> final_exploitability_unreg;
  std::optional<double> final_fixed_point_residual;
};

}  // namespace mfg

#include "mfg/oracle.hpp"

#include <algorithm>
#include <utility>
#include <vector>

namespace mfg {

namespace {

// Cumulative transition rows plus the reward table for one mean field.
// cdf has one row per (s, a) pair, laid out s * n_actions + a.
struct MuTables {
  Eigen::VectorXd mu;
  Eigen::MatrixXd cdf;
  Eigen::MatrixXd reward;
};

Eigen::MatrixXd cumulative_rows(const std::vector<Eigen::MatrixXd>& p) {
  const int n_actions = static_cast<int>(p.size());
  const int n_states = static_cast<int>(p[0].rows());
  Eigen::MatrixXd cdf(n_states * n_actions, n_states);
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      double acc = 0.0;
      for (int t = 0; t < n_states; ++t) {
        acc += p[a](s, t);
        cdf(s * n_actions + a, t) = acc;
      }
      // guard the sampler against accumulated rounding at the top end
      cdf(s * n_actions + a, n_states - 1) = 1.0;
    }
  }
  return cdf;
}

int sample_row(const Eigen::MatrixXd& cdf, int row, double u) {
  const int n = static_cast<int>(cdf.cols());
  for (int t = 0; t < n; ++t) {
    if (u < cdf(row, t)) return t;
  }
  return n - 1;
}

class ExactOracle final : public EnvOracle {
 public:
  ExactOracle(const MfMdp& mdp, Dist nu, std::uint64_t seed, bool mu_free)
      : EnvOracle(seed), mdp_(mdp), nu_(std::move(nu)), mu_free_(mu_free) {
    validate_model(mdp_);
    if (nu_.size() != mdp_.n_states) {
      throw std::invalid_argument("make_oracle: nu size does not match n_states");
    }
    nu_cdf_.resize(mdp_.n_states);
    double acc = 0.0;
    for (int s = 0; s < mdp_.n_states; ++s) {
      acc += nu_(s);
      nu_cdf_(s) = acc;
    }
    nu_cdf_(mdp_.n_states - 1) = 1.0;
    if (mu_free_) {
      DenseModel at_uniform = materialize(mdp_, Dist::uniform(mdp_.n_states));
      DenseModel at_point = materialize(mdp_, Dist::point_mass(mdp_.n_states, 0));
      for (int a = 0; a < mdp_.n_actions; ++a) {
        if (!at_uniform.p[a].isApprox(at_point.p[a], 0.0)) {
          throw std::invalid_argument(
              "make_oracle: transitions depend on mu but were declared mu-free");
        }
      }
      shared_cdf_ = std::make_shared<Eigen::MatrixXd>(cumulative_rows(at_uniform.p));
    }
  }

  int n_states() const override { return mdp_.n_states; }
  int n_actions() const override { return mdp_.n_actions; }
  double gamma() const override { return mdp_.gamma; }
  double reward_bound() const override { return mdp_.reward_bound; }
  const Dist& reset_distribution() const override { return nu_; }

  int reset(RngStream& rng) override {
    double u = rng.uniform();
    const int n = mdp_.n_states;
    for (int s = 0; s < n; ++s) {
      if (u < nu_cdf_(s)) return s;
    }
    return n - 1;
  }

  Step step(int s, int a, const Dist& mu, RngStream& rng) override {
    if (s < 0 || s >= mdp_.n_states || a < 0 || a >= mdp_.n_actions) {
      throw std::invalid_argument("EnvOracle::step: state or action out of range");
    }
    const MuTables& tables = tables_for(mu);
    const Eigen::MatrixXd& cdf = mu_free_ ? *shared_cdf_ : tables.cdf;
    Step out;
    out.next = sample_row(cdf, s * mdp_.n_actions + a, rng.uniform());
    out.reward = tables.reward(s, a);
    return out;
  }

  std::unique_ptr<EnvOracle> clone() const override {
    return std::unique_ptr<EnvOracle>(new ExactOracle(*this));
  }

 private:
  ExactOracle(const ExactOracle& other)
      : EnvOracle(other),
        mdp_(other.mdp_),
        nu_(other.nu_),
        mu_free_(other.mu_free_),
        nu_cdf_(other.nu_cdf_),
        shared_cdf_(other.shared_cdf_) {}

  // Most calls reuse the tables from the previous step, so the hot path is a
  // value comparison against that entry. Misses scan the cache and fall back
  // to materializing the model at this mu.
  const MuTables& tables_for(const Dist& mu) {
    const Eigen::VectorXd& v = mu.vec();
    if (v.size() != mdp_.n_states) {
      throw std::invalid_argument("EnvOracle::step: mu size does not match n_states");
    }
    if (!cache_.empty() && (cache_.front()->mu.array() == v.array()).all()) {
      return *cache_.front();
    }
    for (std::size_t i = 1; i < cache_.size(); ++i) {
      if ((cache_[i]->mu.array() == v.array()).all()) {
        std::rotate(cache_.begin(), cache_.begin() + i, cache_.begin() + i + 1);
        return *cache_.front();
      }
    }
    DenseModel model = materialize(mdp_, mu);
    auto entry = std::make_unique<MuTables>();
    entry->mu = v;
    if (!mu_free_) entry->cdf = cumulative_rows(model.p);
    entry->reward = std::move(model.r);
    cache_.insert(cache_.begin(), std::move(entry));
    if (cache_.size() > kCacheCap) cache_.pop_back();
    return *cache_.front();
  }

  static constexpr std::size_t kCacheCap = 1024;

  MfMdp mdp_;
  Dist nu_;
  bool mu_free_;
  Eigen::VectorXd nu_cdf_;
  std::shared_ptr<const Eigen::MatrixXd> shared_cdf_;
  std::vector<std::unique_ptr<MuTables>> cache_;
};

}  // namespace

std::unique_ptr<EnvOracle> make_oracle(const MfMdp& mdp, Dist nu, std::uint64_t seed,
                                       bool mu_free_transitions) {
  return std::make_unique<ExactOracle>(mdp, std::move(nu), seed, mu_free_transitions);
}

}  // namespace mfg

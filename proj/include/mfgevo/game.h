#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mfgevo/common.h"
#include "mfgevo/distributions.h"
#include "mfgevo/markov.h"
#include "mfgevo/spec.h"

namespace mfgevo {

struct ValidationIssue {
  std::string code;     // e.g. "kernel-not-stochastic", "empty-action-set"
  std::string message;  // human readable, names class/state/action/column
  std::optional<std::size_t> cls, state, action, policy;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool ok() const { return issues.empty(); }
  std::string to_string() const;
};

// Structural checks plus the unique-recurrent-class condition for every
// deterministic policy. Never throws; every violation is listed.
ValidationReport validate_game(const GameSpec& spec, std::size_t policy_cap = kDefaultPolicyCap);

// A validated game: immutable spec, policy sets and the (memoized)
// stationary distribution of every deterministic policy. Cheap to copy and
// safe to share across threads.
class Game {
 public:
  // Throws ValidationError carrying the full report when validation fails.
  static Game create(GameSpec spec, std::size_t policy_cap = kDefaultPolicyCap);

  const GameSpec& spec() const { return data_->spec; }
  const ClassSpec& cls(std::size_t c) const { return data_->spec.classes[c]; }
  std::size_t num_classes() const { return data_->spec.classes.size(); }
  std::size_t num_states(std::size_t c) const { return cls(c).num_states(); }
  std::size_t num_actions(std::size_t c) const { return cls(c).num_actions(); }
  std::size_t num_policies(std::size_t c) const { return data_->policies[c].size(); }
  const PolicySet& policies(std::size_t c) const { return data_->policies[c]; }
  const DeterministicPolicy& policy(std::size_t c, std::size_t u) const {
    return data_->policies[c][u];
  }
  const StationaryDistribution& stationary(std::size_t c, std::size_t u) const {
    return data_->stationary[c][u];
  }
  // phi^{c,u}, column-stochastic.
  const Mat& kernel(std::size_t c, std::size_t u) const { return data_->kernels[c][u]; }
  double max_rate() const;

  StatePolicyDist zero_state_policy() const;
  StateActionDist zero_state_action() const;
  MarginalPolicyDist zero_marginal() const;

  // Throws DimensionError on shape mismatch; checks nonnegativity and class
  // masses within `tol` and throws Error otherwise.
  void check(const StatePolicyDist& mu, double tol = kMassTolerance) const;
  void check(const MarginalPolicyDist& x, double tol = kMassTolerance) const;

 private:
  struct Data {
    GameSpec spec;
    std::vector<PolicySet> policies;
    std::vector<std::vector<StationaryDistribution>> stationary;
    std::vector<std::vector<Mat>> kernels;
  };
  explicit Game(std::shared_ptr<const Data> d) : data_(std::move(d)) {}
  std::shared_ptr<const Data> data_;
};

// mu^c_{SxA}[s, a] = sum_u mu^c[s, u] u(a | s). Linear in mu.
StateActionDist aggregate_state_action(const Game& game, const StatePolicyDist& mu);

// r^c(s, a, mu_{SxA}); throws DimensionError for inadmissible (s, a).
double reward_eval(const GameSpec& spec, std::size_t c, std::size_t s, std::size_t a,
                   const StateActionDist& sa);

// Uniform distribution over all (state, policy) cells of each class.
StatePolicyDist uniform_state_policy(const Game& game);

}  // namespace mfgevo

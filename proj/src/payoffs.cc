#include "mfgevo/payoffs.h"

#include <cmath>

namespace mfgevo {

double average_payoff(const Game& game, std::size_t c, std::size_t u, const StateActionDist& sa) {
  const auto& eta = game.stationary(c, u).eta;
  const auto& act = game.policy(c, u).action;
  const auto& k = game.cls(c);
  double j = 0.0;
  for (std::size_t s = 0; s < act.size(); ++s) {
    const double w = eta[static_cast<Eigen::Index>(s)];
    if (w == 0.0) continue;
    j += w * k.reward->value(c, s, act[s], sa);
  }
  return j;
}

double average_payoff_randomized(const GameSpec& spec, std::size_t c, const RowMat& probs,
                                 const StateActionDist& sa) {
  const ClassSpec& k = spec.classes.at(c);
  for (Eigen::Index s = 0; s < probs.rows(); ++s)
    for (Eigen::Index a = 0; a < probs.cols(); ++a)
      if (probs(s, a) != 0.0 && !k.is_admissible(static_cast<std::size_t>(s), static_cast<std::size_t>(a)))
        throw DimensionError("randomized policy puts weight on an inadmissible action");
  const Vec eta = stationary_from_kernel(randomized_policy_kernel(k, probs)).eta;
  double j = 0.0;
  for (Eigen::Index s = 0; s < probs.rows(); ++s) {
    if (eta[s] == 0.0) continue;
    for (Eigen::Index a = 0; a < probs.cols(); ++a)
      if (probs(s, a) != 0.0)
        j += eta[s] * probs(s, a) *
             k.reward->value(c, static_cast<std::size_t>(s), static_cast<std::size_t>(a), sa);
  }
  return j;
}

PayoffVector payoff_map_sa(const Game& game, const StateActionDist& sa) {
  PayoffVector F;
  F.classes.reserve(game.num_classes());
  for (std::size_t c = 0; c < game.num_classes(); ++c) {
    Vec v(static_cast<Eigen::Index>(game.num_policies(c)));
    for (std::size_t u = 0; u < game.num_policies(c); ++u)
      v[static_cast<Eigen::Index>(u)] = average_payoff(game, c, u, sa);
    F.classes.push_back(std::move(v));
  }
  return F;
}

PayoffVector payoff_map(const Game& game, const StatePolicyDist& mu) {
  return payoff_map_sa(game, aggregate_state_action(game, mu));
}

StatePolicyDist stationary_lift(const Game& game, const MarginalPolicyDist& x) {
  if (x.classes.size() != game.num_classes())
    throw DimensionError("policy distribution has the wrong number of classes");
  StatePolicyDist mu = game.zero_state_policy();
  for (std::size_t c = 0; c < game.num_classes(); ++c) {
    if (x.classes[c].size() != static_cast<Eigen::Index>(game.num_policies(c)))
      throw DimensionError("class " + std::to_string(c) + ": policy distribution has wrong length");
    for (std::size_t u = 0; u < game.num_policies(c); ++u)
      mu.classes[c].col(static_cast<Eigen::Index>(u)) =
          x.classes[c][static_cast<Eigen::Index>(u)] * game.stationary(c, u).eta;
  }
  return mu;
}

PayoffVector steady_state_payoff(const Game& game, const MarginalPolicyDist& x) {
  return payoff_map(game, stationary_lift(game, x));
}

Vec excess_payoff(const Vec& F, const Vec& sigma) {
  if (F.size() != sigma.size()) throw DimensionError("payoff and policy distribution lengths differ");
  const double m = sigma.sum();
  if (!(m > 0.0)) throw Error("excess payoff needs a class with positive mass");
  return F.array() - F.dot(sigma) / m;
}

}  // namespace mfgevo

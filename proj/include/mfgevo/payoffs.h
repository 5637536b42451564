#pragma once

#include <cstddef>

#include "mfgevo/game.h"

namespace mfgevo {

// J^c(u, mu_SA) = sum_s eta^{c,u}(s) r^c(s, u(s), mu_SA).
double average_payoff(const Game& game, std::size_t c, std::size_t u, const StateActionDist& sa);

// Same quantity for a randomized policy probs(s, a) = u(a | s). The
// stationary law of the induced chain is computed on the fly.
double average_payoff_randomized(const GameSpec& spec, std::size_t c, const RowMat& probs,
                                 const StateActionDist& sa);

// F(mu), in canonical policy order.
PayoffVector payoff_map(const Game& game, const StatePolicyDist& mu);
// Same, with the aggregated distribution already at hand.
PayoffVector payoff_map_sa(const Game& game, const StateActionDist& sa);

// mu^c[s, u] = x^c[u] eta^{c,u}(s).
StatePolicyDist stationary_lift(const Game& game, const MarginalPolicyDist& x);

// Steady-state game: F evaluated at the stationary lift of x.
PayoffVector steady_state_payoff(const Game& game, const MarginalPolicyDist& x);

// F - 1 (F^T sigma) / m with m = sum(sigma). Throws DimensionError on
// length mismatch and Error when sigma has no mass.
Vec excess_payoff(const Vec& F, const Vec& sigma);

}  // namespace mfgevo

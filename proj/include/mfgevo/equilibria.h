#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mfgevo/mean_dynamic.h"

namespace mfgevo {

inline constexpr double kSupportThreshold = 1e-12;

struct ProtocolResidual {
  std::string protocol;
  double residual = 0.0;  // ||V(mu)||_inf with the protocol applied to every class
  bool rest_point = false;
};

struct EquilibriumCertificate {
  StatePolicyDist mu;
  MarginalPolicyDist marginal;
  PayoffVector payoffs;
  std::vector<double> gap;                    // per class: max F - min over supported F
  std::vector<double> conditional_deviation;  // per class: max_u ||mu[., u]/sigma_u - eta_u||_inf
  double stationarity_residual = 0.0;         // ||f^d(mu)||_inf
  std::vector<ProtocolResidual> fields;
  double tol = 0.0;
  bool is_msne = false;

  double max_gap() const;
  double max_conditional_deviation() const;
  // Throws Error when the protocol was not part of the verification.
  bool is_rest_point(const std::string& protocol) const;
  const ProtocolResidual& field(const std::string& protocol) const;
  std::string to_json() const;
};

// MSNE check: every supported policy (marginal > 1e-12) is payoff-maximal
// within tol and its conditional state law matches eta within tol. Each
// protocol in `protocols` is applied uniformly to every class to report
// the field residual.
EquilibriumCertificate verify_msne(const Game& game, const StatePolicyDist& mu, double tol = 1e-9,
                                   const std::vector<RevisionProtocol>& protocols = {});

// NE of the steady-state game; the certificate is that of the stationary lift.
EquilibriumCertificate verify_ne_steady_state(const Game& game, const MarginalPolicyDist& x,
                                              double tol = 1e-9,
                                              const std::vector<RevisionProtocol>& protocols = {});

struct SolveOptions {
  std::size_t multistart = 16;
  double rest_tol = 1e-10;
  double certify_tol = 1e-9;
  double max_time = 2000.0;
  double step = 0.0;
  std::uint64_t seed = 1;
  double dedupe_tol = 1e-6;
};

struct StartOutcome {
  std::size_t index = 0;
  StatePolicyDist start;
  bool converged = false;
  double residual = 0.0;    // field residual of the raw rest point
  double time = 0.0;
  std::size_t pruned = 0;
  std::optional<EquilibriumCertificate> raw;       // the rest point as integrated
  // Set when the raw rest point is not an MSNE: dominated near-extinct
  // policies removed and the result lifted to its stationary law.
  std::optional<EquilibriumCertificate> polished;
  bool certified = false;
  std::string defect;       // non-empty when a converged rest point fails to certify
};

struct SolveResult {
  std::string protocol;
  std::vector<StartOutcome> starts;
  std::vector<EquilibriumCertificate> equilibria;  // distinct certified MSNE
  // Rest points that fail to certify. For excess-payoff and pairwise
  // protocols every rest point must be an MSNE, so these are defects; for
  // imitative protocols such rest points are legitimate and listed apart.
  std::vector<std::string> defects;
  std::vector<std::string> non_msne_rest_points;
  std::size_t nonconverged = 0;
};

// Multistart rest-point search under `protocol` (applied to all classes),
// with every converged rest point checked by verify_msne. A rest point
// certifies either as integrated or after polishing, in which case the
// polished point must itself be a rest point within certify_tol.
SolveResult solve_msne_by_dynamics(const Game& game, const RevisionProtocol& protocol,
                                   const SolveOptions& opts = {});

// Random interior state-policy distribution (Dirichlet over all cells).
StatePolicyDist random_interior(const Game& game, Rng& rng);

// ---------------------------------------------------------------------------
// Congestion games

// The resource model shared by every class, or nullptr when some class does
// not use a congestion reward.
std::shared_ptr<const ResourceModel> congestion_model(const Game& game);

// sigma_r(x) via stationary lifts.
std::vector<double> steady_state_flows(const Game& game, const ResourceModel& model,
                                       const MarginalPolicyDist& x);

// U(x) = (1/lambda) sum_r int_0^{sigma_r(x)} w_r. Throws Error for a game
// without congestion rewards. Defined for any x (not only the simplex).
double potential_value(const Game& game, const ResourceModel& model, const MarginalPolicyDist& x);

struct PotentialCheck {
  std::size_t points = 0;
  std::size_t failures = 0;
  double max_rel_error = 0.0;
  MarginalPolicyDist worst;
  bool passed() const { return points > 0 && failures == 0; }
};

// Central finite differences of `model`'s potential against the game's
// steady-state payoffs at random interior points.
PotentialCheck check_full_potential(const Game& game, const ResourceModel& model, std::size_t samples = 50,
                                    std::uint64_t seed = 1, double rel_tol = 1e-6, double fd_step = 1e-5);

struct CongestionOptions {
  std::size_t multistart = 10;
  std::size_t max_iter = 100000;
  double stationarity_tol = 1e-13;
  double certify_tol = 1e-9;
  std::uint64_t seed = 1;
};

struct CongestionResult {
  MarginalPolicyDist x;
  std::vector<double> flows;
  double potential = 0.0;
  EquilibriumCertificate certificate;
  std::vector<std::vector<double>> start_flows;
  double flow_spread = 0.0;  // max over resources of the spread across starts
  bool converged = true;     // every start met the stationarity tolerance
};

// Maximises U over the product of class simplices by projected gradient
// ascent with Armijo backtracking, from `multistart` random points.
CongestionResult solve_congestion_equilibrium(const Game& game, const ResourceModel& model,
                                              const CongestionOptions& opts = {});

// Euclidean projection of v onto {x >= 0, sum x = total}.
Vec project_simplex(const Vec& v, double total);

}  // namespace mfgevo

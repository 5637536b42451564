#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mfgevo/payoffs.h"
#include "mfgevo/revision.h"

namespace mfgevo {

// f^d, f^r and V = f^d + f^r, each shaped like a StatePolicyDist.
struct FlowField {
  Field dynamic;
  Field revision;
  Field total;
  PayoffVector payoffs;  // F(mu) used for the revision term

  double residual() const { return max_abs(total); }
};

// f^d_{s,u} = lambda_d (sum_{s'} phi^{c,u}(s | s') mu[s', u] - mu[s, u]).
Field dynamic_flow(const Game& game, const StatePolicyDist& mu);

// f^r_{s,u} = sum_{u'} mu[s, u'] rho_{u'u} - mu[s, u] sum_{u'} rho_{uu'}.
Field revision_flow(const Game& game, const StatePolicyDist& mu, const ProtocolSet& protocols);
Field revision_flow(const Game& game, const StatePolicyDist& mu, const ProtocolSet& protocols,
                    const PayoffVector& F);

FlowField vector_field(const Game& game, const StatePolicyDist& mu, const ProtocolSet& protocols);

enum class Method { RK4, Euler };
std::string method_name(Method m);

struct IntegrateOptions {
  double horizon = 10.0;
  double step = 0.0;             // 0 selects default_step(game)
  Method method = Method::RK4;
  double sample_interval = 0.0;  // 0 records every step
  bool record_payoffs = true;
  // Stop as soon as ||V||_inf < rest_tol (checked at every step).
  bool stop_at_rest = false;
  double rest_tol = 1e-10;
};

struct TrajectoryRecord {
  std::vector<double> t;
  std::vector<StatePolicyDist> mu;
  std::vector<double> residual;        // ||V(mu(t_k))||_inf
  std::vector<PayoffVector> payoffs;   // empty unless requested
  double step = 0.0;
  std::string method;
  bool stopped_at_rest = false;
  std::size_t clipped_steps = 0;       // steps that needed clip-and-renormalise
  double min_before_clip = 0.0;        // most negative entry ever produced

  const StatePolicyDist& final_state() const { return mu.back(); }
};

// 0.01 / max over classes of max(lambda_d, lambda_r).
double default_step(const Game& game);

// Fixed-step integration of the mean dynamic. Throws IntegrationError on
// non-finite values or negative entries below -1e-9, with the time.
TrajectoryRecord integrate(const Game& game, const StatePolicyDist& mu0, const ProtocolSet& protocols,
                           const IntegrateOptions& opts = {});

struct RestOptions {
  double tol = 1e-10;
  double max_time = 2000.0;
  double step = 0.0;
  // Drop policies that are strictly worse than the best one and nearly
  // extinct once the field is small, then continue on the smaller face.
  // Dynamics like BNN approach such faces only algebraically.
  bool prune = false;
  double prune_field = 1e-4;
  double prune_mass = 0.25;   // relative to class mass
  double prune_gap = 1e-7;    // also at least 100 times the current residual
};

struct RestResult {
  StatePolicyDist mu;
  double residual = 0.0;
  double time = 0.0;
  bool converged = false;
  std::size_t pruned = 0;  // policies zeroed
};

RestResult find_rest_point(const Game& game, const StatePolicyDist& mu0, const ProtocolSet& protocols,
                           const RestOptions& opts = {});

}  // namespace mfgevo

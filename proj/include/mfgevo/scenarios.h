#pragma once

#include <map>
#include <memory>
#include <string>
#include <utility>

#include "mfgevo/equilibria.h"

namespace mfgevo {

// ---------------------------------------------------------------------------
// Two-state, single-class example with unit rewards (lambda_d = lambda_r = 1).

GameSpec example3_spec();

struct Example3 {
  Game game;
  // "fig1": the MSNE that is not a rest point; "fig2": the rest point that
  // is not an MSNE.
  std::map<std::string, StatePolicyDist> named;
  RevisionProtocol protocol;  // dissatisfaction, K = 2
};

Example3 build_example3();

// ---------------------------------------------------------------------------
// Medium access game: states E, AE, F; actions N (no transmission), L, H.

struct MacParams {
  double P_L = 1.0;
  double P_H = 4.0;
  double p_F = 0.2;     // recharge probability from E
  double alpha = 0.2;   // consumption per unit power
  double gamma = 0.02;  // background consumption
  double sigma2 = 0.1;
  double C = 1.0;
  double beta = 1.15;
  double T = 1.0;
  double action_rate = 1.0;
  double revision_rate = 1.0;

  double d_L() const { return alpha * P_L + gamma; }
  double d_H() const { return alpha * P_H + gamma; }
  // Throws SpecError when an inequality fails.
  void validate() const;
};

MacParams default_mac_params();

GameSpec mac_spec(const MacParams& p);
// Policies come out as u1 (F -> L) at index 0 and u0 (F -> H) at index 1.
Game build_mac(const MacParams& p);

// Closed-form stationary law (E, AE, F) of u_q, q = P(L | F).
Vec mac_stationary(double q, const MacParams& p);
// Expected transmitted power of a player using u_q.
double mac_activity(double q, const MacParams& p);
// J(q, h): payoff of a player on u_q when everyone else plays u_h.
double mac_deviation_payoff(double q, double h, const MacParams& p);
// (J(u1, x), J(u0, x)) with x the mass on u1.
std::pair<double, double> mac_mixed_payoffs(double x, const MacParams& p);

struct MacMsne {
  double x = 0.0;
  bool interior = false;
  double payoff_difference = 0.0;  // J(u1, x) - J(u0, x)
  MarginalPolicyDist marginal;     // (x, 1 - x)
};

MacMsne solve_mac_msne(const MacParams& p, double tol = 1e-14);

struct MacBsne {
  double h = 0.0;
  bool interior = false;
  double best_response = 0.0;  // argmax_q J(q, h)
  double gap = 0.0;            // max_q J(q, h) - J(h, h)
};

MacBsne solve_mac_bsne(const MacParams& p, double tol = 1e-14);

// max over q in [0, 1] of J(q, h) by golden-section search, endpoints included.
std::pair<double, double> mac_best_response(double h, const MacParams& p, double tol = 1e-12);

// ---------------------------------------------------------------------------
// Congestion demo: two classes sharing two resources; every action uses
// exactly one resource and the battery-like state gates which ones.

struct CongestionDemo {
  Game game;
  std::shared_ptr<const ResourceModel> model;
};

// With `constant` set, both resource rewards are identically 1 (flat potential).
CongestionDemo build_congestion_demo(bool constant = false);
GameSpec congestion_demo_spec(std::shared_ptr<const ResourceModel> model);
std::shared_ptr<const ResourceModel> congestion_demo_model(bool constant = false);

// Loads a scenario by CLI name: example3, mac, congestion-demo.
Game scenario_game(const std::string& name);

}  // namespace mfgevo

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.h"

using namespace mfgevo;

namespace {

// Behavioral state-action law of a population on u_h.
StateActionDist behavioral_sa(const Game& g, double h, const MacParams& p) {
  const Vec eta = mac_stationary(h, p);
  StateActionDist sa = g.zero_state_action();
  sa.classes[0](0, 0) = eta[0];
  sa.classes[0](1, 1) = eta[1];
  sa.classes[0](2, 1) = h * eta[2];
  sa.classes[0](2, 2) = (1.0 - h) * eta[2];
  return sa;
}

RowMat behavioral_policy(double q) {
  RowMat probs = RowMat::Zero(3, 3);
  probs(0, 0) = 1.0;
  probs(1, 1) = 1.0;
  probs(2, 1) = q;
  probs(2, 2) = 1.0 - q;
  return probs;
}

}  // namespace

TEST_CASE("worked two-state scenario") {
  const Example3 ex = build_example3();
  CHECK(ex.game.cls(0).action_rate == 1.0);
  CHECK(ex.game.cls(0).revision_rate == 1.0);
  CHECK(ex.protocol.level() == std::optional<double>(2.0));
  const auto ps = uniform_protocols(ex.game, ex.protocol);
  for (const char* name : {"fig1", "fig2"}) {
    const auto V = vector_field(ex.game, ex.named.at(name), ps);
    CHECK(V.payoffs.classes[0][0] == 1.0);
    CHECK(V.payoffs.classes[0][1] == 1.0);
  }
  const auto V2 = vector_field(ex.game, ex.named.at("fig2"), ps);
  CHECK((V2.dynamic[0] + V2.revision[0]).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(scenario_game("example3").num_policies(0) == 2);
  CHECK(scenario_game("congestion-demo").num_classes() == 2);
  CHECK_THROWS_AS(scenario_game("token-economy"), SpecError);
}

TEST_CASE("medium access structure") {
  const MacParams p = default_mac_params();
  CHECK_NOTHROW(p.validate());
  const Game g = build_mac(p);
  REQUIRE(g.num_policies(0) == 2);
  CHECK(g.policy(0, 0).label(g.cls(0)) == "E->N;AE->L;F->L");
  CHECK(g.policy(0, 1).label(g.cls(0)) == "E->N;AE->L;F->H");
  Rng rng(1, 0);
  for (int i = 0; i < 20; ++i)
    CHECK(reward_eval(g.spec(), 0, 0, 0, aggregate_state_action(g, random_interior(g, rng))) == 0.0);

  MacParams bad = p;
  bad.alpha = 0.3;  // alpha P_H + gamma > 1
  CHECK_THROWS_AS(bad.validate(), SpecError);
  bad = p;
  bad.P_H = 0.5;
  CHECK_THROWS_AS(build_mac(bad), SpecError);
}

TEST_CASE("closed-form stationary law") {
  const MacParams p = default_mac_params();
  const Game g = build_mac(p);
  CHECK((mac_stationary(1.0, p) - g.stationary(0, 0).eta).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((mac_stationary(0.0, p) - g.stationary(0, 1).eta).cwiseAbs().maxCoeff() <= 1e-12);
  for (double q : {0.0, 0.13, 0.5, 0.77, 1.0}) {
    const Vec e = mac_stationary(q, p);
    const double d = q * p.d_L() + (1 - q) * p.d_H();
    CHECK(e[0] * p.p_F == doctest::Approx(e[1] * p.d_L()).epsilon(1e-13));
    CHECK(e[1] * p.d_L() == doctest::Approx(e[2] * d).epsilon(1e-13));
    const Mat k = randomized_policy_kernel(g.cls(0), behavioral_policy(q));
    CHECK(oracle::total_variation(e, oracle::power_iteration(k)) < 1e-8);
  }
}

TEST_CASE("deviation payoff matches the generic engine") {
  const MacParams p = default_mac_params();
  const Game g = build_mac(p);
  for (double q : {0.0, 0.2, 0.6, 1.0})
    for (double h : {0.0, 0.35, 0.9, 1.0}) {
      const double generic = average_payoff_randomized(g.spec(), 0, behavioral_policy(q), behavioral_sa(g, h, p));
      CHECK(std::abs(mac_deviation_payoff(q, h, p) - generic) <= 1e-10);
    }
  // Pure corners agree with the mixed parameterisation.
  CHECK(std::abs(mac_deviation_payoff(1.0, 1.0, p) - mac_mixed_payoffs(1.0, p).first) <= 1e-12);
  CHECK(std::abs(mac_deviation_payoff(0.0, 0.0, p) - mac_mixed_payoffs(0.0, p).second) <= 1e-12);
  CHECK(std::abs(mac_deviation_payoff(0.0, 1.0, p) - average_payoff(g, 0, 1, behavioral_sa(g, 1.0, p))) <= 1e-12);
}

TEST_CASE("behavioral equilibrium") {
  const MacParams p = default_mac_params();
  const auto b = solve_mac_bsne(p);
  REQUIRE(b.interior);
  CHECK(b.gap <= 1e-8);
  CHECK(b.h == solve_mac_bsne(p).h);
  const double eps = 1e-5;
  const double slope = (mac_deviation_payoff(b.h + eps, b.h, p) - mac_deviation_payoff(b.h - eps, b.h, p)) / (2 * eps);
  CHECK(std::abs(slope) <= 1e-6);
  for (double h : {0.1, 0.3, 0.5, b.h - 0.05}) CHECK(mac_best_response(h, p).first > h);
  for (double h : {b.h + 0.05, 0.9, 1.0}) CHECK(mac_best_response(h, p).first < h);

  MacParams pricey = p;
  pricey.beta = 9.0;  // even low power does not pay
  for (double h : {0.0, 0.4, 1.0}) {
    const double top = mac_deviation_payoff(1.0, h, pricey);
    for (double q : {0.0, 0.3, 0.7}) CHECK(mac_deviation_payoff(q, h, pricey) <= top);
  }
}

TEST_CASE("mixed equilibrium") {
  const MacParams p = default_mac_params();
  const auto m = solve_mac_msne(p);
  REQUIRE(m.interior);
  CHECK(std::abs(m.x - oracle::mac_msne_reference(p)) <= 1e-12);
  CHECK(std::abs(m.payoff_difference) <= 1e-8);
  const auto lo = mac_mixed_payoffs(m.x - 1e-3, p), hi = mac_mixed_payoffs(m.x + 1e-3, p);
  CHECK((lo.first - lo.second) * (hi.first - hi.second) < 0.0);
  const Game g = build_mac(p);
  CHECK(verify_msne(g, stationary_lift(g, m.marginal)).is_msne);
  CHECK(std::abs(solve_mac_bsne(p).h - m.x) > 0.05);
}

TEST_CASE("decoupled channel and vanishing SINR") {
  MacParams p = default_mac_params();
  p.C = 0.0;
  CHECK(mac_deviation_payoff(0.4, 0.0, p) == mac_deviation_payoff(0.4, 1.0, p));
  CHECK(mac_mixed_payoffs(0.0, p).first == mac_mixed_payoffs(1.0, p).first);
  const auto m = solve_mac_msne(p);
  CHECK_FALSE(m.interior);
  const auto [j1, j0] = mac_mixed_payoffs(0.5, p);
  CHECK(m.x == (j1 > j0 ? 1.0 : 0.0));

  MacParams quiet = default_mac_params();
  quiet.beta = 0.0;
  quiet.sigma2 = 1e12;
  const auto [q1, q0] = mac_mixed_payoffs(0.5, quiet);
  CHECK(std::abs(q1) < 1e-11);
  CHECK(std::abs(q0) < 1e-11);
}

TEST_CASE("congestion demo") {
  const auto demo = build_congestion_demo();
  CHECK(congestion_model(demo.game) == demo.model);
  CHECK(check_full_potential(demo.game, *demo.model).passed());
  for (const auto& w : demo.model->reward) CHECK(w.slope < 0.0);
  const auto flat = build_congestion_demo(true);
  for (const auto& w : flat.model->reward) CHECK(w.slope == 0.0);
}

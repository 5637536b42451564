#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mfgevo/agent_sim.h"
#include "oracles.h"

using namespace mfgevo;

namespace {

double tv(const StatePolicyDist& a, const StatePolicyDist& b) {
  double s = 0.0;
  for (std::size_t c = 0; c < a.classes.size(); ++c) s += (a.classes[c] - b.classes[c]).cwiseAbs().sum();
  return 0.5 * s;
}

bool multiples_of(const StatePolicyDist& mu, std::size_t N) {
  for (const auto& b : mu.classes)
    for (Eigen::Index i = 0; i < b.size(); ++i) {
      const double k = b.data()[i] * static_cast<double>(N);
      if (std::abs(k - std::round(k)) > 1e-9) return false;
    }
  return true;
}

}  // namespace

TEST_CASE("apportionment of the initial population") {
  const Game g = build_congestion_demo().game;
  const auto mu = uniform_state_policy(g);
  for (std::size_t N : {1u, 2u, 7u, 10u, 333u, 1000u}) {
    if (N < 2) {
      CHECK_THROWS_AS(initial_population(g, mu, N), Error);
      continue;
    }
    const auto pop = initial_population(g, mu, N);
    CHECK(pop.cls.size() == N);
    std::size_t total = 0;
    for (std::size_t c = 0; c < g.num_classes(); ++c) {
      const double want = std::round(static_cast<double>(N) * g.cls(c).mass);
      if (N >= 5) CHECK(static_cast<double>(pop.class_size(c)) == want);
      total += pop.class_size(c);
    }
    CHECK(total == N);
    CHECK(multiples_of(pop.empirical(g), N));
  }
  const Example3 ex = build_example3();
  const auto pop = initial_population(ex.game, ex.named.at("fig1"), 100);
  CHECK(tv(pop.empirical(ex.game), ex.named.at("fig1")) < 1e-12);
  const auto sa = pop.empirical_state_action(ex.game);
  CHECK(sa(0, 0, 0) == doctest::Approx(0.64));
}

TEST_CASE("a lone player on an identity kernel never moves") {
  const GameSpec spec = oracle::one_state_spec();
  const Game g = Game::create(spec);
  StatePolicyDist mu0 = g.zero_state_policy();
  mu0(0, 0, 1) = 1.0;
  SimOptions o;
  o.horizon = 50.0;
  o.sample_interval = 1.0;
  const auto r = simulate(g, uniform_protocols(g, make_null()), mu0, 1, o);
  REQUIRE(r.trajectory.t.size() == 51);
  for (const auto& mu : r.trajectory.mu) CHECK(mu.classes[0] == mu0.classes[0]);
  CHECK(r.switches == 0);
  CHECK(r.action_events > 0);
}

TEST_CASE("empirical distributions stay on the 1/N lattice") {
  const Example3 ex = build_example3();
  SimOptions o;
  o.horizon = 5.0;
  const std::size_t N = 137;
  const auto r = simulate(ex.game, uniform_protocols(ex.game, ex.protocol), ex.named.at("fig1"), N, o);
  for (const auto& mu : r.trajectory.mu) {
    CHECK(multiples_of(mu, N));
    CHECK_NOTHROW(ex.game.check(mu, 1e-12));
  }
  CHECK(r.switches > 0);
  CHECK(r.switches <= r.revision_events);
}

TEST_CASE("action clocks ring at the configured rate") {
  GameSpec spec = example3_spec();
  spec.classes[0].action_rate = 1.5;
  const Game g = Game::create(spec);
  const std::size_t N = 400;
  const double T = 40.0, mean = 1.5 * T;
  SimOptions o;
  o.horizon = T;
  o.sample_interval = T;
  o.seed = 5;
  const auto r = simulate(g, uniform_protocols(g, make_null()), uniform_state_policy(g), N, o);
  REQUIRE(r.player_action_events.size() == N);
  double chi2 = 0.0, sum = 0.0;
  for (std::size_t k : r.player_action_events) {
    chi2 += (static_cast<double>(k) - mean) * (static_cast<double>(k) - mean) / mean;
    sum += static_cast<double>(k);
  }
  // Poisson dispersion test; chi-square with N - 1 dof, 1% two-sided.
  const double z = (chi2 - static_cast<double>(N - 1)) / std::sqrt(2.0 * static_cast<double>(N - 1));
  CHECK(std::abs(z) < 2.576);
  const double zt = (sum - mean * static_cast<double>(N)) / std::sqrt(mean * static_cast<double>(N));
  CHECK(std::abs(zt) < 2.576);
  CHECK(r.action_events == static_cast<std::size_t>(sum));
}

TEST_CASE("state occupancy of a fixed policy matches its stationary law") {
  const Example3 ex = build_example3();
  for (std::size_t u = 0; u < 2; ++u) {
    StatePolicyDist mu0 = ex.game.zero_state_policy();
    mu0(0, 0, u) = 1.0;
    SimOptions o;
    o.horizon = 2000.0;
    o.sample_interval = 1.0;
    o.seed = 9;
    const std::size_t N = 50;
    const auto r = simulate(ex.game, uniform_protocols(ex.game, make_null()), mu0, N, o);
    Vec occ = Vec::Zero(2);
    std::size_t samples = 0;
    for (std::size_t k = 100; k < r.trajectory.mu.size(); ++k) {
      occ += r.trajectory.mu[k].classes[0].col(static_cast<Eigen::Index>(u));
      samples += N;
    }
    occ /= occ.sum();
    CHECK(oracle::total_variation(occ, ex.game.stationary(0, u).eta) <= 3.0 / std::sqrt(static_cast<double>(samples)));
  }
}

TEST_CASE("identical seeds give identical runs") {
  const Example3 ex = build_example3();
  SimOptions o;
  o.horizon = 3.0;
  o.seed = 77;
  o.stream = 4;
  const auto ps = uniform_protocols(ex.game, ex.protocol);
  const auto a = simulate(ex.game, ps, ex.named.at("fig2"), 500, o);
  const auto b = simulate(ex.game, ps, ex.named.at("fig2"), 500, o);
  REQUIRE(a.trajectory.mu.size() == b.trajectory.mu.size());
  for (std::size_t k = 0; k < a.trajectory.mu.size(); ++k) CHECK(a.trajectory.mu[k].classes[0] == b.trajectory.mu[k].classes[0]);
  CHECK(a.final_state.state == b.final_state.state);
  o.stream = 5;
  const auto c = simulate(ex.game, ps, ex.named.at("fig2"), 500, o);
  CHECK(c.final_state.state != a.final_state.state);
}

TEST_CASE("revision rates above the revision clock") {
  GameSpec spec = example3_spec();
  spec.classes[0].revision_rate = 0.01;
  const Game g = Game::create(spec);
  SimOptions o;
  o.horizon = 5.0;
  const auto ps = uniform_protocols(g, make_dissatisfaction(2.0));
  const auto r = simulate(g, ps, uniform_state_policy(g), 200, o);
  CHECK(r.rate_bound_violations > 0);
  o.strict = true;
  CHECK_THROWS_AS(simulate(g, ps, uniform_state_policy(g), 200, o), AssumptionError);
}

TEST_CASE("convergence study tables") {
  const GameSpec spec = oracle::one_state_spec();
  const Game g = Game::create(spec);
  const auto frozen = convergence_study(g, uniform_protocols(g, make_null()), uniform_state_policy(g), {4, 40, 400}, 3, 2.0);
  REQUIRE(frozen.rows.size() == 9);
  for (const auto& row : frozen.rows) CHECK(row.sup_deviation == 0.0);

  const Example3 ex = build_example3();
  const auto single = convergence_study(ex.game, uniform_protocols(ex.game, ex.protocol), ex.named.at("fig2"), {250}, 4, 1.0);
  REQUIRE(single.summary.size() == 1);
  CHECK(single.summary[0].N == 250);
  CHECK(single.rows.size() == 4);
}

TEST_CASE("large populations track the deterministic limit") {
  const Example3 ex = build_example3();
  SUBCASE("revision off relaxes to the stationary lift") {
    StatePolicyDist mu0 = ex.game.zero_state_policy();
    mu0(0, 1, 0) = 0.2;
    mu0(0, 0, 1) = 0.8;
    SimOptions o;
    o.horizon = 5.0;
    o.sample_interval = 5.0;
    int hits = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
      o.stream = s;
      const auto r = simulate(ex.game, uniform_protocols(ex.game, make_null()), mu0, 10000, o);
      if (tv(r.trajectory.final_state(), ex.named.at("fig1")) <= 0.05) ++hits;
    }
    CHECK(hits == 20);
  }
  SUBCASE("revision on stays near the rest point") {
    SimOptions o;
    o.horizon = 5.0;
    int hits = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
      o.stream = s;
      const auto r = simulate(ex.game, uniform_protocols(ex.game, ex.protocol), ex.named.at("fig2"), 10000, o);
      double sup = 0.0;
      for (const auto& mu : r.trajectory.mu) sup = std::max(sup, tv(mu, ex.named.at("fig2")));
      if (sup <= 0.05) ++hits;
    }
    CHECK(hits >= 18);
  }
}

TEST_CASE("average payoff estimates") {
  SUBCASE("constant reward") {
    GameSpec spec = example3_spec();
    spec.classes[0].reward = std::make_shared<ConstantReward>(2.5);
    const Game g = Game::create(spec);
    const auto pop = initial_population(g, uniform_state_policy(g), 50);
    PayoffOptions o;
    o.horizon = 300.0;
    const auto e = estimate_average_payoff(g, pop, find_player(pop, 0, 0), 1, o);
    CHECK(e.keep == 2.5);
    CHECK(e.deviate == 2.5);
    CHECK(e.gain == 0.0);
    CHECK(e.samples_keep >= 100);
  }
  SUBCASE("unit reward") {
    const Example3 ex = build_example3();
    const auto pop = initial_population(ex.game, ex.named.at("fig1"), 50);
    PayoffOptions o;
    o.horizon = 300.0;
    const auto e = estimate_average_payoff(ex.game, pop, find_player(pop, 0, 1), 0, o);
    CHECK(e.keep == 1.0);
    CHECK(e.deviate == 1.0);
  }
  SUBCASE("too short a horizon") {
    const Example3 ex = build_example3();
    const auto pop = initial_population(ex.game, ex.named.at("fig1"), 50);
    PayoffOptions o;
    o.horizon = 60.0;
    o.burn_in = 50.0;
    CHECK_THROWS_AS(estimate_average_payoff(ex.game, pop, 0, 1, o), Error);
  }
}

TEST_CASE("medium access payoffs agree with the exact finite-population value") {
  const MacParams p = default_mac_params();
  const Game g = build_mac(p);
  const auto x = solve_mac_msne(p);
  const std::size_t N = 200;
  const auto pop = initial_population(g, stationary_lift(g, x.marginal), N);
  std::size_t n1 = 0;
  for (std::size_t i = 0; i < N; ++i) n1 += pop.policy[i] == 0;
  const std::size_t n0 = N - n1;
  PayoffOptions o;
  o.horizon = 20000.0;
  o.seed = 3;
  // A u1 player switching to u0, and a u0 player switching to u1.
  const auto e1 = estimate_average_payoff(g, pop, find_player(pop, 0, 0), 1, o);
  const double keep1 = oracle::mac_finite_payoff(1, n1 - 1, n0, N, p);
  const double dev1 = oracle::mac_finite_payoff(0, n1 - 1, n0, N, p);
  CHECK(std::abs(e1.keep - keep1) <= 4.0 * e1.se_keep);
  CHECK(std::abs(e1.deviate - dev1) <= 4.0 * e1.se_deviate);
  CHECK(std::abs(e1.gain - (dev1 - keep1)) <= 4.0 * e1.se_gain);

  const auto e0 = estimate_average_payoff(g, pop, find_player(pop, 0, 1), 0, o);
  const double keep0 = oracle::mac_finite_payoff(0, n1, n0 - 1, N, p);
  const double dev0 = oracle::mac_finite_payoff(1, n1, n0 - 1, N, p);
  CHECK(std::abs(e0.keep - keep0) <= 4.0 * e0.se_keep);
  CHECK(std::abs(e0.gain - (dev0 - keep0)) <= 4.0 * e0.se_gain);
  CHECK(e0.se_gain < e0.se_keep);
}

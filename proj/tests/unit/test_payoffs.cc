#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.h"

using namespace mfgevo;

namespace {

// J(u, x) for the medium access game straight from the cycle balance.
std::pair<double, double> mac_payoffs_by_hand(double x, const MacParams& p) {
  auto eta = [&](double d) {
    Vec v(3);
    v << 1.0 / p.p_F, 1.0 / p.d_L(), 1.0 / d;
    return Vec(v / v.sum());
  };
  const Vec e1 = eta(p.d_L()), e0 = eta(p.d_H());
  const double a1 = (e1[1] + e1[2]) * p.P_L;
  const double a0 = e0[1] * p.P_L + e0[2] * p.P_H;
  const double load = x * a1 + (1.0 - x) * a0;
  const double g = 1.0 / (p.sigma2 + p.action_rate * p.T * p.C * load) - p.beta;
  return {a1 * g, a0 * g};
}

GameSpec tabular_example3(double r1, double r2) {
  GameSpec spec = example3_spec();
  RowMat t(2, 2);
  t << r1, r1, r2, r2;
  spec.classes[0].reward = std::make_shared<TabularReward>(t);
  return spec;
}

}  // namespace

TEST_CASE("average payoff under unit and tabular rewards") {
  const Example3 ex = build_example3();
  const auto sa = aggregate_state_action(ex.game, ex.named.at("fig1"));
  CHECK(average_payoff(ex.game, 0, 0, sa) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(average_payoff(ex.game, 0, 1, sa) == doctest::Approx(1.0).epsilon(1e-15));

  const Game g = Game::create(tabular_example3(2.0, 0.0));
  CHECK(average_payoff(g, 0, 0, sa) == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(average_payoff(g, 0, 1, sa) == doctest::Approx(1.4).epsilon(1e-14));

  GameSpec c0 = example3_spec();
  c0.classes[0].reward = std::make_shared<ConstantReward>(-3.25);
  const Game gc = Game::create(c0);
  Rng rng(1, 0);
  for (int i = 0; i < 5; ++i) {
    const auto F = payoff_map(gc, random_interior(gc, rng));
    CHECK(F.classes[0][0] == doctest::Approx(-3.25));
    CHECK(F.classes[0][1] == doctest::Approx(-3.25));
  }
}

TEST_CASE("payoff map and steady-state game") {
  const Example3 ex = build_example3();
  const auto F = payoff_map(ex.game, ex.named.at("fig1"));
  CHECK(F.classes[0][0] == doctest::Approx(1.0));
  CHECK(F.classes[0][1] == doctest::Approx(1.0));

  MarginalPolicyDist x = ex.game.zero_marginal();
  x.classes[0] << 0.2, 0.8;
  const auto lift = stationary_lift(ex.game, x);
  const auto flat = oracle::flatten(lift.classes);
  const std::vector<double> fig1 = oracle::flatten(ex.named.at("fig1").classes);
  for (std::size_t i = 0; i < flat.size(); ++i) CHECK(flat[i] == doctest::Approx(fig1[i]).epsilon(1e-14));
  const auto Fs = steady_state_payoff(ex.game, x);
  CHECK(Fs.classes[0][0] == doctest::Approx(1.0));

  x.classes[0] << 1.0, 0.0;
  const auto corner = stationary_lift(ex.game, x);
  CHECK(corner(0, 0, 0) == doctest::Approx(0.4));
  CHECK(corner(0, 1, 0) == doctest::Approx(0.6));
  CHECK(corner.classes[0].col(1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("single-policy class") {
  GameSpec spec = tabular_example3(1.5, -0.5);
  spec.classes[0].admissible[1] = {0};
  const Game g = Game::create(spec);
  REQUIRE(g.num_policies(0) == 1);
  MarginalPolicyDist x = g.zero_marginal();
  x.classes[0] << 1.0;
  CHECK(steady_state_payoff(g, x).classes[0][0] == doctest::Approx(1.5 * 0.4 - 0.5 * 0.6));
}

TEST_CASE("medium access payoffs match the closed form") {
  const MacParams p = default_mac_params();
  const Game g = build_mac(p);
  for (double xv : {0.0, 0.1, 0.37, 0.5, 0.9, 1.0}) {
    MarginalPolicyDist x = g.zero_marginal();
    x.classes[0] << xv, 1.0 - xv;
    const auto F = steady_state_payoff(g, x);
    const auto F2 = payoff_map(g, stationary_lift(g, x));
    const auto [j1, j0] = mac_payoffs_by_hand(xv, p);
    CHECK(std::abs(F.classes[0][0] - j1) < 1e-10);
    CHECK(std::abs(F.classes[0][1] - j0) < 1e-10);
    CHECK(F2.classes[0][0] == F.classes[0][0]);
    const auto [c1, c0] = mac_mixed_payoffs(xv, p);
    CHECK(std::abs(c1 - j1) < 1e-10);
    CHECK(std::abs(c0 - j0) < 1e-10);
  }
}

TEST_CASE("excess payoffs") {
  Vec F(2), s(2);
  F << 1, 1;
  s << 0.2, 0.8;
  CHECK(excess_payoff(F, s).cwiseAbs().maxCoeff() == 0.0);
  F << 2, 0;
  s << 0.5, 0.5;
  const Vec e = excess_payoff(F, s);
  CHECK(e[0] == 1.0);
  CHECK(e[1] == -1.0);
  Vec F3(3), s3(3);
  F3 << 3, 1, 2;
  s3 << 1, 0, 0;
  const Vec e3 = excess_payoff(F3, s3);
  CHECK(e3[0] == 0.0);
  CHECK(e3[1] == -2.0);
  CHECK(e3[2] == -1.0);
  CHECK_THROWS_AS(excess_payoff(F3, s), DimensionError);
  CHECK_THROWS_AS(excess_payoff(F, Vec::Zero(2)), Error);

  Rng rng(5, 0);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 2 + rng.next() % 5;
    Vec f(static_cast<Eigen::Index>(n));
    for (auto& v : f) v = 10.0 * rng.normal();
    const Vec sig = rng.simplex(n, 0.3 + rng.uniform());
    CHECK(std::abs(sig.dot(excess_payoff(f, sig))) < 1e-12 * std::max(1.0, f.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("consistency triangle and affine equivariance on random games") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const GameSpec spec = oracle::random_tabular_spec(seed);
    const Game g = Game::create(spec);
    GameSpec shifted = spec;
    for (auto& k : shifted.classes) {
      auto t = std::dynamic_pointer_cast<const TabularReward>(k.reward)->table();
      k.reward = std::make_shared<TabularReward>(RowMat(t.array() + 0.75));
    }
    const Game gs = Game::create(shifted);
    Rng rng(seed, 1);
    const auto mu = random_interior(g, rng);
    const auto x = marginal_policy(mu);
    const auto lift = stationary_lift(g, x);
    const auto a = payoff_map(g, lift), b = steady_state_payoff(g, x), c = payoff_map(gs, mu), d = payoff_map(g, mu);
    for (std::size_t k = 0; k < g.num_classes(); ++k) {
      CHECK((a.classes[k] - b.classes[k]).cwiseAbs().maxCoeff() < 1e-15);
      CHECK((c.classes[k] - d.classes[k] - Vec::Constant(d.classes[k].size(), 0.75)).cwiseAbs().maxCoeff() < 1e-14);
    }
  }
}

TEST_CASE("payoff map is Lipschitz on perturbation pairs") {
  const Game mac = build_mac(default_mac_params());
  const Game cong = build_congestion_demo().game;
  for (const Game* g : {&mac, &cong}) {
    Rng rng(17, 0);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      const auto mu = random_interior(*g, rng);
      const auto nu = random_interior(*g, rng);
      for (double eps : {1e-2, 1e-4, 1e-6}) {
        StatePolicyDist m2 = mu;
        for (std::size_t c = 0; c < g->num_classes(); ++c) m2.classes[c] = (1 - eps) * mu.classes[c] + eps * nu.classes[c];
        const double dmu = max_abs_diff(mu.classes, m2.classes);
        const auto F1 = payoff_map(*g, mu), F2 = payoff_map(*g, m2);
        double dF = 0.0;
        for (std::size_t c = 0; c < g->num_classes(); ++c)
          dF = std::max(dF, (F1.classes[c] - F2.classes[c]).cwiseAbs().maxCoeff());
        worst = std::max(worst, dF / dmu);
      }
    }
    CHECK(std::isfinite(worst));
    CHECK(worst < 1e3);
  }
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.h"

using namespace mfgevo;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Vec v3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

// Payoffs on a 1/64 grid and marginals on a 1/8 grid keep every operation
// below exact in binary floating point.
Vec dyadic(Rng& rng, std::size_t n, double scale) {
  Vec v(static_cast<Eigen::Index>(n));
  for (auto& x : v) x = std::floor(rng.uniform() * scale * 64.0) / 64.0;
  return v;
}

Vec dyadic_simplex(Rng& rng, std::size_t n) {
  Vec v = Vec::Zero(static_cast<Eigen::Index>(n));
  for (int k = 0; k < 8; ++k) v[static_cast<Eigen::Index>(rng.next() % n)] += 0.125;
  return v;
}

GameSpec example3_with_table(double lambda_r) {
  GameSpec spec = example3_spec();
  RowMat t(2, 2);
  t << 0.0, 0.0, 1.0, 0.25;
  spec.classes[0].reward = std::make_shared<TabularReward>(t);
  spec.classes[0].revision_rate = lambda_r;
  return spec;
}

}  // namespace

TEST_CASE("dissatisfaction-driven imitation") {
  const auto p = make_dissatisfaction(2.0);
  CHECK(p.family() == ProtocolFamily::Imitative);
  CHECK(p.level() == std::optional<double>(2.0));
  RowMat r = p.rates(v2(1, 1), v2(0.2, 0.8));
  CHECK(r(0, 1) == doctest::Approx(0.8));
  CHECK(r(1, 0) == doctest::Approx(0.2));
  r = p.rates(v2(1, 1), v2(1, 0));
  CHECK(r(0, 1) == 0.0);
  CHECK(r(1, 0) == 1.0);
  r = p.rates(v2(2, 1), v2(0.5, 0.5));
  CHECK(r.row(0).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(p.rates(v2(2.5, 1), v2(0.5, 0.5)), AssumptionError);
}

TEST_CASE("pairwise proportional imitation") {
  const auto p = make_pairwise_proportional_imitation();
  CHECK(p.family() == ProtocolFamily::ImitativeViaComparison);
  CHECK(p.rates(v2(1, 1), v2(0.3, 0.7)).cwiseAbs().maxCoeff() == 0.0);
  const RowMat r = p.rates(v2(0, 1), v2(0.5, 0.5));
  CHECK(r(0, 1) == 0.5);
  CHECK(r(1, 0) == 0.0);
  CHECK(p.rates(v2(0, 1), v2(1, 0)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("BNN") {
  const auto p = make_bnn();
  CHECK(p.family() == ProtocolFamily::SeparableExcessPayoff);
  CHECK(p.rates(v2(1, 1), v2(0.2, 0.8)).cwiseAbs().maxCoeff() == 0.0);
  const RowMat r = p.rates(v2(2, 0), v2(0.5, 0.5));
  CHECK(r(1, 0) == 1.0);
  CHECK(r(0, 1) == 0.0);
  CHECK(p.rates(v3(3, 1, 2), v3(1, 0, 0)).cwiseAbs().maxCoeff() == 0.0);
  Rng rng(4, 0);
  for (int i = 0; i < 100; ++i) {
    const RowMat m = p.rates(dyadic(rng, 4, 3.0), dyadic_simplex(rng, 4));
    // The rate into v does not depend on the current policy.
    for (Eigen::Index v = 0; v < 4; ++v) {
      const double ref = m(v == 0 ? 1 : 0, v);
      for (Eigen::Index u = 0; u < 4; ++u)
        if (u != v) CHECK(m(u, v) == ref);
    }
  }
}

TEST_CASE("Smith") {
  const auto p = make_smith();
  CHECK(p.family() == ProtocolFamily::ImpartialPairwiseComparison);
  CHECK(p.rates(v2(1, 1), v2(0.5, 0.5)).cwiseAbs().maxCoeff() == 0.0);
  const RowMat r = p.rates(v2(0, 1), v2(0.5, 0.5));
  CHECK(r(0, 1) == 1.0);
  CHECK(r(1, 0) == 0.0);
  CHECK_THROWS_AS(p.rates(v2(0, 1), v3(0.2, 0.3, 0.5)), DimensionError);
  CHECK_THROWS_AS(p.rates(v2(std::nan(""), 1), v2(0.5, 0.5)), Error);
}

TEST_CASE("difference-based protocols are invariant under payoff shifts") {
  Rng rng(8, 0);
  for (const auto& p : {make_smith(), make_bnn(), make_pairwise_proportional_imitation()}) {
    for (int i = 0; i < 2000; ++i) {
      const std::size_t n = 2 + rng.next() % 4;
      const Vec F = dyadic(rng, n, 4.0);
      const Vec s = dyadic_simplex(rng, n);
      const double shift = static_cast<double>(static_cast<int>(rng.next() % 17) - 8);
      CHECK(p.rates(F, s) == p.rates((F.array() + shift).matrix(), s));
    }
  }
}

TEST_CASE("structural properties on random inputs") {
  Rng rng(12, 0);
  const auto dis = make_dissatisfaction(5.0);
  const std::vector<RevisionProtocol> all = {make_smith(), make_bnn(), make_pairwise_proportional_imitation(), dis};
  for (int i = 0; i < 25000; ++i) {
    const std::size_t n = 2 + rng.next() % 4;
    Vec F(static_cast<Eigen::Index>(n));
    for (auto& f : F) f = 4.0 * rng.uniform();
    Vec s = rng.simplex(n, 0.5 + rng.uniform());
    s[static_cast<Eigen::Index>(rng.next() % n)] = 0.0;
    const auto tie = static_cast<Eigen::Index>(rng.next() % n);
    const auto other = (tie + 1) % static_cast<Eigen::Index>(n);
    F[other] = F[tie];
    for (const auto& p : all) {
      const RowMat r = p.rates(F, s);
      CHECK(r.minCoeff() >= 0.0);
      CHECK(r.diagonal().cwiseAbs().maxCoeff() == 0.0);
      if (p.family() == ProtocolFamily::Imitative || p.family() == ProtocolFamily::ImitativeViaComparison)
        for (Eigen::Index v = 0; v < s.size(); ++v)
          if (s[v] == 0.0) CHECK(r.col(v).cwiseAbs().maxCoeff() == 0.0);
      if (p.family() == ProtocolFamily::ImitativeViaComparison || p.family() == ProtocolFamily::ImpartialPairwiseComparison) {
        CHECK(r(tie, other) == 0.0);
        CHECK(r(other, tie) == 0.0);
      }
    }
  }
}

TEST_CASE("revision-rate bound") {
  {
    const Game g = Game::create(example3_with_table(1.0));
    const auto rep = check_rate_bound(make_smith(), g, 0);
    CHECK(rep.holds);
    CHECK(rep.payoff_min >= 0.0);
    CHECK(rep.payoff_max <= 1.0);
    CHECK(rep.sampled_sup <= 1.0);
  }
  {
    const Example3 ex = build_example3();
    const auto rep = check_rate_bound(ex.protocol, ex.game, 0);
    CHECK(rep.holds);
    REQUIRE(rep.analytic_bound.has_value());
    CHECK(*rep.analytic_bound <= 1.0);
  }
  {
    GameSpec slow = example3_spec();
    slow.classes[0].revision_rate = 0.01;
    const Game g = Game::create(slow);
    const auto rep = check_rate_bound(make_dissatisfaction(2.0), g, 0);
    CHECK_FALSE(rep.holds);
    CHECK(rep.sampled_sup > 0.01);
    CHECK_NOTHROW(g.check(rep.witness, 1e-9));
    CHECK(!rep.message.empty());
  }
  {
    const Game g = Game::create(example3_with_table(1.0));
    const auto wild = make_custom("double-smith", [](const Vec& F, const Vec&, RowMat& out) {
      for (Eigen::Index u = 0; u < F.size(); ++u)
        for (Eigen::Index v = 0; v < F.size(); ++v)
          if (u != v) out(u, v) = 2.0 * std::max(0.0, F[v] - F[u]);
    });
    const auto rep = check_rate_bound(wild, g, 0, 500);
    CHECK_FALSE(rep.analytic_bound.has_value());
    CHECK_FALSE(rep.holds);
    CHECK(rep.samples >= 500);
  }
}

TEST_CASE("family axioms") {
  const auto smith = verify_family_axioms(make_smith(), 10000);
  CHECK(smith.get("pairwise-sign").claimed);
  CHECK(smith.get("pairwise-sign").holds());
  CHECK(smith.get("pairwise-sign").checked >= 10000);
  CHECK(smith.consistent());

  const auto dis = verify_family_axioms(make_dissatisfaction(2.0), 10000);
  CHECK_FALSE(dis.get("via-comparison-sign").claimed);
  CHECK_FALSE(dis.get("via-comparison-sign").holds());
  CHECK(!dis.get("via-comparison-sign").witness.empty());
  CHECK(dis.get("imitative-target").holds());
  CHECK(dis.consistent());

  const auto bnn = verify_family_axioms(make_bnn(), 10000);
  CHECK(bnn.get("acuteness").claimed);
  CHECK(bnn.get("acuteness").holds());
  CHECK(bnn.consistent());

  const auto ppi = verify_family_axioms(make_pairwise_proportional_imitation(), 10000);
  CHECK(ppi.get("via-comparison-sign").holds());
  CHECK(ppi.get("monotone-net-imitation").holds());
  CHECK(ppi.consistent());
}

TEST_CASE("protocol parsing and serialisation") {
  CHECK(parse_protocol("smith").name() == "smith");
  CHECK(parse_protocol("bnn").family() == ProtocolFamily::SeparableExcessPayoff);
  CHECK(parse_protocol("ppi").family() == ProtocolFamily::ImitativeViaComparison);
  CHECK(parse_protocol("dissatisfaction:3.5").level() == std::optional<double>(3.5));
  CHECK(parse_protocol("null").family() == ProtocolFamily::Null);
  CHECK_THROWS_AS(parse_protocol("replicator"), SpecError);
  CHECK_THROWS_AS(parse_protocol("dissatisfaction:abc"), SpecError);
  for (const auto& p : {make_smith(), make_bnn(), make_dissatisfaction(2.0).with_strict(true)}) {
    const auto q = parse_protocol(p.to_json());
    CHECK(q.name() == p.name());
    CHECK(q.family() == p.family());
    CHECK(q.level() == p.level());
    CHECK(q.strict() == p.strict());
  }
  CHECK_FALSE(make_custom("x", [](const Vec&, const Vec&, RowMat&) {}).serializable());
}

#include "mfgevo/revision.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "mfgevo/payoffs.h"

namespace mfgevo {

std::string family_tag(ProtocolFamily f) {
  switch (f) {
    case ProtocolFamily::Imitative: return "imitative";
    case ProtocolFamily::ImitativeViaComparison: return "imitative-via-comparison";
    case ProtocolFamily::ExcessPayoff: return "excess-payoff";
    case ProtocolFamily::SeparableExcessPayoff: return "separable-excess-payoff";
    case ProtocolFamily::PairwiseComparison: return "pairwise-comparison";
    case ProtocolFamily::ImpartialPairwiseComparison: return "impartial-pairwise-comparison";
    case ProtocolFamily::Null: return "null";
    case ProtocolFamily::Custom: return "custom";
  }
  return "custom";
}

RevisionProtocol::RevisionProtocol(std::string name, ProtocolFamily family, RateEvaluator fn,
                                   std::optional<double> level)
    : name_(std::move(name)), family_(family), fn_(std::move(fn)), level_(level) {}

RevisionProtocol RevisionProtocol::with_strict(bool strict) const {
  RevisionProtocol p = *this;
  p.strict_ = strict;
  return p;
}

void RevisionProtocol::rates_into(const Vec& F, const Vec& sigma, RowMat& out) const {
  if (F.size() != sigma.size())
    throw DimensionError("protocol '" + name_ + "': payoff vector has length " +
                         std::to_string(F.size()) + " but policy distribution has length " +
                         std::to_string(sigma.size()));
  if (!F.allFinite()) throw Error("protocol '" + name_ + "': non-finite payoff");
  if (!sigma.allFinite()) throw Error("protocol '" + name_ + "': non-finite policy distribution");
  const auto n = F.size();
  out.setZero(n, n);
  fn_(F, sigma, out);
  out.diagonal().setZero();
  if (!out.allFinite()) throw Error("protocol '" + name_ + "': non-finite switch rate");
  // Round-off can leave tiny negatives from custom evaluators; anything
  // else is a contract violation.
  if (n > 0 && out.minCoeff() < 0.0) {
    if (out.minCoeff() < -1e-12) throw Error("protocol '" + name_ + "': negative switch rate");
    out = out.cwiseMax(0.0);
  }
}

RowMat RevisionProtocol::rates(const Vec& F, const Vec& sigma) const {
  RowMat out;
  rates_into(F, sigma, out);
  return out;
}

std::string RevisionProtocol::to_json() const {
  if (!serializable()) throw SpecError("custom protocol '" + name_ + "' cannot be serialized");
  nlohmann::json j;
  j["family"] = name_;
  j["params"] = nlohmann::json::object();
  if (level_) j["params"]["K"] = *level_;
  j["strict"] = strict_;
  return j.dump();
}

RevisionProtocol make_dissatisfaction(double K) {
  if (!std::isfinite(K)) throw SpecError("dissatisfaction level K must be finite");
  auto fn = [K](const Vec& F, const Vec& sigma, RowMat& out) {
    const double m = sigma.sum();
    if (!(m > 0.0)) return;
    for (Eigen::Index u = 0; u < F.size(); ++u) {
      const double r = K - F[u];
      if (r < 0.0) {
        std::ostringstream os;
        os << "dissatisfaction level K = " << K << " is below the payoff " << F[u]
           << " of policy " << u + 1;
        throw AssumptionError(os.str());
      }
      out.row(u) = (r / m) * sigma.transpose();
    }
  };
  return RevisionProtocol("dissatisfaction", ProtocolFamily::Imitative, fn, K);
}

RevisionProtocol make_pairwise_proportional_imitation() {
  auto fn = [](const Vec& F, const Vec& sigma, RowMat& out) {
    const double m = sigma.sum();
    if (!(m > 0.0)) return;
    for (Eigen::Index u = 0; u < F.size(); ++u)
      for (Eigen::Index v = 0; v < F.size(); ++v)
        out(u, v) = std::max(0.0, F[v] - F[u]) * sigma[v] / m;
  };
  return RevisionProtocol("pairwise-proportional-imitation", ProtocolFamily::ImitativeViaComparison, fn);
}

RevisionProtocol make_bnn() {
  auto fn = [](const Vec& F, const Vec& sigma, RowMat& out) {
    const double m = sigma.sum();
    if (!(m > 0.0)) return;
    const double mean = F.dot(sigma) / m;
    for (Eigen::Index v = 0; v < F.size(); ++v) out.col(v).setConstant(std::max(0.0, F[v] - mean));
  };
  return RevisionProtocol("bnn", ProtocolFamily::SeparableExcessPayoff, fn);
}

RevisionProtocol make_smith() {
  auto fn = [](const Vec& F, const Vec&, RowMat& out) {
    for (Eigen::Index u = 0; u < F.size(); ++u)
      for (Eigen::Index v = 0; v < F.size(); ++v) out(u, v) = std::max(0.0, F[v] - F[u]);
  };
  return RevisionProtocol("smith", ProtocolFamily::ImpartialPairwiseComparison, fn);
}

RevisionProtocol make_null() {
  return RevisionProtocol("null", ProtocolFamily::Null, [](const Vec&, const Vec&, RowMat&) {});
}

RevisionProtocol make_custom(std::string name, RateEvaluator fn) {
  return RevisionProtocol(std::move(name), ProtocolFamily::Custom, std::move(fn));
}

namespace {

RevisionProtocol protocol_from_name(std::string name, std::optional<double> K) {
  std::transform(name.begin(), name.end(), name.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (name == "smith") return make_smith();
  if (name == "bnn" || name == "brown-von-neumann-nash") return make_bnn();
  if (name == "ppi" || name == "pairwise-proportional-imitation") return make_pairwise_proportional_imitation();
  if (name == "null" || name == "none" || name == "zero") return make_null();
  if (name == "dissatisfaction") {
    if (!K) throw SpecError("protocol 'dissatisfaction' needs the parameter K");
    return make_dissatisfaction(*K);
  }
  throw SpecError("unknown revision protocol '" + name + "'");
}

RevisionProtocol protocol_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw SpecError("protocol config must be a JSON object");
  if (!j.contains("family") || !j["family"].is_string())
    throw SpecError("protocol config needs a string field 'family'");
  std::optional<double> K;
  if (j.contains("params")) {
    const auto& p = j["params"];
    if (!p.is_object()) throw SpecError("protocol 'params' must be an object");
    if (p.contains("K")) {
      if (!p["K"].is_number()) throw SpecError("protocol parameter K must be a number");
      K = p["K"].get<double>();
    }
  }
  RevisionProtocol out = protocol_from_name(j["family"].get<std::string>(), K);
  if (j.contains("strict")) {
    if (!j["strict"].is_boolean()) throw SpecError("protocol field 'strict' must be a boolean");
    out = out.with_strict(j["strict"].get<bool>());
  }
  return out;
}

}  // namespace

RevisionProtocol parse_protocol(const std::string& text) {
  auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    try {
      return protocol_from_json(nlohmann::json::parse(text));
    } catch (const nlohmann::json::exception& e) {
      throw SpecError(std::string("protocol config: ") + e.what());
    }
  }
  std::error_code ec;
  if (text.find(".json") != std::string::npos || std::filesystem::is_regular_file(text, ec)) {
    std::ifstream in(text);
    if (!in) throw SpecError("cannot open protocol config '" + text + "'");
    try {
      return protocol_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
      throw SpecError("protocol config '" + text + "': " + e.what());
    }
  }
  const auto colon = text.find(':');
  if (colon == std::string::npos) return protocol_from_name(text, std::nullopt);
  double K = 0.0;
  try {
    std::size_t used = 0;
    K = std::stod(text.substr(colon + 1), &used);
    if (used != text.size() - colon - 1) throw std::invalid_argument("trailing characters");
  } catch (const std::exception&) {
    throw SpecError("cannot parse protocol parameter in '" + text + "'");
  }
  return protocol_from_name(text.substr(0, colon), K);
}

ProtocolSet uniform_protocols(const Game& game, const RevisionProtocol& p) {
  return ProtocolSet(game.num_classes(), p);
}

// ---------------------------------------------------------------------------
// Revision rates against the revision clock

namespace {

StatePolicyDist random_state_policy(const Game& game, Rng& rng) {
  StatePolicyDist mu = game.zero_state_policy();
  const double mode = rng.uniform();
  for (std::size_t c = 0; c < game.num_classes(); ++c) {
    auto& b = mu.classes[c];
    const double m = game.cls(c).mass;
    if (mode < 0.5) {
      Vec w = rng.simplex(static_cast<std::size_t>(b.size()), m);
      for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = w[i];
    } else {
      // stationary lift of a random (possibly sparse) marginal
      Vec x = rng.simplex(game.num_policies(c), m);
      if (mode > 0.8) {
        x.setZero();
        x[static_cast<Eigen::Index>(rng.next() % game.num_policies(c))] = m;
      }
      for (std::size_t u = 0; u < game.num_policies(c); ++u)
        b.col(static_cast<Eigen::Index>(u)) = x[static_cast<Eigen::Index>(u)] * game.stationary(c, u).eta;
    }
  }
  return mu;
}

bool exact_reward_range(const ClassSpec& k, double& lo, double& hi) {
  lo = std::numeric_limits<double>::infinity();
  hi = -lo;
  StateActionDist dummy;
  if (auto* cr = dynamic_cast<const ConstantReward*>(k.reward.get())) {
    lo = hi = cr->constant();
    return true;
  }
  if (auto* tr = dynamic_cast<const TabularReward*>(k.reward.get())) {
    for (std::size_t s = 0; s < k.num_states(); ++s)
      for (std::size_t a : k.admissible[s]) {
        lo = std::min(lo, tr->table()(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a)));
        hi = std::max(hi, tr->table()(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a)));
      }
    return true;
  }
  return false;
}

}  // namespace

RateBoundReport check_rate_bound(const RevisionProtocol& protocol, const Game& game,
                                    std::size_t cls, std::size_t samples, std::uint64_t seed) {
  if (cls >= game.num_classes()) throw DimensionError("class index out of range");
  RateBoundReport rep;
  rep.cls = cls;
  rep.revision_rate = game.cls(cls).revision_rate;
  rep.samples = samples;
  const auto n = static_cast<double>(game.num_policies(cls));

  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  rep.payoff_range_exact = exact_reward_range(game.cls(cls), lo, hi);

  Rng rng(seed, 0xA3);
  bool evaluator_failed = false;
  std::string failure;
  rep.sampled_sup = -1.0;
  for (std::size_t i = 0; i < samples; ++i) {
    StatePolicyDist mu = random_state_policy(game, rng);
    const PayoffVector F = payoff_map(game, mu);
    const Vec& f = F.classes[cls];
    if (!rep.payoff_range_exact) {
      lo = std::min(lo, f.minCoeff());
      hi = std::max(hi, f.maxCoeff());
    }
    const Vec sigma = mu.classes[cls].colwise().sum().transpose();
    double row_max = 0.0;
    try {
      const RowMat rho = protocol.rates(f, sigma);
      row_max = rho.rowwise().sum().maxCoeff();
    } catch (const Error& e) {
      if (!evaluator_failed) failure = e.what();
      evaluator_failed = true;
      continue;
    }
    if (row_max > rep.sampled_sup) {
      rep.sampled_sup = row_max;
      rep.witness = mu;
    }
  }
  rep.sampled_sup = std::max(rep.sampled_sup, 0.0);
  rep.payoff_min = lo;
  rep.payoff_max = hi;
  const double range = std::max(0.0, hi - lo);

  switch (protocol.family()) {
    case ProtocolFamily::Imitative:
      if (protocol.level()) rep.analytic_bound = std::max(0.0, *protocol.level() - lo);
      break;
    case ProtocolFamily::ImitativeViaComparison:
      rep.analytic_bound = range;
      break;
    case ProtocolFamily::SeparableExcessPayoff:
    case ProtocolFamily::ImpartialPairwiseComparison:
      rep.analytic_bound = (n - 1.0) * range;
      break;
    case ProtocolFamily::Null:
      rep.analytic_bound = 0.0;
      break;
    default:
      break;
  }

  std::ostringstream os;
  const double lr = rep.revision_rate;
  if (evaluator_failed) {
    rep.holds = false;
    os << "protocol evaluation failed on sampled distributions: " << failure;
  } else if (rep.analytic_bound) {
    rep.holds = *rep.analytic_bound <= lr * (1.0 + 1e-12);
    os << "analytic row-sum bound " << *rep.analytic_bound << (rep.holds ? " <= " : " > ")
       << "lambda_r = " << lr << " (payoff range [" << lo << ", " << hi << "]"
       << (rep.payoff_range_exact ? ", exact" : ", sampled") << "); sampled sup " << rep.sampled_sup;
  } else {
    rep.holds = rep.sampled_sup <= lr * (1.0 + 1e-12);
    os << "sampled row-sum sup " << rep.sampled_sup << (rep.holds ? " <= " : " > ")
       << "lambda_r = " << lr << " over " << samples << " samples";
  }
  rep.message = os.str();
  return rep;
}

// ---------------------------------------------------------------------------
// Family axioms

const AxiomResult& AxiomReport::get(const std::string& axiom) const {
  for (const auto& r : results)
    if (r.axiom == axiom) return r;
  throw Error("unknown axiom '" + axiom + "'");
}

bool AxiomReport::consistent() const {
  for (const auto& r : results)
    if (r.claimed && !r.holds()) return false;
  return true;
}

namespace {

std::string describe(const Vec& F, const Vec& sigma) {
  std::ostringstream os;
  os << "F = (";
  for (Eigen::Index i = 0; i < F.size(); ++i) os << (i ? ", " : "") << F[i];
  os << "), sigma = (";
  for (Eigen::Index i = 0; i < sigma.size(); ++i) os << (i ? ", " : "") << sigma[i];
  os << ")";
  return os.str();
}

void record(AxiomResult& r, bool ok, const Vec& F, const Vec& sigma, const std::string& detail) {
  ++r.checked;
  if (ok) return;
  if (r.violations++ == 0) r.witness = describe(F, sigma) + ": " + detail;
}

int sgn(double x, double tol) { return x > tol ? 1 : (x < -tol ? -1 : 0); }

}  // namespace

AxiomReport verify_family_axioms(const RevisionProtocol& protocol, std::size_t samples,
                                 std::uint64_t seed) {
  const ProtocolFamily fam = protocol.family();
  const bool imitative = fam == ProtocolFamily::Imitative || fam == ProtocolFamily::ImitativeViaComparison;
  const bool excess = fam == ProtocolFamily::ExcessPayoff || fam == ProtocolFamily::SeparableExcessPayoff;
  const bool pairwise =
      fam == ProtocolFamily::PairwiseComparison || fam == ProtocolFamily::ImpartialPairwiseComparison;

  AxiomReport rep;
  rep.protocol = protocol.name();
  AxiomResult nonneg{"nonnegativity", true, 0, 0, {}};
  AxiomResult target{"imitative-target", imitative, 0, 0, {}};
  AxiomResult monotone{"monotone-net-imitation", imitative, 0, 0, {}};
  AxiomResult via{"via-comparison-sign", fam == ProtocolFamily::ImitativeViaComparison, 0, 0, {}};
  AxiomResult acute{"acuteness", excess, 0, 0, {}};
  AxiomResult pair{"pairwise-sign", pairwise, 0, 0, {}};

  constexpr double tol = 1e-12;
  Rng rng(seed, 0xA7);
  for (std::size_t i = 0; i < samples; ++i) {
    const auto n = static_cast<Eigen::Index>(2 + rng.next() % 4);
    const double m = 0.1 + 0.9 * rng.uniform();
    // Half of the samples draw payoffs from a coarse grid so ties occur.
    Vec F(n);
    const bool coarse = rng.uniform() < 0.5;
    for (Eigen::Index k = 0; k < n; ++k)
      F[k] = coarse ? static_cast<double>(rng.next() % 3) * 0.5 : 2.0 * rng.uniform() - 1.0;
    Vec sigma = rng.simplex(static_cast<std::size_t>(n), m);
    const bool sparse = rng.uniform() < 0.3;
    if (sparse) {
      sigma[static_cast<Eigen::Index>(rng.next() % static_cast<std::uint64_t>(n))] = 0.0;
      if (sigma.sum() > 0.0) sigma *= m / sigma.sum();
    }
    RowMat rho;
    try {
      rho = protocol.rates(F, sigma);
    } catch (const Error&) {
      ++rep.skipped;
      continue;
    }
    record(nonneg, rho.minCoeff() >= 0.0, F, sigma, "negative rate");

    for (Eigen::Index v = 0; v < n; ++v)
      if (sigma[v] == 0.0)
        for (Eigen::Index u = 0; u < n; ++u)
          if (u != v) record(target, rho(u, v) == 0.0, F, sigma, "positive rate toward an unused policy");

    if (!sparse && sigma.minCoeff() > 0.0) {
      // Conditional imitation rates r_uv = rho_uv m / sigma_v.
      RowMat r(n, n);
      for (Eigen::Index u = 0; u < n; ++u)
        for (Eigen::Index v = 0; v < n; ++v) r(u, v) = u == v ? 0.0 : rho(u, v) * m / sigma[v];
      for (Eigen::Index u = 0; u < n; ++u)
        for (Eigen::Index v = 0; v < n; ++v) {
          if (u == v) continue;
          bool ok = true;
          for (Eigen::Index k = 0; k < n && ok; ++k) {
            const double lhs = r(k, v) - r(v, k), rhs = r(k, u) - r(u, k);
            ok = (F[v] >= F[u]) == (lhs >= rhs - 1e-12);
          }
          record(monotone, ok, F, sigma, "net imitation not ordered like payoffs");
          const bool vs = sgn(r(u, v), tol) == sgn(std::max(0.0, F[v] - F[u]), 0.0);
          record(via, vs, F, sigma,
                 "r_" + std::to_string(u + 1) + std::to_string(v + 1) + " has the wrong sign");
        }
    }

    {
      const Vec Fhat = F.array() - F.dot(sigma) / sigma.sum();
      if (Fhat.maxCoeff() > 1e-9) {
        Vec tau(n);
        for (Eigen::Index v = 0; v < n; ++v) tau[v] = rho((v + 1) % n, v);
        record(acute, tau.dot(Fhat) > 0.0, F, sigma, "tau^T Fhat <= 0 with a positive excess payoff");
      }
    }

    for (Eigen::Index u = 0; u < n; ++u)
      for (Eigen::Index v = 0; v < n; ++v)
        if (u != v)
          record(pair, sgn(rho(u, v), tol) == sgn(std::max(0.0, F[v] - F[u]), 0.0), F, sigma,
                 "rho_" + std::to_string(u + 1) + std::to_string(v + 1) + " has the wrong sign");
  }
  rep.results = {nonneg, target, monotone, via, acute, pair};
  return rep;
}

}  // namespace mfgevo

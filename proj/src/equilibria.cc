#include "mfgevo/equilibria.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

namespace mfgevo {

double EquilibriumCertificate::max_gap() const {
  double g = 0.0;
  for (double v : gap) g = std::max(g, v);
  return g;
}

double EquilibriumCertificate::max_conditional_deviation() const {
  double g = 0.0;
  for (double v : conditional_deviation) g = std::max(g, v);
  return g;
}

const ProtocolResidual& EquilibriumCertificate::field(const std::string& protocol) const {
  for (const auto& f : fields)
    if (f.protocol == protocol) return f;
  throw Error("certificate has no field residual for protocol '" + protocol + "'");
}

bool EquilibriumCertificate::is_rest_point(const std::string& protocol) const {
  return field(protocol).rest_point;
}

std::string EquilibriumCertificate::to_json() const {
  nlohmann::json j;
  j["is_msne"] = is_msne;
  j["tol"] = tol;
  j["gap"] = gap;
  j["conditional_deviation"] = conditional_deviation;
  j["stationarity_residual"] = stationarity_residual;
  auto fj = nlohmann::json::array();
  for (const auto& f : fields)
    fj.push_back({{"protocol", f.protocol}, {"residual", f.residual}, {"rest_point", f.rest_point}});
  j["fields"] = fj;
  auto mj = nlohmann::json::array();
  auto pj = nlohmann::json::array();
  auto dj = nlohmann::json::array();
  for (std::size_t c = 0; c < marginal.classes.size(); ++c) {
    mj.push_back(std::vector<double>(marginal.classes[c].data(),
                                     marginal.classes[c].data() + marginal.classes[c].size()));
    pj.push_back(std::vector<double>(payoffs.classes[c].data(),
                                     payoffs.classes[c].data() + payoffs.classes[c].size()));
    const auto& b = mu.classes[c];
    auto rows = nlohmann::json::array();
    for (Eigen::Index s = 0; s < b.rows(); ++s) {
      std::vector<double> row(static_cast<std::size_t>(b.cols()));
      for (Eigen::Index u = 0; u < b.cols(); ++u) row[static_cast<std::size_t>(u)] = b(s, u);
      rows.push_back(row);
    }
    dj.push_back(rows);
  }
  j["marginal"] = mj;
  j["payoffs"] = pj;
  j["distribution"] = dj;
  return j.dump(2);
}

EquilibriumCertificate verify_msne(const Game& game, const StatePolicyDist& mu, double tol,
                                   const std::vector<RevisionProtocol>& protocols) {
  game.check(mu, kIntegratedMassTolerance);
  EquilibriumCertificate cert;
  cert.mu = mu;
  cert.tol = tol;
  cert.marginal = marginal_policy(mu);
  cert.payoffs = payoff_map(game, mu);
  cert.stationarity_residual = max_abs(dynamic_flow(game, mu));
  bool ok = true;
  for (std::size_t c = 0; c < game.num_classes(); ++c) {
    const Vec& F = cert.payoffs.classes[c];
    const Vec& x = cert.marginal.classes[c];
    const double best = F.maxCoeff();
    double worst_supported = best;
    double dev = 0.0;
    for (Eigen::Index u = 0; u < F.size(); ++u) {
      if (x[u] <= kSupportThreshold) continue;
      worst_supported = std::min(worst_supported, F[u]);
      const Vec cond = mu.classes[c].col(u) / x[u];
      dev = std::max(dev, (cond - game.stationary(c, static_cast<std::size_t>(u)).eta).cwiseAbs().maxCoeff());
    }
    cert.gap.push_back(best - worst_supported);
    cert.conditional_deviation.push_back(dev);
    ok = ok && cert.gap.back() <= tol && dev <= tol;
  }
  cert.is_msne = ok;
  for (const auto& p : protocols) {
    ProtocolResidual r;
    r.protocol = p.name();
    Field total = dynamic_flow(game, mu);
    axpy(total, 1.0, revision_flow(game, mu, uniform_protocols(game, p), cert.payoffs));
    r.residual = max_abs(total);
    r.rest_point = r.residual <= tol;
    cert.fields.push_back(r);
  }
  return cert;
}

EquilibriumCertificate verify_ne_steady_state(const Game& game, const MarginalPolicyDist& x, double tol,
                                              const std::vector<RevisionProtocol>& protocols) {
  game.check(x, kIntegratedMassTolerance);
  return verify_msne(game, stationary_lift(game, x), tol, protocols);
}

StatePolicyDist random_interior(const Game& game, Rng& rng) {
  StatePolicyDist mu = game.zero_state_policy();
  for (std::size_t c = 0; c < game.num_classes(); ++c) {
    auto& b = mu.classes[c];
    const Vec w = rng.simplex(static_cast<std::size_t>(b.size()), game.cls(c).mass);
    for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = w[i];
  }
  return mu;
}

namespace {

// Zero out policies whose mass is negligible and whose payoff is strictly
// below the best one, then replace every column by its stationary law.
StatePolicyDist polish(const Game& game, const StatePolicyDist& mu, double mass_tol, double gap_tol) {
  const PayoffVector F = payoff_map(game, mu);
  MarginalPolicyDist x = marginal_policy(mu);
  for (std::size_t c = 0; c < game.num_classes(); ++c) {
    Vec& xc = x.classes[c];
    const Vec& f = F.classes[c];
    const double best = f.maxCoeff();
    const double m = game.cls(c).mass;
    for (Eigen::Index u = 0; u < xc.size(); ++u)
      if (xc[u] < mass_tol * m && f[u] < best - gap_tol) xc[u] = 0.0;
    xc = xc.cwiseMax(0.0);
    xc *= m / xc.sum();
  }
  return stationary_lift(game, x);
}

}  // namespace

SolveResult solve_msne_by_dynamics(const Game& game, const RevisionProtocol& protocol,
                                   const SolveOptions& opts) {
  SolveResult result;
  result.protocol = protocol.name();
  const ProtocolSet ps = uniform_protocols(game, protocol);
  result.starts.resize(opts.multistart);

  parallel_for(opts.multistart, [&](std::size_t i) {
    StartOutcome& out = result.starts[i];
    out.index = i;
    Rng rng(opts.seed, 0x5000 + i);
    out.start = i == 0 ? uniform_state_policy(game) : random_interior(game, rng);

    RestOptions ro;
    ro.tol = opts.rest_tol;
    ro.max_time = opts.max_time;
    ro.step = opts.step;
    ro.prune = true;
    RestResult rest = find_rest_point(game, out.start, ps, ro);
    out.converged = rest.converged;
    out.residual = rest.residual;
    out.time = rest.time;
    out.pruned = rest.pruned;
    if (!rest.converged) return;

    out.raw = verify_msne(game, rest.mu, opts.certify_tol, {protocol});
    if (out.raw->is_msne) {
      out.certified = true;
      return;
    }
    StatePolicyDist clean = polish(game, rest.mu, 1e-4, opts.certify_tol);
    out.polished = verify_msne(game, clean, opts.certify_tol, {protocol});
    const bool rest_ok = out.polished->fields.front().residual <= opts.certify_tol;
    out.certified = out.polished->is_msne && rest_ok;
    if (!out.certified) {
      std::ostringstream os;
      os << "start " << i << ": rest point (residual " << rest.residual
         << ") is not an MSNE: gap " << out.raw->max_gap() << ", conditional deviation "
         << out.raw->max_conditional_deviation() << "; after polishing gap " << out.polished->max_gap()
         << ", field residual " << out.polished->fields.front().residual;
      out.defect = os.str();
    }
  });

  const ProtocolFamily fam = protocol.family();
  const bool rest_implies_msne = fam == ProtocolFamily::ExcessPayoff || fam == ProtocolFamily::SeparableExcessPayoff ||
                                 fam == ProtocolFamily::PairwiseComparison ||
                                 fam == ProtocolFamily::ImpartialPairwiseComparison;
  for (const auto& s : result.starts) {
    if (!s.converged) {
      ++result.nonconverged;
      continue;
    }
    if (!s.certified) {
      if (rest_implies_msne)
        result.defects.push_back(s.defect);
      else
        result.non_msne_rest_points.push_back(s.defect);
      continue;
    }
    const EquilibriumCertificate& cert = s.raw->is_msne ? *s.raw : *s.polished;
    bool seen = false;
    for (const auto& e : result.equilibria)
      if (max_abs_diff(e.mu.classes, cert.mu.classes) < opts.dedupe_tol) seen = true;
    if (!seen) result.equilibria.push_back(cert);
  }
  return result;
}

}  // namespace mfgevo

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mfgevo/equilibria.h"

namespace mfgevo {

std::shared_ptr<const ResourceModel> congestion_model(const Game& game) {
  std::shared_ptr<const ResourceModel> model;
  for (std::size_t c = 0; c < game.num_classes(); ++c) {
    auto* cr = dynamic_cast<const CongestionReward*>(game.cls(c).reward.get());
    if (!cr) return nullptr;
    if (model && model != cr->model()) return nullptr;
    model = cr->model();
  }
  return model;
}

namespace {

void require_congestion(const Game& game, const ResourceModel& model) {
  for (std::size_t c = 0; c < game.num_classes(); ++c)
    if (!dynamic_cast<const CongestionReward*>(game.cls(c).reward.get()))
      throw Error("class '" + game.cls(c).name + "' does not have a congestion reward");
  model.check(game.num_classes());
}

std::vector<double> flows_of(const Game& game, const ResourceModel& model, const MarginalPolicyDist& x) {
  std::vector<double> sigma(model.resources.size(), 0.0);
  for (std::size_t c = 0; c < game.num_classes(); ++c)
    for (std::size_t u = 0; u < game.num_policies(c); ++u) {
      const double w = x.classes[c][static_cast<Eigen::Index>(u)];
      if (w == 0.0) continue;
      const auto& eta = game.stationary(c, u).eta;
      const auto& act = game.policy(c, u).action;
      for (std::size_t s = 0; s < act.size(); ++s)
        for (std::size_t r : model.usage[c][act[s]]) sigma[r] += model.rate * eta[static_cast<Eigen::Index>(s)] * w;
    }
  return sigma;
}

}  // namespace

std::vector<double> steady_state_flows(const Game& game, const ResourceModel& model,
                                       const MarginalPolicyDist& x) {
  require_congestion(game, model);
  return flows_of(game, model, x);
}

double potential_value(const Game& game, const ResourceModel& model, const MarginalPolicyDist& x) {
  require_congestion(game, model);
  const auto sigma = flows_of(game, model, x);
  double u = 0.0;
  for (std::size_t r = 0; r < sigma.size(); ++r) u += model.reward[r].integral(sigma[r]);
  return u / model.rate;
}

PotentialCheck check_full_potential(const Game& game, const ResourceModel& model, std::size_t samples,
                                    std::uint64_t seed, double rel_tol, double fd_step) {
  require_congestion(game, model);
  PotentialCheck out;
  Rng rng(seed, 0xC0);
  for (std::size_t i = 0; i < samples; ++i) {
    MarginalPolicyDist x = game.zero_marginal();
    for (std::size_t c = 0; c < game.num_classes(); ++c)
      x.classes[c] = rng.simplex(game.num_policies(c), game.cls(c).mass);
    const PayoffVector F = steady_state_payoff(game, x);
    const double scale = std::max(F.max_abs(), 1e-12);
    double worst = 0.0;
    for (std::size_t c = 0; c < game.num_classes(); ++c)
      for (Eigen::Index u = 0; u < x.classes[c].size(); ++u) {
        MarginalPolicyDist hi = x, lo = x;
        hi.classes[c][u] += fd_step;
        lo.classes[c][u] -= fd_step;
        const double fd = (potential_value(game, model, hi) - potential_value(game, model, lo)) / (2.0 * fd_step);
        const double f = F.classes[c][u];
        worst = std::max(worst, std::abs(fd - f) / std::max(std::abs(f), scale));
      }
    ++out.points;
    if (worst > rel_tol) ++out.failures;
    if (worst >= out.max_rel_error) {
      out.max_rel_error = worst;
      out.worst = x;
    }
  }
  return out;
}

Vec project_simplex(const Vec& v, double total) {
  const auto n = v.size();
  if (n == 0) return v;
  std::vector<double> s(v.data(), v.data() + n);
  std::sort(s.begin(), s.end(), std::greater<double>());
  double cum = 0.0, theta = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    cum += s[static_cast<std::size_t>(k)];
    const double t = (cum - total) / static_cast<double>(k + 1);
    if (s[static_cast<std::size_t>(k)] - t > 0.0) theta = t;
  }
  return (v.array() - theta).cwiseMax(0.0);
}

CongestionResult solve_congestion_equilibrium(const Game& game, const ResourceModel& model,
                                              const CongestionOptions& opts) {
  require_congestion(game, model);
  CongestionResult result;
  struct Run {
    MarginalPolicyDist x;
    double potential = 0.0;
    bool converged = false;
  };
  std::vector<Run> runs(std::max<std::size_t>(opts.multistart, 1));

  auto project = [&](MarginalPolicyDist& x) {
    for (std::size_t c = 0; c < game.num_classes(); ++c)
      x.classes[c] = project_simplex(x.classes[c], game.cls(c).mass);
  };
  // The simplex projection ignores constant shifts, so the gradient is
  // centred per class first; x + a g then keeps full precision near the optimum.
  auto step_to = [&](const MarginalPolicyDist& x, const PayoffVector& g, double a) {
    MarginalPolicyDist y = x;
    for (std::size_t c = 0; c < game.num_classes(); ++c)
      y.classes[c] += a * (g.classes[c].array() - g.classes[c].mean()).matrix();
    project(y);
    return y;
  };
  auto dot_diff = [&](const PayoffVector& g, const MarginalPolicyDist& y, const MarginalPolicyDist& x) {
    double d = 0.0;
    for (std::size_t c = 0; c < game.num_classes(); ++c)
      d += (g.classes[c].array() - g.classes[c].mean()).matrix().dot(y.classes[c] - x.classes[c]);
    return d;
  };
  auto dist = [&](const MarginalPolicyDist& y, const MarginalPolicyDist& x) {
    double d = 0.0;
    for (std::size_t c = 0; c < game.num_classes(); ++c)
      d = std::max(d, (y.classes[c] - x.classes[c]).cwiseAbs().maxCoeff());
    return d;
  };

  bool concave = true;
  for (const auto& w : model.reward) concave = concave && w.slope <= 0.0;

  parallel_for(runs.size(), [&](std::size_t i) {
    Rng rng(opts.seed, 0xD000 + i);
    MarginalPolicyDist x = game.zero_marginal();
    for (std::size_t c = 0; c < game.num_classes(); ++c)
      x.classes[c] = rng.simplex(game.num_policies(c), game.cls(c).mass);
    double a = 1.0;
    double U = potential_value(game, model, x);
    for (std::size_t it = 0; it < opts.max_iter; ++it) {
      // The steady-state payoff is the gradient of U.
      const PayoffVector g = steady_state_payoff(game, x);
      // Stationarity measure with a unit step.
      if (dist(step_to(x, g, 1.0), x) < opts.stationarity_tol) {
        runs[i].converged = true;
        break;
      }
      a = std::min(a * 2.0, 1e6);
      MarginalPolicyDist y;
      double Uy = 0.0;
      while (true) {
        y = step_to(x, g, a);
        Uy = potential_value(game, model, y);
        const double ascent = dot_diff(g, y, x);
        bool accept;
        if (concave) {
          // Concavity turns the Armijo condition into a slope test at y,
          // which stays accurate when U itself no longer changes in floating point.
          accept = dot_diff(steady_state_payoff(game, y), y, x) >= 1e-4 * ascent;
        } else {
          accept = Uy >= U + 1e-4 * ascent;
        }
        if (accept || a < 1e-14) break;
        a *= 0.5;
      }
      if (dist(y, x) == 0.0) {
        runs[i].converged = true;
        break;
      }
      x = std::move(y);
      U = Uy;
    }
    runs[i].x = std::move(x);
    runs[i].potential = U;
  });

  std::size_t best = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    result.start_flows.push_back(flows_of(game, model, runs[i].x));
    result.converged = result.converged && runs[i].converged;
    if (runs[i].potential > runs[best].potential) best = i;
  }
  for (std::size_t r = 0; r < model.resources.size(); ++r) {
    double lo = result.start_flows[0][r], hi = lo;
    for (const auto& f : result.start_flows) {
      lo = std::min(lo, f[r]);
      hi = std::max(hi, f[r]);
    }
    result.flow_spread = std::max(result.flow_spread, hi - lo);
  }
  result.x = runs[best].x;
  result.flows = result.start_flows[best];
  result.potential = runs[best].potential;
  result.certificate = verify_ne_steady_state(game, result.x, opts.certify_tol);
  return result;
}

}  // namespace mfgevo

#include "mfgevo/mean_dynamic.h"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mfgevo {

Field dynamic_flow(const Game& game, const StatePolicyDist& mu) {
  if (mu.classes.size() != game.num_classes())
    throw DimensionError("state-policy distribution has the wrong number of classes");
  Field f = zeros_like(mu.classes);
  for (std::size_t c = 0; c < game.num_classes(); ++c) {
    const double ld = game.cls(c).action_rate;
    const auto& block = mu.classes[c];
    if (block.rows() != static_cast<Eigen::Index>(game.num_states(c)) ||
        block.cols() != static_cast<Eigen::Index>(game.num_policies(c)))
      throw DimensionError("state-policy block shape does not match the game");
    for (std::size_t u = 0; u < game.num_policies(c); ++u) {
      const auto col = block.col(static_cast<Eigen::Index>(u));
      f[c].col(static_cast<Eigen::Index>(u)) = ld * (game.kernel(c, u) * col - col);
    }
  }
  return f;
}

Field revision_flow(const Game& game, const StatePolicyDist& mu, const ProtocolSet& protocols,
                    const PayoffVector& F) {
  if (protocols.size() != game.num_classes())
    throw DimensionError("one revision protocol per class is required");
  Field f = zeros_like(mu.classes);
  RowMat rho;
  for (std::size_t c = 0; c < game.num_classes(); ++c) {
    const auto& block = mu.classes[c];
    const Vec sigma = block.colwise().sum().transpose();
    protocols[c].rates_into(F.classes[c], sigma, rho);
    const Vec out_rate = rho.rowwise().sum();
    f[c].noalias() = block * rho;
    f[c].array() -= block.array().rowwise() * out_rate.transpose().array();
  }
  return f;
}

Field revision_flow(const Game& game, const StatePolicyDist& mu, const ProtocolSet& protocols) {
  return revision_flow(game, mu, protocols, payoff_map(game, mu));
}

FlowField vector_field(const Game& game, const StatePolicyDist& mu, const ProtocolSet& protocols) {
  FlowField out;
  out.payoffs = payoff_map(game, mu);
  out.dynamic = dynamic_flow(game, mu);
  out.revision = revision_flow(game, mu, protocols, out.payoffs);
  out.total = out.dynamic;
  axpy(out.total, 1.0, out.revision);
  return out;
}

std::string method_name(Method m) { return m == Method::RK4 ? "rk4" : "euler"; }

double default_step(const Game& game) { return 0.01 / game.max_rate(); }

namespace {

void check_payoffs(const PayoffVector& F, double t) {
  for (std::size_t c = 0; c < F.classes.size(); ++c)
    for (Eigen::Index u = 0; u < F.classes[c].size(); ++u)
      if (!std::isfinite(F.classes[c][u])) {
        std::ostringstream os;
        os << "non-finite payoff " << F.classes[c][u] << " for class " << c << ", policy " << u + 1
           << " at t = " << t;
        throw IntegrationError(os.str(), t);
      }
}

// V(mu), translating evaluation failures into IntegrationError at time t.
Field field_at(const Game& game, const StatePolicyDist& mu, const ProtocolSet& protocols, double t,
               PayoffVector* payoffs) {
  try {
    PayoffVector F = payoff_map(game, mu);
    check_payoffs(F, t);
    Field total = dynamic_flow(game, mu);
    axpy(total, 1.0, revision_flow(game, mu, protocols, F));
    for (const auto& b : total)
      if (!b.allFinite()) throw IntegrationError("non-finite vector field at t = " + std::to_string(t), t);
    if (payoffs) *payoffs = std::move(F);
    return total;
  } catch (const IntegrationError&) {
    throw;
  } catch (const Error& e) {
    std::ostringstream os;
    os << "field evaluation failed at t = " << t << ": " << e.what();
    throw IntegrationError(os.str(), t);
  }
}

StatePolicyDist shifted(const StatePolicyDist& y, double h, const Field& k) {
  StatePolicyDist out = y;
  axpy(out.classes, h, k);
  return out;
}

}  // namespace

TrajectoryRecord integrate(const Game& game, const StatePolicyDist& mu0, const ProtocolSet& protocols,
                           const IntegrateOptions& opts) {
  if (!(opts.horizon >= 0.0) || !std::isfinite(opts.horizon))
    throw Error("integration horizon must be a nonnegative finite number");
  if (opts.step < 0.0) throw Error("integration step must be positive");
  if (protocols.size() != game.num_classes())
    throw DimensionError("one revision protocol per class is required");
  game.check(mu0, kIntegratedMassTolerance);

  TrajectoryRecord rec;
  rec.method = method_name(opts.method);
  double h = opts.step > 0.0 ? opts.step : default_step(game);
  const auto steps = opts.horizon > 0.0
                         ? static_cast<std::size_t>(std::ceil(opts.horizon / h - 1e-9))
                         : std::size_t{0};
  if (steps > 0) h = opts.horizon / static_cast<double>(steps);
  rec.step = h;
  std::size_t every = 1;
  if (opts.sample_interval > 0.0)
    every = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(opts.sample_interval / h)));

  StatePolicyDist y = mu0;
  for (std::size_t k = 0;; ++k) {
    const double t = k == steps ? opts.horizon : static_cast<double>(k) * h;
    PayoffVector F;
    const Field k1 = field_at(game, y, protocols, t, &F);
    const double res = max_abs(k1);
    const bool at_rest = opts.stop_at_rest && res < opts.rest_tol;
    if (k % every == 0 || k == steps || at_rest) {
      rec.t.push_back(t);
      rec.mu.push_back(y);
      rec.residual.push_back(res);
      if (opts.record_payoffs) rec.payoffs.push_back(F);
    }
    if (at_rest) {
      rec.stopped_at_rest = true;
      break;
    }
    if (k == steps) break;

    if (opts.method == Method::Euler) {
      axpy(y.classes, h, k1);
    } else {
      const Field k2 = field_at(game, shifted(y, 0.5 * h, k1), protocols, t + 0.5 * h, nullptr);
      const Field k3 = field_at(game, shifted(y, 0.5 * h, k2), protocols, t + 0.5 * h, nullptr);
      const Field k4 = field_at(game, shifted(y, h, k3), protocols, t + h, nullptr);
      for (std::size_t c = 0; c < y.classes.size(); ++c)
        y.classes[c].noalias() += (h / 6.0) * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
    }

    const double t_next = t + h;
    for (const auto& b : y.classes)
      if (!b.allFinite()) throw IntegrationError("non-finite state at t = " + std::to_string(t_next), t_next);
    const double lo = min_entry(y.classes);
    rec.min_before_clip = std::min(rec.min_before_clip, lo);
    if (lo < 0.0) {
      if (lo < -kIntegratedMassTolerance) {
        std::ostringstream os;
        os << "state left the simplex (entry " << lo << ") at t = " << t_next
           << "; reduce the step size";
        throw IntegrationError(os.str(), t_next);
      }
      ++rec.clipped_steps;
      for (std::size_t c = 0; c < y.classes.size(); ++c) {
        y.classes[c] = y.classes[c].cwiseMax(0.0);
        y.classes[c] *= game.cls(c).mass / y.classes[c].sum();
      }
    }
  }
  return rec;
}

namespace {

std::size_t prune_policies(const Game& game, StatePolicyDist& mu, const PayoffVector& F, double residual,
                           const RestOptions& opts) {
  std::size_t pruned = 0;
  for (std::size_t c = 0; c < game.num_classes(); ++c) {
    auto& block = mu.classes[c];
    const double m = game.cls(c).mass;
    const Vec sigma = block.colwise().sum().transpose();
    const Vec& f = F.classes[c];
    const double best = f.maxCoeff();
    const double gap = std::max(opts.prune_gap * (1.0 + std::abs(best)), 100.0 * residual);
    std::vector<Eigen::Index> drop;
    double dropped = 0.0;
    for (Eigen::Index u = 0; u < f.size(); ++u) {
      if (sigma[u] > 0.0 && sigma[u] < opts.prune_mass * m &&
          f[u] < best - gap) {
        drop.push_back(u);
        dropped += sigma[u];
      }
    }
    if (drop.empty() || dropped >= 0.5 * m) continue;
    for (auto u : drop) block.col(u).setZero();
    block *= m / block.sum();
    pruned += drop.size();
  }
  return pruned;
}

}  // namespace

RestResult find_rest_point(const Game& game, const StatePolicyDist& mu0, const ProtocolSet& protocols,
                           const RestOptions& opts) {
  RestResult out;
  IntegrateOptions io;
  io.step = opts.step;
  io.stop_at_rest = true;
  io.rest_tol = opts.tol;
  io.record_payoffs = false;

  StatePolicyDist y = mu0;
  double elapsed = 0.0;
  // Integrate in chunks so pruning can be applied between them.
  const double chunk = opts.prune ? std::min(opts.max_time, 5.0) : opts.max_time;
  while (true) {
    io.horizon = std::min(chunk, opts.max_time - elapsed);
    io.sample_interval = io.horizon;
    TrajectoryRecord rec = integrate(game, y, protocols, io);
    elapsed += rec.t.back();
    y = rec.final_state();
    out.residual = rec.residual.back();
    if (rec.stopped_at_rest) {
      out.converged = true;
      break;
    }
    if (elapsed >= opts.max_time * (1.0 - 1e-12)) break;
    if (opts.prune && out.residual < opts.prune_field) {
      const PayoffVector F = payoff_map(game, y);
      out.pruned += prune_policies(game, y, F, out.residual, opts);
    }
  }
  out.mu = std::move(y);
  out.time = elapsed;
  return out;
}

}  // namespace mfgevo

#include <cmath>
#include <sstream>

#include "mfgevo/scenarios.h"

namespace mfgevo {

void MacParams::validate() const {
  std::ostringstream os;
  if (!(P_L > 0.0 && P_H > P_L)) os << "powers must satisfy 0 < P_L < P_H; ";
  if (!(p_F > 0.0 && p_F <= 1.0)) os << "p_F must lie in (0, 1]; ";
  if (!(alpha > 0.0 && gamma > 0.0)) os << "alpha and gamma must be positive; ";
  if (!(alpha * P_H + gamma <= 1.0)) os << "alpha P_H + gamma must not exceed 1; ";
  if (!(sigma2 > 0.0)) os << "sigma2 must be positive; ";
  if (!(C >= 0.0)) os << "C must be nonnegative; ";
  if (!(beta >= 0.0)) os << "beta must be nonnegative; ";
  if (!(T > 0.0)) os << "T must be positive; ";
  if (!(action_rate > 0.0 && revision_rate > 0.0)) os << "rates must be positive; ";
  const std::string msg = os.str();
  if (!msg.empty()) throw SpecError("invalid MAC parameters: " + msg.substr(0, msg.size() - 2));
}

MacParams default_mac_params() { return MacParams{}; }

GameSpec mac_spec(const MacParams& p) {
  p.validate();
  ClassSpec k;
  k.name = "terminals";
  k.mass = 1.0;
  k.action_rate = p.action_rate;
  k.revision_rate = p.revision_rate;
  k.states = {"E", "AE", "F"};
  k.actions = {"N", "L", "H"};
  k.admissible = {{0}, {1}, {1, 2}};
  // kernel[a](next, current); columns of inadmissible pairs are unused but
  // kept stochastic.
  const double dL = p.d_L(), dH = p.d_H();
  Mat n = Mat::Identity(3, 3);
  n(0, 0) = 1.0 - p.p_F;
  n(2, 0) = p.p_F;
  Mat l = Mat::Identity(3, 3);
  l(1, 1) = 1.0 - dL;
  l(0, 1) = dL;
  l(2, 2) = 1.0 - dL;
  l(1, 2) = dL;
  Mat h = l;
  h(2, 2) = 1.0 - dH;
  h(1, 2) = dH;
  k.kernel = {n, l, h};
  MacReward::Params rp;
  rp.power = {0.0, p.P_L, p.P_H};
  rp.sigma2 = p.sigma2;
  rp.channel = p.C;
  rp.duration = p.T;
  rp.beta = p.beta;
  rp.action_rate = p.action_rate;
  k.reward = std::make_shared<MacReward>(rp);
  GameSpec spec;
  spec.classes.push_back(std::move(k));
  return spec;
}

Game build_mac(const MacParams& p) { return Game::create(mac_spec(p)); }

Vec mac_stationary(double q, const MacParams& p) {
  const double d = q * p.d_L() + (1.0 - q) * p.d_H();
  Vec eta(3);
  eta << 1.0 / p.p_F, 1.0 / p.d_L(), 1.0 / d;
  return eta / eta.sum();
}

double mac_activity(double q, const MacParams& p) {
  const Vec e = mac_stationary(q, p);
  return (e[1] + q * e[2]) * p.P_L + (1.0 - q) * e[2] * p.P_H;
}

namespace {
double channel_factor(double power, const MacParams& p) {
  return 1.0 / (p.sigma2 + p.action_rate * p.T * p.C * power) - p.beta;
}
}  // namespace

double mac_deviation_payoff(double q, double h, const MacParams& p) {
  return mac_activity(q, p) * channel_factor(mac_activity(h, p), p);
}

std::pair<double, double> mac_mixed_payoffs(double x, const MacParams& p) {
  const double a1 = mac_activity(1.0, p), a0 = mac_activity(0.0, p);
  const double g = channel_factor(x * a1 + (1.0 - x) * a0, p);
  return {a1 * g, a0 * g};
}

MacMsne solve_mac_msne(const MacParams& p, double tol) {
  p.validate();
  auto diff = [&](double x) {
    auto [j1, j0] = mac_mixed_payoffs(x, p);
    return j1 - j0;
  };
  MacMsne out;
  const double d0 = diff(0.0), d1 = diff(1.0);
  if (d0 > 0.0 && d1 < 0.0) {
    double lo = 0.0, hi = 1.0;
    while (hi - lo > tol) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      (diff(mid) > 0.0 ? lo : hi) = mid;
    }
    out.x = std::abs(diff(lo)) <= std::abs(diff(hi)) ? lo : hi;
    out.interior = true;
  } else if (d0 < 0.0 && d1 > 0.0) {
    // Both corners are equilibria; report the one with the larger payoff.
    out.x = mac_mixed_payoffs(1.0, p).first >= mac_mixed_payoffs(0.0, p).second ? 1.0 : 0.0;
  } else {
    // One policy is weakly better everywhere.
    out.x = (d0 + d1 >= 0.0) ? 1.0 : 0.0;
  }
  out.payoff_difference = diff(out.x);
  out.marginal.classes = {Vec(2)};
  out.marginal.classes[0] << out.x, 1.0 - out.x;
  return out;
}

std::pair<double, double> mac_best_response(double h, const MacParams& p, double tol) {
  auto J = [&](double q) { return mac_deviation_payoff(q, h, p); };
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = 0.0, b = 1.0;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = J(c), fd = J(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = J(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = J(d);
    }
  }
  double best_q = 0.5 * (a + b), best = J(best_q);
  for (double q : {0.0, 1.0}) {
    const double v = J(q);
    if (v > best) {
      best = v;
      best_q = q;
    }
  }
  return {best_q, best};
}

MacBsne solve_mac_bsne(const MacParams& p, double tol) {
  p.validate();
  auto displacement = [&](double h) { return mac_best_response(h, p).first - h; };
  MacBsne out;
  const double lo_disp = displacement(0.0), hi_disp = displacement(1.0);
  if (lo_disp > 0.0 && hi_disp < 0.0) {
    double lo = 0.0, hi = 1.0;
    while (hi - lo > tol) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      (displacement(mid) > 0.0 ? lo : hi) = mid;
    }
    out.h = 0.5 * (lo + hi);
    out.interior = true;
  } else {
    out.h = lo_disp <= 0.0 ? 0.0 : 1.0;
  }
  auto [q, best] = mac_best_response(out.h, p);
  out.best_response = q;
  out.gap = best - mac_deviation_payoff(out.h, out.h, p);
  return out;
}

}  // namespace mfgevo

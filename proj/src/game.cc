#include "mfgevo/game.h"

#include <cmath>
#include <sstream>

namespace mfgevo {

namespace {

constexpr double kStochasticTolerance = 1e-9;

ValidationIssue issue(std::string code, std::string message) {
  ValidationIssue i;
  i.code = std::move(code);
  i.message = std::move(message);
  return i;
}

}  // namespace

MarginalPolicyDist marginal_policy(const StatePolicyDist& mu) {
  MarginalPolicyDist x;
  x.classes.reserve(mu.classes.size());
  for (const auto& block : mu.classes) x.classes.push_back(block.colwise().sum().transpose());
  return x;
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (const auto& i : issues) os << "[" << i.code << "] " << i.message << "\n";
  return os.str();
}

ValidationReport validate_game(const GameSpec& spec, std::size_t policy_cap) {
  ValidationReport report;
  auto& out = report.issues;
  if (spec.classes.empty()) out.push_back(issue("no-classes", "game has no classes"));

  double total_mass = 0.0;
  for (std::size_t c = 0; c < spec.classes.size(); ++c) {
    const ClassSpec& k = spec.classes[c];
    const std::string where = "class '" + k.name + "'";
    total_mass += k.mass;

    if (!(k.mass > 0.0)) {
      auto i = issue("nonpositive-mass", where + ": mass must be positive");
      i.cls = c;
      out.push_back(i);
    }
    if (!(k.action_rate > 0.0)) {
      auto i = issue("nonpositive-action-rate", where + ": action rate must be positive");
      i.cls = c;
      out.push_back(i);
    }
    if (!(k.revision_rate > 0.0)) {
      auto i = issue("nonpositive-revision-rate", where + ": revision rate must be positive");
      i.cls = c;
      out.push_back(i);
    }
    if (k.states.empty()) {
      auto i = issue("no-states", where + ": no states");
      i.cls = c;
      out.push_back(i);
      continue;
    }
    if (!k.reward) {
      auto i = issue("missing-reward", where + ": no reward function");
      i.cls = c;
      out.push_back(i);
    }
    if (k.admissible.size() != k.num_states()) {
      auto i = issue("admissible-shape", where + ": admissible sets must be given for every state");
      i.cls = c;
      out.push_back(i);
      continue;
    }
    if (k.kernel.size() != k.num_actions()) {
      auto i = issue("kernel-shape", where + ": one kernel matrix per action required");
      i.cls = c;
      out.push_back(i);
      continue;
    }
    bool structural_ok = true;
    const auto p = static_cast<Eigen::Index>(k.num_states());
    for (std::size_t a = 0; a < k.num_actions(); ++a) {
      if (k.kernel[a].rows() != p || k.kernel[a].cols() != p) {
        auto i = issue("kernel-shape", where + ", action '" + k.actions[a] + "': kernel must be " +
                                           std::to_string(p) + "x" + std::to_string(p));
        i.cls = c;
        i.action = a;
        out.push_back(i);
        structural_ok = false;
      }
    }
    for (std::size_t s = 0; s < k.num_states(); ++s) {
      if (k.admissible[s].empty()) {
        auto i = issue("empty-action-set", where + ", state '" + k.states[s] + "': no admissible action");
        i.cls = c;
        i.state = s;
        out.push_back(i);
        structural_ok = false;
        continue;
      }
      for (std::size_t a : k.admissible[s]) {
        if (a >= k.num_actions()) {
          auto i = issue("unknown-action", where + ", state '" + k.states[s] + "': admissible action index out of range");
          i.cls = c;
          i.state = s;
          out.push_back(i);
          structural_ok = false;
          continue;
        }
        if (k.kernel[a].rows() != p || k.kernel[a].cols() != p) continue;
        const auto col = k.kernel[a].col(static_cast<Eigen::Index>(s));
        const double sum = col.sum();
        const double lo = col.minCoeff();
        if (!std::isfinite(sum) || lo < 0.0 || std::abs(sum - 1.0) > kStochasticTolerance) {
          std::ostringstream os;
          os << where << ", action '" << k.actions[a] << "', column " << s << " (state '" << k.states[s]
             << "'): transition probabilities must be nonnegative and sum to 1 (sum " << sum
             << ", min " << lo << ")";
          auto i = issue("kernel-not-stochastic", os.str());
          i.cls = c;
          i.state = s;
          i.action = a;
          out.push_back(i);
          structural_ok = false;
        }
      }
    }
    if (!structural_ok) continue;

    const std::size_t count = policy_count(k);
    if (count > policy_cap) {
      auto i = issue("policy-cap", where + ": " + std::to_string(count) +
                                       " deterministic policies exceed the cap of " +
                                       std::to_string(policy_cap));
      i.cls = c;
      out.push_back(i);
      continue;
    }
    PolicySet set = enumerate_policies(k, c, policy_cap);
    for (const auto& u : set.policies) {
      auto rc = recurrent_classes(policy_kernel(k, u));
      if (rc.size() != 1) {
        std::ostringstream os;
        os << where << ", policy " << u.index + 1 << " (" << u.label(k) << "): " << rc.size()
           << " recurrent communicating classes, exactly one required";
        auto i = issue("multiple-recurrent-classes", os.str());
        i.cls = c;
        i.policy = u.index;
        out.push_back(i);
      }
    }
  }
  if (!spec.classes.empty() && std::abs(total_mass - 1.0) > kStochasticTolerance) {
    std::ostringstream os;
    os << "class masses sum to " << total_mass << ", expected 1";
    out.push_back(issue("mass-not-normalized", os.str()));
  }
  return report;
}

Game Game::create(GameSpec spec, std::size_t policy_cap) {
  ValidationReport report = validate_game(spec, policy_cap);
  if (!report.ok()) throw ValidationError("game spec failed validation:\n" + report.to_string());
  auto d = std::make_shared<Data>();
  d->spec = std::move(spec);
  for (std::size_t c = 0; c < d->spec.classes.size(); ++c) {
    d->policies.push_back(enumerate_policies(d->spec.classes[c], c, policy_cap));
    std::vector<StationaryDistribution> etas;
    std::vector<Mat> kernels;
    for (const auto& u : d->policies.back().policies) {
      etas.push_back(stationary_distribution(d->spec.classes[c], u));
      kernels.push_back(policy_kernel(d->spec.classes[c], u));
    }
    d->stationary.push_back(std::move(etas));
    d->kernels.push_back(std::move(kernels));
  }
  return Game(std::move(d));
}

double Game::max_rate() const {
  double r = 0.0;
  for (const auto& k : spec().classes) r = std::max({r, k.action_rate, k.revision_rate});
  return r;
}

StatePolicyDist Game::zero_state_policy() const {
  StatePolicyDist mu;
  for (std::size_t c = 0; c < num_classes(); ++c)
    mu.classes.push_back(RowMat::Zero(static_cast<Eigen::Index>(num_states(c)),
                                      static_cast<Eigen::Index>(num_policies(c))));
  return mu;
}

StateActionDist Game::zero_state_action() const {
  StateActionDist sa;
  for (std::size_t c = 0; c < num_classes(); ++c)
    sa.classes.push_back(RowMat::Zero(static_cast<Eigen::Index>(num_states(c)),
                                      static_cast<Eigen::Index>(num_actions(c))));
  return sa;
}

MarginalPolicyDist Game::zero_marginal() const {
  MarginalPolicyDist x;
  for (std::size_t c = 0; c < num_classes(); ++c)
    x.classes.push_back(Vec::Zero(static_cast<Eigen::Index>(num_policies(c))));
  return x;
}

void Game::check(const StatePolicyDist& mu, double tol) const {
  if (mu.classes.size() != num_classes())
    throw DimensionError("state-policy distribution has the wrong number of classes");
  for (std::size_t c = 0; c < num_classes(); ++c) {
    const auto& b = mu.classes[c];
    if (b.rows() != static_cast<Eigen::Index>(num_states(c)) ||
        b.cols() != static_cast<Eigen::Index>(num_policies(c))) {
      std::ostringstream os;
      os << "class " << c << ": expected a " << num_states(c) << "x" << num_policies(c)
         << " state-policy block, got " << b.rows() << "x" << b.cols();
      throw DimensionError(os.str());
    }
    if (!b.allFinite()) throw Error("state-policy distribution has non-finite entries");
    if (b.minCoeff() < -tol) throw Error("state-policy distribution has negative entries");
    if (std::abs(b.sum() - cls(c).mass) > tol) {
      std::ostringstream os;
      os << "class " << c << ": mass " << b.sum() << " differs from m^c = " << cls(c).mass;
      throw Error(os.str());
    }
  }
}

void Game::check(const MarginalPolicyDist& x, double tol) const {
  if (x.classes.size() != num_classes())
    throw DimensionError("policy distribution has the wrong number of classes");
  for (std::size_t c = 0; c < num_classes(); ++c) {
    const auto& v = x.classes[c];
    if (v.size() != static_cast<Eigen::Index>(num_policies(c)))
      throw DimensionError("class " + std::to_string(c) + ": policy distribution has wrong length");
    if (!v.allFinite() || v.minCoeff() < -tol || std::abs(v.sum() - cls(c).mass) > tol)
      throw Error("class " + std::to_string(c) + ": policy distribution is not on the class simplex");
  }
}

StateActionDist aggregate_state_action(const Game& game, const StatePolicyDist& mu) {
  if (mu.classes.size() != game.num_classes())
    throw DimensionError("state-policy distribution has the wrong number of classes");
  StateActionDist sa = game.zero_state_action();
  for (std::size_t c = 0; c < game.num_classes(); ++c) {
    const auto& block = mu.classes[c];
    if (block.rows() != static_cast<Eigen::Index>(game.num_states(c)) ||
        block.cols() != static_cast<Eigen::Index>(game.num_policies(c)))
      throw DimensionError("state-policy block shape does not match the game");
    const auto& set = game.policies(c);
    for (std::size_t u = 0; u < set.size(); ++u) {
      const auto& act = set[u].action;
      for (std::size_t s = 0; s < act.size(); ++s)
        sa.classes[c](static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(act[s])) +=
            block(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(u));
    }
  }
  return sa;
}

double reward_eval(const GameSpec& spec, std::size_t c, std::size_t s, std::size_t a,
                   const StateActionDist& sa) {
  if (c >= spec.classes.size()) throw DimensionError("class index out of range");
  const ClassSpec& k = spec.classes[c];
  if (!k.is_admissible(s, a)) {
    std::ostringstream os;
    os << "class '" << k.name << "': action " << a << " is not admissible in state " << s;
    throw DimensionError(os.str());
  }
  return k.reward->value(c, s, a, sa);
}

StatePolicyDist uniform_state_policy(const Game& game) {
  StatePolicyDist mu = game.zero_state_policy();
  for (std::size_t c = 0; c < game.num_classes(); ++c)
    mu.classes[c].setConstant(game.cls(c).mass / static_cast<double>(mu.classes[c].size()));
  return mu;
}

}  // namespace mfgevo

#include "mfgevo/markov.h"

#include <algorithm>
#include <functional>
#include <limits>
#include <sstream>

namespace mfgevo {

bool ClassSpec::is_admissible(std::size_t s, std::size_t a) const {
  if (s >= admissible.size()) return false;
  return std::find(admissible[s].begin(), admissible[s].end(), a) != admissible[s].end();
}

std::string DeterministicPolicy::label(const ClassSpec& spec) const {
  std::ostringstream os;
  for (std::size_t s = 0; s < action.size(); ++s) {
    if (s) os << ';';
    os << spec.states[s] << "->" << spec.actions[action[s]];
  }
  return os.str();
}

std::size_t policy_count(const ClassSpec& spec) {
  std::size_t n = 1;
  for (const auto& adm : spec.admissible) {
    if (adm.empty()) return 0;
    if (n > std::numeric_limits<std::size_t>::max() / adm.size())
      return std::numeric_limits<std::size_t>::max();
    n *= adm.size();
  }
  return n;
}

PolicySet enumerate_policies(const ClassSpec& spec, std::size_t cls, std::size_t cap) {
  const std::size_t count = policy_count(spec);
  if (count > cap) {
    std::ostringstream os;
    os << "class '" << spec.name << "' (index " << cls << ") has " << count
       << " deterministic policies, above the cap of " << cap;
    throw PolicyCapError(os.str());
  }
  PolicySet set;
  set.cls = cls;
  if (count == 0) return set;
  const std::size_t p = spec.num_states();
  std::vector<std::size_t> digit(p, 0);
  set.policies.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    DeterministicPolicy u;
    u.cls = cls;
    u.index = k;
    u.action.resize(p);
    for (std::size_t s = 0; s < p; ++s) u.action[s] = spec.admissible[s][digit[s]];
    set.policies.push_back(std::move(u));
    // odometer increment, last state fastest
    for (std::size_t s = p; s-- > 0;) {
      if (++digit[s] < spec.admissible[s].size()) break;
      digit[s] = 0;
    }
  }
  return set;
}

Mat policy_kernel(const ClassSpec& spec, const DeterministicPolicy& u) {
  const auto p = static_cast<Eigen::Index>(spec.num_states());
  if (u.action.size() != spec.num_states())
    throw DimensionError("policy does not cover every state of the class");
  Mat k(p, p);
  for (Eigen::Index s = 0; s < p; ++s) {
    const std::size_t a = u.action[static_cast<std::size_t>(s)];
    if (!spec.is_admissible(static_cast<std::size_t>(s), a))
      throw DimensionError("policy assigns an inadmissible action");
    k.col(s) = spec.kernel[a].col(s);
  }
  return k;
}

Mat randomized_policy_kernel(const ClassSpec& spec, const RowMat& probs) {
  const auto p = static_cast<Eigen::Index>(spec.num_states());
  if (probs.rows() != p || probs.cols() != static_cast<Eigen::Index>(spec.num_actions()))
    throw DimensionError("randomized policy shape mismatch");
  Mat k = Mat::Zero(p, p);
  for (Eigen::Index s = 0; s < p; ++s)
    for (Eigen::Index a = 0; a < probs.cols(); ++a)
      if (probs(s, a) != 0.0) k.col(s) += probs(s, a) * spec.kernel[static_cast<std::size_t>(a)].col(s);
  return k;
}

Mat generator(const ClassSpec& spec, const DeterministicPolicy& u) {
  Mat k = policy_kernel(spec, u);
  k.diagonal().array() -= 1.0;
  return spec.action_rate * k;
}

std::vector<std::vector<std::size_t>> recurrent_classes(const Mat& kernel) {
  const std::size_t n = static_cast<std::size_t>(kernel.rows());
  auto edge = [&](std::size_t from, std::size_t to) {
    return kernel(static_cast<Eigen::Index>(to), static_cast<Eigen::Index>(from)) > 0.0;
  };

  // Tarjan's strongly connected components.
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  int counter = 0, ncomp = 0;
  std::function<void(std::size_t)> visit = [&](std::size_t v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (std::size_t w = 0; w < n; ++w) {
      if (!edge(v, w)) continue;
      if (index[w] < 0) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp[w] = ncomp;
      } while (w != v);
      ++ncomp;
    }
  };
  for (std::size_t v = 0; v < n; ++v)
    if (index[v] < 0) visit(v);

  std::vector<bool> closed(static_cast<std::size_t>(ncomp), true);
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t w = 0; w < n; ++w)
      if (edge(v, w) && comp[v] != comp[w]) closed[static_cast<std::size_t>(comp[v])] = false;

  std::vector<std::vector<std::size_t>> out;
  std::vector<int> slot(static_cast<std::size_t>(ncomp), -1);
  for (std::size_t v = 0; v < n; ++v) {
    const auto c = static_cast<std::size_t>(comp[v]);
    if (!closed[c]) continue;
    if (slot[c] < 0) {
      slot[c] = static_cast<int>(out.size());
      out.emplace_back();
    }
    out[static_cast<std::size_t>(slot[c])].push_back(v);
  }
  return out;
}

StationaryDistribution stationary_from_kernel(const Mat& kernel) {
  if (kernel.rows() != kernel.cols()) throw DimensionError("kernel must be square");
  auto classes = recurrent_classes(kernel);
  if (classes.size() != 1) {
    std::ostringstream os;
    os << "kernel has " << classes.size()
       << " recurrent communicating classes; a unique stationary distribution needs exactly one";
    throw AssumptionError(os.str());
  }
  const auto& rec = classes.front();
  const auto m = static_cast<Eigen::Index>(rec.size());
  // Balance equations (phi_R - I) eta_R = 0 with the last row replaced by
  // the normalisation sum(eta_R) = 1.
  Mat a(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      a(i, j) = kernel(static_cast<Eigen::Index>(rec[static_cast<std::size_t>(i)]),
                       static_cast<Eigen::Index>(rec[static_cast<std::size_t>(j)])) -
                (i == j ? 1.0 : 0.0);
  a.row(m - 1).setOnes();
  Vec b = Vec::Zero(m);
  b[m - 1] = 1.0;
  Eigen::FullPivLU<Mat> lu(a);
  Vec x = lu.solve(b);
  // one refinement step
  x += lu.solve(b - a * x);

  StationaryDistribution out;
  out.recurrent = rec;
  out.eta = Vec::Zero(kernel.rows());
  for (Eigen::Index i = 0; i < m; ++i)
    out.eta[static_cast<Eigen::Index>(rec[static_cast<std::size_t>(i)])] = std::max(0.0, x[i]);
  out.eta /= out.eta.sum();
  return out;
}

StationaryDistribution stationary_distribution(const ClassSpec& spec, const DeterministicPolicy& u) {
  StationaryDistribution d;
  try {
    d = stationary_from_kernel(policy_kernel(spec, u));
  } catch (const AssumptionError& e) {
    std::ostringstream os;
    os << "class '" << spec.name << "', policy " << u.index + 1 << " (" << u.label(spec)
       << "): " << e.what();
    throw AssumptionError(os.str());
  }
  d.policy = u.index;
  return d;
}

}  // namespace mfgevo

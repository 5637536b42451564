#pragma once

#include <cstddef>
#include <vector>

#include "mfgevo/common.h"

namespace mfgevo {

// mu^c_{SxA}[s, a]: per class, a |S^c| x |A^c| block. Inadmissible pairs
// carry exactly zero mass.
struct StateActionDist {
  Field classes;

  double operator()(std::size_t c, std::size_t s, std::size_t a) const {
    return classes[c](s, a);
  }
  // Total mass of class c on action a over all states.
  double action_mass(std::size_t c, std::size_t a) const {
    return classes[c].col(a).sum();
  }
};

// mu^c[s, u]: per class, a |S^c| x n^c block indexed by (state, policy),
// policies in canonical PolicySet order.
struct StatePolicyDist {
  Field classes;

  double operator()(std::size_t c, std::size_t s, std::size_t u) const {
    return classes[c](s, u);
  }
  double& operator()(std::size_t c, std::size_t s, std::size_t u) {
    return classes[c](s, u);
  }
  double class_mass(std::size_t c) const { return classes[c].sum(); }
};

// x^c[u]: per class, mass on each deterministic policy.
struct MarginalPolicyDist {
  std::vector<Vec> classes;
};

// F^c_u: per class, one payoff per deterministic policy.
struct PayoffVector {
  std::vector<Vec> classes;

  double max_abs() const {
    double r = 0.0;
    for (const auto& v : classes)
      if (v.size() > 0) r = std::max(r, v.cwiseAbs().maxCoeff());
    return r;
  }
};

// mu^c[S^c, u] = sum_s mu^c[s, u].
MarginalPolicyDist marginal_policy(const StatePolicyDist& mu);

}  // namespace mfgevo

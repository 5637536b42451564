#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mfgevo/common.h"
#include "mfgevo/spec.h"

namespace mfgevo {

// A total map state -> admissible action.
struct DeterministicPolicy {
  std::size_t cls = 0;
  std::size_t index = 0;            // canonical position in the PolicySet
  std::vector<std::size_t> action;  // action[s], an index into ClassSpec::actions

  std::string label(const ClassSpec& spec) const;
};

// All deterministic policies of a class, lexicographic in state order then in
// admissible-action order: the first state is the most significant digit.
struct PolicySet {
  std::size_t cls = 0;
  std::vector<DeterministicPolicy> policies;

  std::size_t size() const { return policies.size(); }
  const DeterministicPolicy& operator[](std::size_t i) const { return policies[i]; }
};

struct StationaryDistribution {
  std::size_t policy = 0;
  Vec eta;                             // over states, sums to one
  std::vector<std::size_t> recurrent;  // the unique recurrent class
};

// Product of per-state action counts; saturates at SIZE_MAX.
std::size_t policy_count(const ClassSpec& spec);

// Throws PolicyCapError when the class has more than `cap` policies.
PolicySet enumerate_policies(const ClassSpec& spec, std::size_t cls,
                             std::size_t cap = kDefaultPolicyCap);

// phi^{c,u}(next, current) = sum_a phi^c(next | current, a) u(a | current).
Mat policy_kernel(const ClassSpec& spec, const DeterministicPolicy& u);

// Kernel of a randomized policy; probs(s, a) = u(a | s).
Mat randomized_policy_kernel(const ClassSpec& spec, const RowMat& probs);

// Q^{c,u} = lambda_d (phi^{c,u} - I); columns sum to zero.
Mat generator(const ClassSpec& spec, const DeterministicPolicy& u);

// Closed communicating classes of the support digraph of a column-stochastic
// kernel (edge current -> next whenever kernel(next, current) > 0). Each
// class is sorted; classes are ordered by their smallest state.
std::vector<std::vector<std::size_t>> recurrent_classes(const Mat& kernel);

// Unique stationary law of a column-stochastic kernel with exactly one
// recurrent class; transient states get exactly zero mass. Throws
// AssumptionError otherwise.
StationaryDistribution stationary_from_kernel(const Mat& kernel);

StationaryDistribution stationary_distribution(const ClassSpec& spec, const DeterministicPolicy& u);

}  // namespace mfgevo

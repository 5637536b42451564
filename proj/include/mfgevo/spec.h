#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "mfgevo/common.h"
#include "mfgevo/reward.h"

namespace mfgevo {

// One class (subpopulation) of the game: mass m^c, clock rates, states,
// admissible actions, the transition kernel and the single-stage reward.
struct ClassSpec {
  std::string name;
  double mass = 1.0;
  double action_rate = 1.0;    // lambda_d
  double revision_rate = 1.0;  // lambda_r
  std::vector<std::string> states;
  std::vector<std::string> actions;  // A^c, the union over states
  // admissible[s] = indices into `actions`, in declaration order.
  std::vector<std::vector<std::size_t>> admissible;
  // kernel[a](next, current) = phi^c(next | current, a). Columns of
  // admissible (current, a) pairs are probability vectors.
  std::vector<Mat> kernel;
  std::shared_ptr<const RewardFunction> reward;

  std::size_t num_states() const { return states.size(); }
  std::size_t num_actions() const { return actions.size(); }
  bool is_admissible(std::size_t s, std::size_t a) const;
};

struct GameSpec {
  std::vector<ClassSpec> classes;

  std::size_t num_classes() const { return classes.size(); }
};

}  // namespace mfgevo

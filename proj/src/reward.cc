#include "mfgevo/reward.h"

#include <algorithm>

namespace mfgevo {

namespace {
void zero_like(const StateActionDist& sa, StateActionDist& out) {
  out.classes = zeros_like(sa.classes);
}
}  // namespace

bool RewardFunction::gradient(std::size_t, std::size_t, std::size_t, const StateActionDist&,
                              StateActionDist&) const {
  return false;
}

bool ConstantReward::gradient(std::size_t, std::size_t, std::size_t, const StateActionDist& sa,
                              StateActionDist& out) const {
  zero_like(sa, out);
  return true;
}

bool TabularReward::gradient(std::size_t, std::size_t, std::size_t, const StateActionDist& sa,
                             StateActionDist& out) const {
  zero_like(sa, out);
  return true;
}

double ResourceModel::flow(std::size_t r, const StateActionDist& sa) const {
  double total = 0.0;
  for (std::size_t c = 0; c < usage.size() && c < sa.classes.size(); ++c) {
    for (std::size_t a = 0; a < usage[c].size(); ++a) {
      const auto& used = usage[c][a];
      if (std::find(used.begin(), used.end(), r) != used.end()) total += sa.action_mass(c, a);
    }
  }
  return rate * total;
}

std::vector<double> ResourceModel::flows(const StateActionDist& sa) const {
  std::vector<double> out(resources.size());
  for (std::size_t r = 0; r < resources.size(); ++r) out[r] = flow(r, sa);
  return out;
}

bool ResourceModel::uses(std::size_t c, std::size_t a, std::size_t r) const {
  if (c >= usage.size() || a >= usage[c].size()) return false;
  const auto& used = usage[c][a];
  return std::find(used.begin(), used.end(), r) != used.end();
}

void ResourceModel::check(std::size_t num_classes) const {
  if (reward.size() != resources.size())
    throw SpecError("resource model: one reward function per resource required");
  if (usage.size() != num_classes)
    throw SpecError("resource model: usage table must cover every class");
  if (!(rate > 0.0)) throw SpecError("resource model: common action rate must be positive");
  for (const auto& cls : usage)
    for (const auto& used : cls)
      for (std::size_t r : used)
        if (r >= resources.size()) throw SpecError("resource model: usage references unknown resource");
}

double CongestionReward::value(std::size_t cls, std::size_t, std::size_t action,
                               const StateActionDist& sa) const {
  double r_total = 0.0;
  for (std::size_t r : model_->usage.at(cls).at(action))
    r_total += model_->reward[r](model_->flow(r, sa));
  return r_total;
}

bool CongestionReward::gradient(std::size_t cls, std::size_t, std::size_t action,
                                const StateActionDist& sa, StateActionDist& out) const {
  zero_like(sa, out);
  for (std::size_t r : model_->usage.at(cls).at(action)) {
    const double dw = model_->reward[r].derivative() * model_->rate;
    for (std::size_t d = 0; d < out.classes.size(); ++d)
      for (Eigen::Index a = 0; a < out.classes[d].cols(); ++a)
        if (model_->uses(d, static_cast<std::size_t>(a), r)) out.classes[d].col(a).array() += dw;
  }
  return true;
}

double MacReward::transmitted_power(std::size_t cls, const StateActionDist& sa) const {
  double total = 0.0;
  for (std::size_t a = 0; a < p_.power.size(); ++a) total += p_.power[a] * sa.action_mass(cls, a);
  return total;
}

double MacReward::value(std::size_t cls, std::size_t, std::size_t action,
                        const StateActionDist& sa) const {
  const double pa = p_.power.at(action);
  const double den =
      p_.sigma2 + p_.action_rate * p_.duration * p_.channel * transmitted_power(cls, sa);
  return pa / den - p_.beta * pa;
}

bool MacReward::gradient(std::size_t cls, std::size_t, std::size_t action,
                         const StateActionDist& sa, StateActionDist& out) const {
  zero_like(sa, out);
  const double pa = p_.power.at(action);
  const double k = p_.action_rate * p_.duration * p_.channel;
  const double den = p_.sigma2 + k * transmitted_power(cls, sa);
  for (std::size_t a = 0; a < p_.power.size(); ++a)
    out.classes[cls].col(static_cast<Eigen::Index>(a)).array() = -pa * k * p_.power[a] / (den * den);
  return true;
}

}  // namespace mfgevo

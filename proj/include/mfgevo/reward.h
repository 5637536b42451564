#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "mfgevo/distributions.h"

namespace mfgevo {

// Single-stage reward r^c(s, a, mu_{SxA}). Implementations must be
// continuously differentiable in the distribution entries.
class RewardFunction {
 public:
  virtual ~RewardFunction() = default;

  virtual std::string family() const = 0;
  virtual double value(std::size_t cls, std::size_t state, std::size_t action,
                       const StateActionDist& sa) const = 0;

  // Analytic partials d r / d sa.classes[d](s', a') written into `out`
  // (same shape as `sa`). Returns false when no analytic form exists.
  virtual bool gradient(std::size_t cls, std::size_t state, std::size_t action,
                        const StateActionDist& sa, StateActionDist& out) const;

  // Custom hooks cannot be written to a spec file.
  virtual bool serializable() const { return true; }
};

class ConstantReward final : public RewardFunction {
 public:
  explicit ConstantReward(double value) : value_(value) {}
  std::string family() const override { return "constant"; }
  double value(std::size_t, std::size_t, std::size_t, const StateActionDist&) const override {
    return value_;
  }
  bool gradient(std::size_t, std::size_t, std::size_t, const StateActionDist& sa,
                StateActionDist& out) const override;
  double constant() const { return value_; }

 private:
  double value_;
};

// Reward depends on (s, a) only.
class TabularReward final : public RewardFunction {
 public:
  explicit TabularReward(RowMat table) : table_(std::move(table)) {}
  std::string family() const override { return "tabular"; }
  double value(std::size_t, std::size_t s, std::size_t a, const StateActionDist&) const override {
    return table_(s, a);
  }
  bool gradient(std::size_t, std::size_t, std::size_t, const StateActionDist& sa,
                StateActionDist& out) const override;
  const RowMat& table() const { return table_; }

 private:
  RowMat table_;
};

// w_r(sigma) = intercept + slope * sigma.
struct AffineResourceReward {
  double intercept = 0.0;
  double slope = 0.0;

  double operator()(double sigma) const { return intercept + slope * sigma; }
  double derivative() const { return slope; }
  // \int_0^upto w_r(z) dz
  double integral(double upto) const { return intercept * upto + 0.5 * slope * upto * upto; }
};

// Congestion payoff structure: every action is a subset of resources and is
// rewarded with the sum of its resources' rewards at the current flows.
struct ResourceModel {
  std::vector<std::string> resources;
  std::vector<AffineResourceReward> reward;  // one per resource
  // usage[c][a] lists the resources used by action a of class c.
  std::vector<std::vector<std::vector<std::size_t>>> usage;
  // Common action rate lambda shared by every class.
  double rate = 1.0;

  // sigma_r = rate * sum_c sum_s sum_{a uses r} mu^c_{SxA}[s, a]
  double flow(std::size_t r, const StateActionDist& sa) const;
  std::vector<double> flows(const StateActionDist& sa) const;
  bool uses(std::size_t c, std::size_t a, std::size_t r) const;
  // Throws SpecError when indices are out of range.
  void check(std::size_t num_classes) const;
};

class CongestionReward final : public RewardFunction {
 public:
  explicit CongestionReward(std::shared_ptr<const ResourceModel> model) : model_(std::move(model)) {}
  std::string family() const override { return "congestion"; }
  double value(std::size_t cls, std::size_t state, std::size_t action,
               const StateActionDist& sa) const override;
  bool gradient(std::size_t cls, std::size_t state, std::size_t action, const StateActionDist& sa,
                StateActionDist& out) const override;
  const std::shared_ptr<const ResourceModel>& model() const { return model_; }

 private:
  std::shared_ptr<const ResourceModel> model_;
};

// Expected SINR of the medium access game:
//   r(s, a, mu) = P_a / (sigma2 + lambda T C sum_a' P_a' mu_{SxA}[S, a']) - beta P_a
// The interference sum runs over the reward's own class.
class MacReward final : public RewardFunction {
 public:
  struct Params {
    std::vector<double> power;  // per action of the class
    double sigma2 = 1.0;
    double channel = 1.0;       // C
    double duration = 1.0;      // T
    double beta = 0.0;
    double action_rate = 1.0;   // lambda
  };

  explicit MacReward(Params p) : p_(std::move(p)) {}
  std::string family() const override { return "mac"; }
  double value(std::size_t cls, std::size_t state, std::size_t action,
               const StateActionDist& sa) const override;
  bool gradient(std::size_t cls, std::size_t state, std::size_t action, const StateActionDist& sa,
                StateActionDist& out) const override;
  const Params& params() const { return p_; }
  double transmitted_power(std::size_t cls, const StateActionDist& sa) const;

 private:
  Params p_;
};

using RewardHook = std::function<double(std::size_t cls, std::size_t state, std::size_t action,
                                        const StateActionDist& sa)>;

class CustomReward final : public RewardFunction {
 public:
  explicit CustomReward(RewardHook fn, std::string label = "custom")
      : fn_(std::move(fn)), label_(std::move(label)) {}
  std::string family() const override { return label_; }
  double value(std::size_t cls, std::size_t state, std::size_t action,
               const StateActionDist& sa) const override {
    return fn_(cls, state, action, sa);
  }
  bool serializable() const override { return false; }

 private:
  RewardHook fn_;
  std::string label_;
};

}  // namespace mfgevo

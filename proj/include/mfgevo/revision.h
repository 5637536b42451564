#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mfgevo/game.h"

namespace mfgevo {

enum class ProtocolFamily {
  Imitative,
  ImitativeViaComparison,
  ExcessPayoff,
  SeparableExcessPayoff,
  PairwiseComparison,
  ImpartialPairwiseComparison,
  Null,  // all rates zero; revision switched off
  Custom,
};

std::string family_tag(ProtocolFamily f);

// Writes rho(F, sigma) into `out` (already sized n x n and zeroed).
using RateEvaluator = std::function<void(const Vec& F, const Vec& sigma, RowMat& out)>;

// A revision protocol: an immutable, thread-safe evaluator of the switch
// rate matrix rho_{uv}(F, sigma). `sigma` is the class's policy marginal
// and its sum is the class mass.
class RevisionProtocol {
 public:
  RevisionProtocol(std::string name, ProtocolFamily family, RateEvaluator fn,
                   std::optional<double> level = std::nullopt);

  const std::string& name() const { return name_; }
  ProtocolFamily family() const { return family_; }
  // Dissatisfaction level K, when the protocol has one.
  std::optional<double> level() const { return level_; }
  bool strict() const { return strict_; }
  RevisionProtocol with_strict(bool strict) const;
  bool serializable() const { return family_ != ProtocolFamily::Custom; }

  // Nonnegative n x n matrix with zero diagonal. Throws DimensionError on
  // length mismatch and Error on non-finite payoffs.
  RowMat rates(const Vec& F, const Vec& sigma) const;
  void rates_into(const Vec& F, const Vec& sigma, RowMat& out) const;

  // {"family": ..., "params": {...}, "strict": ...}
  std::string to_json() const;

 private:
  std::string name_;
  ProtocolFamily family_;
  RateEvaluator fn_;
  std::optional<double> level_;
  bool strict_ = false;
};

// rho_uv = (K - F_u) sigma_v / m. Evaluation throws AssumptionError when
// some F_u exceeds K.
RevisionProtocol make_dissatisfaction(double K);
// rho_uv = max(0, F_v - F_u) sigma_v / m.
RevisionProtocol make_pairwise_proportional_imitation();
// rho_uv = max(0, Fhat_v) with Fhat the excess payoff.
RevisionProtocol make_bnn();
// rho_uv = max(0, F_v - F_u).
RevisionProtocol make_smith();
RevisionProtocol make_null();
RevisionProtocol make_custom(std::string name, RateEvaluator fn);

// Accepts a family name ("smith", "bnn", "ppi", "pairwise-proportional-imitation",
// "dissatisfaction[:K]", "null"), an inline JSON object, or a path to a
// JSON file. Throws SpecError.
RevisionProtocol parse_protocol(const std::string& text);

// One protocol per class.
using ProtocolSet = std::vector<RevisionProtocol>;
ProtocolSet uniform_protocols(const Game& game, const RevisionProtocol& p);

struct RateBoundReport {
  std::size_t cls = 0;
  double revision_rate = 0.0;
  double payoff_min = 0.0, payoff_max = 0.0;
  bool payoff_range_exact = false;    // from reward tables rather than sampling
  std::optional<double> analytic_bound;  // sup row sum bound for built-ins
  double sampled_sup = 0.0;           // largest row sum seen
  StatePolicyDist witness;            // where sampled_sup was attained
  std::size_t samples = 0;
  bool holds = false;
  std::string message;
};

// Checks sup_mu max_u sum_{v != u} rho_uv <= lambda_r for class c. Never
// throws on a failed bound; the report says what failed.
RateBoundReport check_rate_bound(const RevisionProtocol& protocol, const Game& game,
                                    std::size_t cls, std::size_t samples = 2000,
                                    std::uint64_t seed = 1);

struct AxiomResult {
  std::string axiom;
  bool claimed = false;  // the protocol's family asserts this axiom
  std::size_t checked = 0;
  std::size_t violations = 0;
  std::string witness;   // first counterexample, if any

  bool holds() const { return violations == 0; }
};

struct AxiomReport {
  std::string protocol;
  std::vector<AxiomResult> results;
  std::size_t skipped = 0;  // samples the evaluator rejected

  const AxiomResult& get(const std::string& axiom) const;
  // Every axiom claimed by the family held on all samples. Sampling can
  // only refute, so true means "not falsified".
  bool consistent() const;
};

// Axioms: "nonnegativity", "imitative-target", "monotone-net-imitation",
// "via-comparison-sign", "acuteness", "pairwise-sign".
AxiomReport verify_family_axioms(const RevisionProtocol& protocol, std::size_t samples = 10000,
                                 std::uint64_t seed = 1);

}  // namespace mfgevo

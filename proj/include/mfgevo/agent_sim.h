#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mfgevo/mean_dynamic.h"

namespace mfgevo {

// Finite population: one record per player plus per-class integer counts
// over (state, policy) cells.
struct PopulationState {
  std::size_t N = 0;
  std::vector<std::size_t> cls, state, policy;
  std::vector<std::vector<std::size_t>> counts;  // counts[c][s * n_c + u]
  double t = 0.0;

  // mu_hat = counts / N.
  StatePolicyDist empirical(const Game& game) const;
  // mu_hat_{SxA} = (1/N) sum_i delta_{(s^i, u^i(s^i))}.
  StateActionDist empirical_state_action(const Game& game) const;
  std::size_t class_size(std::size_t c) const;
};

// Largest-remainder apportionment of N players: first across classes by
// m^c, then across (state, policy) cells by mu0. Throws Error when some
// class would receive no player.
PopulationState initial_population(const Game& game, const StatePolicyDist& mu0, std::size_t N);

struct SimOptions {
  double horizon = 5.0;
  double sample_interval = 0.1;  // grid 0, dt, 2 dt, ..., horizon
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;      // replication id
  // Abort when a revision row sum exceeds lambda_r. When false such rows
  // are scaled down to lambda_r and counted.
  bool strict = false;
};

struct SimResult {
  TrajectoryRecord trajectory;  // method "ssa"; no residuals
  PopulationState final_state;
  std::size_t action_events = 0;
  std::size_t revision_events = 0;
  std::size_t switches = 0;
  std::size_t rate_bound_violations = 0;
  std::vector<std::size_t> player_action_events;  // per player
};

// Exact next-event simulation of the superposed action and revision
// clocks. Each event consumes four uniforms (waiting time, player, clock
// type, outcome), so runs that differ in one player's policy stay coupled.
SimResult simulate(const Game& game, const ProtocolSet& protocols, const PopulationState& initial,
                   const SimOptions& opts);
SimResult simulate(const Game& game, const ProtocolSet& protocols, const StatePolicyDist& mu0,
                   std::size_t N, const SimOptions& opts);

struct StudyRow {
  std::size_t N = 0;
  std::size_t rep = 0;
  double sup_deviation = 0.0;  // sup over the grid of ||mu_hat(t) - mu(t)||_inf
};

struct StudySummary {
  std::size_t N = 0;
  double mean = 0.0;
  double stddev = 0.0;
};

struct ConvergenceStudy {
  std::vector<StudyRow> rows;
  std::vector<StudySummary> summary;  // one per N, in input order
};

ConvergenceStudy convergence_study(const Game& game, const ProtocolSet& protocols, const StatePolicyDist& mu0,
                                   const std::vector<std::size_t>& Ns, std::size_t replications,
                                   double horizon, std::uint64_t seed = 1, double sample_interval = 0.1);

struct PayoffEstimate {
  double keep = 0.0;       // J of the tagged player with its own policy
  double deviate = 0.0;    // J after switching to the deviation
  double gain = 0.0;       // deviate - keep
  double se_keep = 0.0, se_deviate = 0.0, se_gain = 0.0;
  std::size_t samples_keep = 0, samples_deviate = 0;
};

struct PayoffOptions {
  double horizon = 1000.0;
  double burn_in = 50.0;
  std::size_t batches = 20;
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;
};

// Long-run average reward of player j collected at its action instants
// after burn-in, with every policy held fixed, for its own policy and for
// `deviation`. Both runs use the same random stream. Throws Error when
// fewer than 100 rewards are collected.
PayoffEstimate estimate_average_payoff(const Game& game, const PopulationState& population, std::size_t j,
                                       std::size_t deviation, const PayoffOptions& opts);

// First player of class c holding policy u.
std::size_t find_player(const PopulationState& pop, std::size_t c, std::size_t u);

}  // namespace mfgevo

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mfgevo/agent_sim.h"
#include "mfgevo/equilibria.h"

namespace mfgevo {

// ---------------------------------------------------------------------------
// Game-spec files (JSON). Errors are SpecError with "<source>:<line>: ..." so
// the offending value can be found directly.
//
// {
//   "resources": [{"name": "r1", "intercept": 2.0, "slope": -1.5}, ...],  // congestion only
//   "classes": [{
//     "name": "players", "mass": 1.0, "action_rate": 1.0, "revision_rate": 1.0,
//     "states": ["s1", "s2"],
//     "actions": {"s1": ["a1", "a2"], "s2": ["a1", "a2"]},
//     "kernel": {"a1": [[0.7, 0.2], [0.3, 0.8]], ...},   // kernel[next][current]
//     "reward": {"family": "tabular", "params": {"table": {"s1": {"a1": 1.0}}}}
//   }]
// }
//
// Reward families: constant {value}, tabular {table: {state: {action: r}}},
// congestion {usage: {action: [resource, ...]}}, mac {power: {action: P},
// sigma2, channel, duration, beta}.

GameSpec load_game_spec(const std::string& path);
GameSpec parse_game_spec(const std::string& text, const std::string& source = "<string>");

// Inverse of parse_game_spec. Throws SpecError for custom rewards.
std::string game_spec_to_json(const GameSpec& spec);

// ---------------------------------------------------------------------------
// CSV output. Numbers are written with the shortest round-trip
// representation, so files are bitwise reproducible.

std::string format_double(double v);

// Long format: t,class,state,policy,mass. Policy labels read "s1->a1;s2->a2".
void write_trajectory_csv(std::ostream& os, const Game& game, const TrajectoryRecord& traj);
// t,residual,F[class:policy]...
void write_diagnostics_csv(std::ostream& os, const Game& game, const TrajectoryRecord& traj);
// N,rep,sup_deviation
void write_study_csv(std::ostream& os, const ConvergenceStudy& study);
// N,mean_sup_deviation,stddev
void write_study_summary_csv(std::ostream& os, const ConvergenceStudy& study);
// class,state,policy,mass,marginal,payoff: one row per state-policy cell.
void write_certificate_csv(std::ostream& os, const Game& game, const EquilibriumCertificate& cert);

// Reads a distribution in the trajectory format (the "t" column is
// optional; with it, the rows of the last time are used). Classes, states
// and policies may be given by name/label or by 1-based index. Cells not
// listed are zero. Throws SpecError with the line number.
StatePolicyDist read_distribution_csv(std::istream& is, const Game& game, const std::string& source = "<csv>");
StatePolicyDist load_distribution_csv(const std::string& path, const Game& game);

}  // namespace mfgevo

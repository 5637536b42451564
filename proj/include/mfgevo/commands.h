#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mfgevo/io.h"
#include "mfgevo/scenarios.h"

namespace mfgevo {

struct RunConfig {
  std::string scenario;       // empty for spec files
  std::string spec_path;      // game-spec file, when not a scenario
  // Empty selects dissatisfaction:2 for example3 trajectories and smith
  // everywhere else, including every equilibrium search.
  std::string protocol;
  double horizon = 10.0;
  double step = 0.0;
  double sample_interval = 0.1;
  double tol = 1e-9;
  std::size_t N = 1000;
  std::uint64_t seed = 1;
  std::size_t reps = 1;
  std::size_t multistart = 16;
  bool strict = false;
  std::string init;           // "", "uniform", a scenario name such as "fig2", or a CSV path
  std::string out_dir = ".";
  std::vector<std::size_t> study_Ns;
};

// Reads the keys of RunConfig (same names, "n" for N, "ns" for study_Ns)
// from a JSON object. Unknown keys throw SpecError.
void apply_config_json(RunConfig& cfg, const std::string& json_text, const std::string& source);

struct CommandOutcome {
  int status = 0;  // 0 success, 1 domain failure
  std::string summary;
  std::vector<std::string> files;
};

RevisionProtocol resolve_protocol(const RunConfig& cfg, bool solving = false);
StatePolicyDist resolve_initial(const Game& game, const RunConfig& cfg);
// Named distributions a scenario exposes besides "uniform".
std::vector<std::string> named_distributions(const std::string& scenario);
StatePolicyDist named_distribution(const Game& game, const std::string& scenario, const std::string& name);

// Errors from bad input (SpecError, DimensionError) propagate; domain
// failures are reported through CommandOutcome::status.
CommandOutcome cmd_integrate(const Game& game, const RunConfig& cfg);
CommandOutcome cmd_simulate(const Game& game, const RunConfig& cfg);
CommandOutcome cmd_equilibrium(const Game& game, const RunConfig& cfg);

}  // namespace mfgevo

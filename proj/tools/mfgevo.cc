// mfgevo command-line front end. Talks to the engine only through the C API.
#include <cstdio>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mfgevo/mfgevo_c.h"

namespace {

int exit_code(mfg_status s) {
  switch (s) {
    case MFG_OK:
      return 0;
    case MFG_ERR_ARGUMENT:
    case MFG_ERR_PARSE:
    case MFG_ERR_DIMENSION:
      return 2;
    default:
      return 1;
  }
}

int report(mfg_status s, const char* what) {
  std::cerr << "mfgevo: " << what << " failed (" << mfg_status_name(s) << "): " << mfg_last_error() << "\n";
  return exit_code(s);
}

struct Options {
  std::string config;
  std::map<std::string, std::string> values;  // config key -> flag value
  bool strict = false;
};

std::string take(mfg_config* cfg, const char* key) {
  char* v = nullptr;
  if (mfg_config_get(cfg, key, &v) != MFG_OK) return {};
  std::string s = v;
  mfg_string_free(v);
  return s;
}

int run(const std::string& command, const Options& opt) {
  mfg_config* cfg = nullptr;
  if (auto s = mfg_config_new(&cfg); s != MFG_OK) return report(s, "configuration");
  std::unique_ptr<mfg_config, void (*)(mfg_config*)> cfg_guard(cfg, mfg_config_free);
  if (!opt.config.empty())
    if (auto s = mfg_config_load_file(cfg, opt.config.c_str()); s != MFG_OK) return report(s, "reading the run config");
  for (const auto& [k, v] : opt.values)
    if (auto s = mfg_config_set(cfg, k.c_str(), v.c_str()); s != MFG_OK) return report(s, ("option --" + k).c_str());
  if (opt.strict) mfg_config_set(cfg, "strict", "true");

  const std::string scenario = take(cfg, "scenario"), spec = take(cfg, "spec");
  if (scenario.empty() == spec.empty()) {
    std::cerr << "mfgevo: give exactly one of --spec or --scenario\n";
    return 2;
  }
  mfg_game* game = nullptr;
  mfg_status s = scenario.empty() ? mfg_game_load_file(spec.c_str(), &game) : mfg_game_scenario(scenario.c_str(), &game);
  if (s != MFG_OK) return report(s, "loading the game");
  std::unique_ptr<mfg_game, void (*)(mfg_game*)> game_guard(game, mfg_game_free);

  if (command == "validate") {
    int ok = 0;
    char* text = nullptr;
    if (auto vs = mfg_game_validate(game, &ok, &text); vs != MFG_OK) return report(vs, "validation");
    std::cout << (ok ? "no issues\n" : text);
    mfg_string_free(text);
    return ok ? 0 : 1;
  }

  char* summary = nullptr;
  s = mfg_run(game, command.c_str(), cfg, &summary);
  if (summary) {
    std::cout << summary;
    mfg_string_free(summary);
  }
  if (s == MFG_ERR_DOMAIN) return 1;
  if (s != MFG_OK) return report(s, command.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean field games with evolutionary policy revision"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub) {
    auto flag = [&](const char* name, const char* key, const char* help) {
      sub->add_option_function<std::string>(name, [&opt, key](const std::string& v) { opt.values[key] = v; }, help);
    };
    sub->add_option("--config", opt.config, "JSON run config; flags override its values");
    flag("--spec", "spec", "game-spec JSON file");
    flag("--scenario", "scenario", "built-in game: example3, mac, congestion-demo");
    flag("--protocol", "protocol", "smith | bnn | ppi | dissatisfaction[:K] | null | JSON | file");
    flag("--horizon", "horizon", "time horizon");
    flag("--step", "step", "integration step (default 0.01 / max rate)");
    flag("--sample-interval", "sample_interval", "sampling grid spacing");
    flag("--tol", "tol", "certification tolerance");
    flag("--n", "n", "population size");
    flag("--seed", "seed", "master random seed");
    flag("--reps", "reps", "replications");
    flag("--multistart", "multistart", "number of solver starts");
    flag("--init", "init", "initial distribution: uniform, fig1, fig2, msne or a CSV file");
    flag("--out", "out", "output directory");
    flag("--ns", "ns", "convergence study population sizes, e.g. 100,1000,10000");
    sub->add_flag("--strict", opt.strict, "abort when revision rates exceed the revision clock");
  };

  for (const char* name : {"validate", "integrate", "simulate", "equilibrium"}) {
    static const std::map<std::string, std::string> help = {
        {"validate", "check a game spec and list every problem"},
        {"integrate", "integrate the mean dynamic"},
        {"simulate", "finite-population stochastic simulation"},
        {"equilibrium", "compute and certify equilibria"}};
    add_common(app.add_subcommand(name, help.at(name)));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  return run(command, opt);
}

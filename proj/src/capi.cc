#include "mfgevo/mfgevo_c.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <fstream>
#include <new>
#include <optional>
#include <sstream>

#include "mfgevo/commands.h"

using namespace mfgevo;

struct mfg_game {
  GameSpec spec;
  std::string scenario;
  std::optional<Game> game;
};

struct mfg_config {
  RunConfig cfg;
};

namespace {

thread_local std::string g_last_error;

mfg_status fail(mfg_status s, std::string msg) {
  g_last_error = std::move(msg);
  return s;
}

template <class Fn>
mfg_status guarded(Fn&& fn) {
  g_last_error.clear();
  try {
    return fn();
  } catch (const SpecError& e) {
    return fail(MFG_ERR_PARSE, e.what());
  } catch (const ValidationError& e) {
    return fail(MFG_ERR_VALIDATION, e.what());
  } catch (const PolicyCapError& e) {
    return fail(MFG_ERR_VALIDATION, e.what());
  } catch (const DimensionError& e) {
    return fail(MFG_ERR_DIMENSION, e.what());
  } catch (const AssumptionError& e) {
    return fail(MFG_ERR_ASSUMPTION, e.what());
  } catch (const IntegrationError& e) {
    return fail(MFG_ERR_INTEGRATION, e.what());
  } catch (const Error& e) {
    return fail(MFG_ERR_DOMAIN, e.what());
  } catch (const std::bad_alloc&) {
    return fail(MFG_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(MFG_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(MFG_ERR_INTERNAL, "unknown error");
  }
}

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

const Game& game_of(mfg_game* g) {
  if (!g->game) g->game = Game::create(g->spec);
  return *g->game;
}

std::size_t cell_count(const Game& game) {
  std::size_t n = 0;
  for (std::size_t c = 0; c < game.num_classes(); ++c) n += game.num_states(c) * game.num_policies(c);
  return n;
}

StatePolicyDist unflatten(const Game& game, const double* mu, std::size_t len) {
  if (len != cell_count(game))
    throw DimensionError("distribution has " + std::to_string(len) + " entries, the game has " +
                         std::to_string(cell_count(game)) + " cells");
  StatePolicyDist d = game.zero_state_policy();
  std::size_t k = 0;
  for (auto& b : d.classes)
    for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = mu[k++];
  return d;
}

void flatten(const Field& f, double* out) {
  std::size_t k = 0;
  for (const auto& b : f)
    for (Eigen::Index i = 0; i < b.size(); ++i) out[k++] = b.data()[i];
}

std::vector<std::size_t> parse_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    const unsigned long long v = std::stoull(item, &used);
    if (used != item.size()) throw std::invalid_argument(item);
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw SpecError("option '" + key + "': cannot parse '" + v + "' as a number");
}

std::uint64_t parse_count(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    if (!v.empty() && v[0] != '-') {
      const unsigned long long n = std::stoull(v, &used);
      if (used == v.size()) return n;
    }
  } catch (const std::exception&) {
  }
  throw SpecError("option '" + key + "': cannot parse '" + v + "' as a nonnegative integer");
}

}  // namespace

extern "C" {

MFG_API const char* mfg_version(void) { return "0.1.0"; }

MFG_API const char* mfg_last_error(void) { return g_last_error.c_str(); }

MFG_API const char* mfg_status_name(mfg_status s) {
  switch (s) {
    case MFG_OK: return "ok";
    case MFG_ERR_ARGUMENT: return "argument";
    case MFG_ERR_PARSE: return "parse";
    case MFG_ERR_VALIDATION: return "validation";
    case MFG_ERR_DIMENSION: return "dimension";
    case MFG_ERR_ASSUMPTION: return "assumption";
    case MFG_ERR_INTEGRATION: return "integration";
    case MFG_ERR_DOMAIN: return "domain";
    case MFG_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

MFG_API void mfg_string_free(char* s) { std::free(s); }

MFG_API mfg_status mfg_game_load_file(const char* path, mfg_game** out) {
  if (!path || !out) return fail(MFG_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    auto g = std::make_unique<mfg_game>();
    g->spec = load_game_spec(path);
    *out = g.release();
    return MFG_OK;
  });
}

MFG_API mfg_status mfg_game_load_string(const char* json, mfg_game** out) {
  if (!json || !out) return fail(MFG_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    auto g = std::make_unique<mfg_game>();
    g->spec = parse_game_spec(json);
    *out = g.release();
    return MFG_OK;
  });
}

MFG_API mfg_status mfg_game_scenario(const char* name, mfg_game** out) {
  if (!name || !out) return fail(MFG_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    auto g = std::make_unique<mfg_game>();
    g->game = scenario_game(name);
    g->spec = g->game->spec();
    g->scenario = name;
    *out = g.release();
    return MFG_OK;
  });
}

MFG_API void mfg_game_free(mfg_game* game) { delete game; }

MFG_API mfg_status mfg_game_validate(mfg_game* game, int* ok, char** report) {
  if (!game || !ok) return fail(MFG_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    const ValidationReport r = validate_game(game->spec);
    *ok = r.ok() ? 1 : 0;
    if (report) *report = dup_string(r.ok() ? std::string("ok\n") : r.to_string());
    return MFG_OK;
  });
}

MFG_API mfg_status mfg_game_to_json(mfg_game* game, char** json) {
  if (!game || !json) return fail(MFG_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    *json = dup_string(game_spec_to_json(game->spec));
    return MFG_OK;
  });
}

MFG_API mfg_status mfg_game_num_classes(mfg_game* game, size_t* classes) {
  if (!game || !classes) return fail(MFG_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    *classes = game_of(game).num_classes();
    return MFG_OK;
  });
}

MFG_API mfg_status mfg_game_class_shape(mfg_game* game, size_t cls, size_t* states, size_t* policies) {
  if (!game) return fail(MFG_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    const Game& g = game_of(game);
    if (cls >= g.num_classes()) return fail(MFG_ERR_DIMENSION, "class index out of range");
    if (states) *states = g.num_states(cls);
    if (policies) *policies = g.num_policies(cls);
    return MFG_OK;
  });
}

MFG_API mfg_status mfg_game_cells(mfg_game* game, size_t* cells) {
  if (!game || !cells) return fail(MFG_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    *cells = cell_count(game_of(game));
    return MFG_OK;
  });
}

MFG_API mfg_status mfg_game_policy_entries(mfg_game* game, size_t* entries) {
  if (!game || !entries) return fail(MFG_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    const Game& g = game_of(game);
    std::size_t n = 0;
    for (std::size_t c = 0; c < g.num_classes(); ++c) n += g.num_policies(c);
    *entries = n;
    return MFG_OK;
  });
}

MFG_API mfg_status mfg_game_distribution(mfg_game* game, const char* name, double* mu, size_t len) {
  if (!game || !name || !mu) return fail(MFG_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    const Game& g = game_of(game);
    if (len != cell_count(g)) return fail(MFG_ERR_DIMENSION, "output buffer has the wrong length");
    flatten(named_distribution(g, game->scenario, name).classes, mu);
    return MFG_OK;
  });
}

MFG_API mfg_status mfg_game_payoffs(mfg_game* game, const double* mu, size_t len, double* payoffs,
                                    size_t payoffs_len) {
  if (!game || !mu || !payoffs) return fail(MFG_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    const Game& g = game_of(game);
    const StatePolicyDist d = unflatten(g, mu, len);
    g.check(d, kIntegratedMassTolerance);
    const PayoffVector F = payoff_map(g, d);
    std::size_t n = 0;
    for (const auto& v : F.classes) n += static_cast<std::size_t>(v.size());
    if (payoffs_len != n) return fail(MFG_ERR_DIMENSION, "payoff buffer has the wrong length");
    std::size_t k = 0;
    for (const auto& v : F.classes)
      for (Eigen::Index u = 0; u < v.size(); ++u) payoffs[k++] = v[u];
    return MFG_OK;
  });
}

MFG_API mfg_status mfg_game_vector_field(mfg_game* game, const char* protocol, const double* mu, size_t len,
                                         double* dynamic, double* revision, double* total) {
  if (!game || !protocol || !mu) return fail(MFG_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    const Game& g = game_of(game);
    const StatePolicyDist d = unflatten(g, mu, len);
    g.check(d, kIntegratedMassTolerance);
    const FlowField f = vector_field(g, d, uniform_protocols(g, parse_protocol(protocol)));
    if (dynamic) flatten(f.dynamic, dynamic);
    if (revision) flatten(f.revision, revision);
    if (total) flatten(f.total, total);
    return MFG_OK;
  });
}

MFG_API mfg_status mfg_config_new(mfg_config** out) {
  if (!out) return fail(MFG_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    *out = new mfg_config();
    return MFG_OK;
  });
}

MFG_API void mfg_config_free(mfg_config* cfg) { delete cfg; }

MFG_API mfg_status mfg_config_set(mfg_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) return fail(MFG_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    RunConfig& c = cfg->cfg;
    const std::string k = key, v = value;
    if (k == "protocol") c.protocol = v;
    else if (k == "scenario") c.scenario = v;
    else if (k == "spec") c.spec_path = v;
    else if (k == "horizon") c.horizon = parse_double(k, v);
    else if (k == "step") c.step = parse_double(k, v);
    else if (k == "sample_interval") c.sample_interval = parse_double(k, v);
    else if (k == "tol") c.tol = parse_double(k, v);
    else if (k == "n") c.N = parse_count(k, v);
    else if (k == "seed") c.seed = parse_count(k, v);
    else if (k == "reps") c.reps = parse_count(k, v);
    else if (k == "multistart") c.multistart = parse_count(k, v);
    else if (k == "strict") c.strict = v == "1" || v == "true";
    else if (k == "init") c.init = v;
    else if (k == "out") c.out_dir = v;
    else if (k == "ns") {
      try {
        c.study_Ns = parse_list(v);
      } catch (const std::exception&) {
        throw SpecError("option 'ns': expected a comma-separated list of counts, got '" + v + "'");
      }
    } else {
      return fail(MFG_ERR_ARGUMENT, "unknown option '" + k + "'");
    }
    return MFG_OK;
  });
}

MFG_API mfg_status mfg_config_load_file(mfg_config* cfg, const char* path) {
  if (!cfg || !path) return fail(MFG_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    std::ifstream in(path);
    if (!in) throw SpecError(std::string("cannot open run config '") + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    apply_config_json(cfg->cfg, buf.str(), path);
    return MFG_OK;
  });
}

MFG_API mfg_status mfg_config_get(const mfg_config* cfg, const char* key, char** value) {
  if (!cfg || !key || !value) return fail(MFG_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    const std::string k = key;
    if (k == "scenario") *value = dup_string(cfg->cfg.scenario);
    else if (k == "spec") *value = dup_string(cfg->cfg.spec_path);
    else if (k == "out") *value = dup_string(cfg->cfg.out_dir);
    else return fail(MFG_ERR_ARGUMENT, "option '" + k + "' cannot be read back");
    return MFG_OK;
  });
}

MFG_API mfg_status mfg_run(mfg_game* game, const char* command, const mfg_config* cfg, char** summary) {
  if (!game || !command || !cfg) return fail(MFG_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    RunConfig rc = cfg->cfg;
    if (!game->scenario.empty()) rc.scenario = game->scenario;
    const Game& g = game_of(game);
    const std::string cmd = command;
    CommandOutcome out;
    if (cmd == "integrate") out = cmd_integrate(g, rc);
    else if (cmd == "simulate") out = cmd_simulate(g, rc);
    else if (cmd == "equilibrium") out = cmd_equilibrium(g, rc);
    else return fail(MFG_ERR_ARGUMENT, "unknown command '" + cmd + "'");
    if (summary) *summary = dup_string(out.summary);
    if (out.status != 0) return fail(MFG_ERR_DOMAIN, out.summary);
    return MFG_OK;
  });
}

}  // extern "C"

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "mfgevo/mfgevo_c.h"

namespace {

struct GameGuard {
  mfg_game* g = nullptr;
  ~GameGuard() { mfg_game_free(g); }
};

struct ConfigGuard {
  mfg_config* c = nullptr;
  ~ConfigGuard() { mfg_config_free(c); }
};

std::string take(char* s) {
  std::string out = s ? s : "";
  mfg_string_free(s);
  return out;
}

const char* kSpec = R"({"classes": [{"name": "p", "states": ["s1", "s2"],
  "actions": {"s1": ["a1"], "s2": ["a1", "a2"]},
  "kernel": {"a1": [[0.7, 0.2], [0.3, 0.8]], "a2": [[0.5, 0.7], [0.5, 0.3]]},
  "reward": {"family": "constant", "params": {"value": 1.0}}}]})";

}  // namespace

TEST_CASE("library metadata") {
  CHECK(std::strlen(mfg_version()) > 0);
  CHECK(std::string(mfg_status_name(MFG_OK)) == "ok");
  CHECK(std::string(mfg_status_name(MFG_ERR_PARSE)) == "parse");
}

TEST_CASE("scenario shapes and flows") {
  GameGuard gg;
  REQUIRE(mfg_game_scenario("example3", &gg.g) == MFG_OK);
  size_t classes = 0, states = 0, policies = 0, cells = 0, entries = 0;
  CHECK(mfg_game_num_classes(gg.g, &classes) == MFG_OK);
  CHECK(classes == 1);
  CHECK(mfg_game_class_shape(gg.g, 0, &states, &policies) == MFG_OK);
  CHECK(states == 2);
  CHECK(policies == 2);
  CHECK(mfg_game_cells(gg.g, &cells) == MFG_OK);
  CHECK(cells == 4);
  CHECK(mfg_game_policy_entries(gg.g, &entries) == MFG_OK);
  CHECK(entries == 2);
  CHECK(mfg_game_class_shape(gg.g, 3, &states, &policies) == MFG_ERR_DIMENSION);

  double mu[4];
  REQUIRE(mfg_game_distribution(gg.g, "fig1", mu, 4) == MFG_OK);
  const double fig1[4] = {0.08, 0.56, 0.12, 0.24};
  for (int i = 0; i < 4; ++i) CHECK(mu[i] == doctest::Approx(fig1[i]));

  double F[2];
  REQUIRE(mfg_game_payoffs(gg.g, mu, 4, F, 2) == MFG_OK);
  CHECK(F[0] == 1.0);
  CHECK(F[1] == 1.0);

  double fd[4], fr[4], v[4];
  REQUIRE(mfg_game_vector_field(gg.g, "dissatisfaction:2", mu, 4, fd, fr, v) == MFG_OK);
  const double expect_r[4] = {0.048, -0.048, -0.048, 0.048};
  for (int i = 0; i < 4; ++i) {
    CHECK(std::abs(fd[i]) <= 1e-12);
    CHECK(std::abs(fr[i] - expect_r[i]) <= 1e-12);
    CHECK(v[i] == fd[i] + fr[i]);
  }
  CHECK(mfg_game_vector_field(gg.g, "smith", mu, 4, nullptr, nullptr, v) == MFG_OK);
  CHECK(mfg_game_vector_field(gg.g, "smith", mu, 3, nullptr, nullptr, v) == MFG_ERR_DIMENSION);
  CHECK(std::string(mfg_last_error()).find("4 cells") != std::string::npos);
  CHECK(mfg_game_vector_field(gg.g, "replicator", mu, 4, nullptr, nullptr, v) == MFG_ERR_PARSE);
  CHECK(mfg_game_distribution(gg.g, "fig9", mu, 4) != MFG_OK);
}

TEST_CASE("errors are reported, not thrown") {
  mfg_game* g = nullptr;
  CHECK(mfg_game_scenario("nowhere", &g) == MFG_ERR_PARSE);
  CHECK(g == nullptr);
  CHECK(std::string(mfg_last_error()).find("nowhere") != std::string::npos);
  CHECK(mfg_game_scenario(nullptr, &g) == MFG_ERR_ARGUMENT);
  CHECK(mfg_game_load_file("/nonexistent/game.json", &g) == MFG_ERR_PARSE);
  CHECK(mfg_game_load_string("{\"classes\": [", &g) == MFG_ERR_PARSE);
  CHECK(std::string(mfg_last_error()).find(":1:") != std::string::npos);
  size_t n = 0;
  CHECK(mfg_game_num_classes(nullptr, &n) == MFG_ERR_ARGUMENT);
}

TEST_CASE("validation through the handle") {
  std::string broken = kSpec;
  broken.replace(broken.find("[0.5, 0.3]"), 10, "[0.5, 0.2]");
  GameGuard gg;
  REQUIRE(mfg_game_load_string(broken.c_str(), &gg.g) == MFG_OK);
  int ok = 1;
  char* report = nullptr;
  REQUIRE(mfg_game_validate(gg.g, &ok, &report) == MFG_OK);
  CHECK(ok == 0);
  CHECK(take(report).find("kernel-not-stochastic") != std::string::npos);
  size_t cells = 0;
  CHECK(mfg_game_cells(gg.g, &cells) == MFG_ERR_VALIDATION);

  GameGuard good;
  REQUIRE(mfg_game_load_string(kSpec, &good.g) == MFG_OK);
  REQUIRE(mfg_game_validate(good.g, &ok, &report) == MFG_OK);
  CHECK(ok == 1);
  take(report);
  char* json = nullptr;
  REQUIRE(mfg_game_to_json(good.g, &json) == MFG_OK);
  GameGuard again;
  CHECK(mfg_game_load_string(take(json).c_str(), &again.g) == MFG_OK);
}

TEST_CASE("configuration handle") {
  ConfigGuard cg;
  REQUIRE(mfg_config_new(&cg.c) == MFG_OK);
  CHECK(mfg_config_set(cg.c, "horizon", "2.5") == MFG_OK);
  CHECK(mfg_config_set(cg.c, "horizon", "soon") == MFG_ERR_PARSE);
  CHECK(mfg_config_set(cg.c, "n", "-4") == MFG_ERR_PARSE);
  CHECK(mfg_config_set(cg.c, "speed", "1") == MFG_ERR_ARGUMENT);
  CHECK(mfg_config_set(cg.c, "ns", "10,x") == MFG_ERR_PARSE);
  CHECK(mfg_config_set(cg.c, "scenario", "mac") == MFG_OK);
  char* v = nullptr;
  REQUIRE(mfg_config_get(cg.c, "scenario", &v) == MFG_OK);
  CHECK(take(v) == "mac");
  CHECK(mfg_config_get(cg.c, "horizon", &v) == MFG_ERR_ARGUMENT);
  CHECK(mfg_config_load_file(cg.c, "/nonexistent/run.json") == MFG_ERR_PARSE);
}

TEST_CASE("running a command") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "mfgevo_capi_run";
  fs::remove_all(dir);
  GameGuard gg;
  REQUIRE(mfg_game_scenario("example3", &gg.g) == MFG_OK);
  ConfigGuard cg;
  REQUIRE(mfg_config_new(&cg.c) == MFG_OK);
  mfg_config_set(cg.c, "init", "fig2");
  mfg_config_set(cg.c, "horizon", "1");
  mfg_config_set(cg.c, "out", dir.c_str());
  char* summary = nullptr;
  REQUIRE(mfg_run(gg.g, "integrate", cg.c, &summary) == MFG_OK);
  CHECK(take(summary).find("rest point: true") != std::string::npos);
  CHECK(fs::exists(dir / "trajectory.csv"));
  CHECK(fs::exists(dir / "diagnostics.csv"));
  CHECK(fs::exists(dir / "certificate.json"));
  CHECK(mfg_run(gg.g, "plot", cg.c, &summary) == MFG_ERR_ARGUMENT);
  fs::remove_all(dir);
}

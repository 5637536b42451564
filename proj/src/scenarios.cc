#include "mfgevo/scenarios.h"

namespace mfgevo {

namespace {

Mat matrix(std::initializer_list<std::initializer_list<double>> rows) {
  Mat m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

StatePolicyDist two_by_two(const Game& game, double s1u1, double s2u1, double s1u2, double s2u2) {
  StatePolicyDist mu = game.zero_state_policy();
  mu.classes[0] << s1u1, s1u2, s2u1, s2u2;
  return mu;
}

}  // namespace

GameSpec example3_spec() {
  ClassSpec k;
  k.name = "players";
  k.mass = 1.0;
  k.action_rate = 1.0;
  k.revision_rate = 1.0;
  k.states = {"s1", "s2"};
  k.actions = {"a1", "a2"};
  k.admissible = {{0}, {0, 1}};
  k.kernel = {matrix({{0.7, 0.2}, {0.3, 0.8}}), matrix({{0.5, 0.7}, {0.5, 0.3}})};
  k.reward = std::make_shared<ConstantReward>(1.0);
  GameSpec spec;
  spec.classes.push_back(std::move(k));
  return spec;
}

Example3 build_example3() {
  Example3 ex{Game::create(example3_spec()), {}, make_dissatisfaction(2.0)};
  ex.named.emplace("fig1", two_by_two(ex.game, 0.08, 0.12, 0.56, 0.24));
  ex.named.emplace("fig2", two_by_two(ex.game, 0.30, 0.30, 0.25, 0.15));
  return ex;
}

// ---------------------------------------------------------------------------

CongestionDemo build_congestion_demo(bool constant) {
  auto model = congestion_demo_model(constant);
  return {Game::create(congestion_demo_spec(model)), model};
}

std::shared_ptr<const ResourceModel> congestion_demo_model(bool constant) {
  auto m = std::make_shared<ResourceModel>();
  m->resources = {"r1", "r2"};
  if (constant)
    m->reward = {{1.0, 0.0}, {1.0, 0.0}};
  else
    m->reward = {{2.0, -1.5}, {1.5, -1.0}};
  // actions per class: 0 uses r1, 1 uses r2
  m->usage = {{{0}, {1}}, {{0}, {1}}};
  m->rate = 1.0;
  return m;
}

GameSpec congestion_demo_spec(std::shared_ptr<const ResourceModel> model) {
  auto reward = std::make_shared<CongestionReward>(model);
  GameSpec spec;
  {
    ClassSpec k;
    k.name = "commuters";
    k.mass = 0.6;
    k.action_rate = model->rate;
    k.revision_rate = 1.0;
    k.states = {"low", "high"};
    k.actions = {"r1", "r2"};
    k.admissible = {{0}, {0, 1}};
    k.kernel = {matrix({{0.6, 0.3}, {0.4, 0.7}}), matrix({{0.5, 0.5}, {0.5, 0.5}})};
    k.reward = reward;
    spec.classes.push_back(std::move(k));
  }
  {
    ClassSpec k;
    k.name = "couriers";
    k.mass = 0.4;
    k.action_rate = model->rate;
    k.revision_rate = 1.0;
    k.states = {"low", "high"};
    k.actions = {"r1", "r2"};
    k.admissible = {{1}, {0, 1}};
    k.kernel = {matrix({{0.5, 0.2}, {0.5, 0.8}}), matrix({{0.5, 0.6}, {0.5, 0.4}})};
    k.reward = reward;
    spec.classes.push_back(std::move(k));
  }
  return spec;
}

Game scenario_game(const std::string& name) {
  if (name == "example3") return Game::create(example3_spec());
  if (name == "mac") return build_mac(default_mac_params());
  if (name == "congestion-demo") return build_congestion_demo().game;
  throw SpecError("unknown scenario '" + name + "' (expected example3, mac or congestion-demo)");
}

}  // namespace mfgevo

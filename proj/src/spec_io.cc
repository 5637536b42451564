#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "mfgevo/io.h"

namespace mfgevo {

namespace {

using Json = nlohmann::ordered_json;

// Maps every value of a syntactically valid JSON text to the line it
// starts on, keyed by JSON-pointer-like paths ("/classes/0/kernel/a1").
class LineIndex {
 public:
  explicit LineIndex(const std::string& text) : s_(text) {
    skip_ws();
    if (pos_ < s_.size()) value("");
  }

  int line_of(std::string path) const {
    while (true) {
      auto it = lines_.find(path);
      if (it != lines_.end()) return it->second;
      if (path.empty()) return 1;
      path.erase(path.rfind('/'));
    }
  }

 private:
  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\n' || s_[pos_] == '\r')) {
      if (s_[pos_] == '\n') ++line_;
      ++pos_;
    }
  }

  std::string string_token() {
    std::string out;
    ++pos_;  // opening quote
    while (pos_ < s_.size() && s_[pos_] != '"') {
      if (s_[pos_] == '\\' && pos_ + 1 < s_.size()) ++pos_;
      out += s_[pos_++];
    }
    ++pos_;
    return out;
  }

  void value(const std::string& path) {
    lines_[path] = line_;
    if (pos_ >= s_.size()) return;
    const char ch = s_[pos_];
    if (ch == '{') {
      ++pos_;
      skip_ws();
      while (pos_ < s_.size() && s_[pos_] != '}') {
        std::string key = string_token();
        skip_ws();
        ++pos_;  // ':'
        skip_ws();
        value(path + "/" + key);
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == ',') ++pos_;
        skip_ws();
      }
      ++pos_;
    } else if (ch == '[') {
      ++pos_;
      skip_ws();
      std::size_t i = 0;
      while (pos_ < s_.size() && s_[pos_] != ']') {
        value(path + "/" + std::to_string(i++));
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == ',') ++pos_;
        skip_ws();
      }
      ++pos_;
    } else if (ch == '"') {
      string_token();
    } else {
      while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != '}' && s_[pos_] != ']' && s_[pos_] != ' ' &&
             s_[pos_] != '\n' && s_[pos_] != '\r' && s_[pos_] != '\t')
        ++pos_;
    }
  }

  const std::string& s_;
  std::size_t pos_ = 0;
  int line_ = 1;
  std::map<std::string, int> lines_;
};

class Loader {
 public:
  Loader(const std::string& text, std::string source) : index_(text), source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& path, const std::string& msg) const {
    std::ostringstream os;
    os << source_ << ":" << index_.line_of(path) << ": " << (path.empty() ? "/" : path) << ": " << msg;
    throw SpecError(os.str());
  }

  const Json& field(const Json& obj, const std::string& path, const char* key) const {
    if (!obj.is_object()) fail(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(path, std::string("missing field '") + key + "'");
    return *it;
  }

  double number(const Json& v, const std::string& path) const {
    if (!v.is_number()) fail(path, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(path, "number is not finite");
    return d;
  }

  double number_or(const Json& obj, const std::string& path, const char* key, double dflt) const {
    auto it = obj.find(key);
    return it == obj.end() ? dflt : number(*it, path + "/" + key);
  }

  std::string text(const Json& v, const std::string& path) const {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
  }

  static std::size_t index_of(const std::vector<std::string>& names, const std::string& n) {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == n) return i;
    return names.size();
  }

  GameSpec load(const Json& root) {
    GameSpec spec;
    if (!root.is_object()) fail("", "top level must be an object");
    std::shared_ptr<ResourceModel> resources;
    if (auto it = root.find("resources"); it != root.end()) {
      if (!it->is_array()) fail("/resources", "expected an array");
      resources = std::make_shared<ResourceModel>();
      for (std::size_t r = 0; r < it->size(); ++r) {
        const std::string p = "/resources/" + std::to_string(r);
        const Json& e = (*it)[r];
        resources->resources.push_back(text(field(e, p, "name"), p + "/name"));
        AffineResourceReward w;
        w.intercept = number(field(e, p, "intercept"), p + "/intercept");
        w.slope = number_or(e, p, "slope", 0.0);
        resources->reward.push_back(w);
      }
    }
    const Json& classes = field(root, "", "classes");
    if (!classes.is_array()) fail("/classes", "expected an array");
    for (std::size_t c = 0; c < classes.size(); ++c)
      spec.classes.push_back(load_class(classes[c], "/classes/" + std::to_string(c), c, resources));

    if (resources) {
      bool any = false;
      double rate = 0.0;
      for (std::size_t c = 0; c < spec.classes.size(); ++c) {
        if (!congestion_[c]) continue;
        if (any && spec.classes[c].action_rate != rate)
          fail("/classes/" + std::to_string(c) + "/action_rate",
               "congestion rewards need a common action rate across classes");
        rate = spec.classes[c].action_rate;
        any = true;
      }
      resources->rate = any ? rate : 1.0;
      resources->usage.resize(spec.classes.size());
      for (std::size_t c = 0; c < spec.classes.size(); ++c)
        if (resources->usage[c].empty()) resources->usage[c].resize(spec.classes[c].num_actions());
    }
    return spec;
  }

 private:
  ClassSpec load_class(const Json& e, const std::string& p, std::size_t c,
                       const std::shared_ptr<ResourceModel>& resources) {
    ClassSpec k;
    k.name = e.contains("name") ? text(e["name"], p + "/name") : "class" + std::to_string(c + 1);
    k.mass = number_or(e, p, "mass", 1.0);
    k.action_rate = number_or(e, p, "action_rate", 1.0);
    k.revision_rate = number_or(e, p, "revision_rate", 1.0);

    const Json& states = field(e, p, "states");
    if (!states.is_array()) fail(p + "/states", "expected an array of state names");
    for (std::size_t s = 0; s < states.size(); ++s) {
      std::string name = text(states[s], p + "/states/" + std::to_string(s));
      if (index_of(k.states, name) != k.states.size()) fail(p + "/states/" + std::to_string(s), "duplicate state '" + name + "'");
      k.states.push_back(std::move(name));
    }

    const Json& actions = field(e, p, "actions");
    if (!actions.is_object()) fail(p + "/actions", "expected an object mapping states to action lists");
    for (auto it = actions.begin(); it != actions.end(); ++it)
      if (index_of(k.states, it.key()) == k.states.size())
        fail(p + "/actions/" + it.key(), "unknown state '" + it.key() + "'");
    k.admissible.resize(k.states.size());
    for (std::size_t s = 0; s < k.states.size(); ++s) {
      const std::string sp = p + "/actions/" + k.states[s];
      auto it = actions.find(k.states[s]);
      if (it == actions.end()) fail(p + "/actions", "no action list for state '" + k.states[s] + "'");
      if (!it->is_array()) fail(sp, "expected an array of action names");
      for (std::size_t i = 0; i < it->size(); ++i) {
        const std::string a = text((*it)[i], sp + "/" + std::to_string(i));
        std::size_t idx = index_of(k.actions, a);
        if (idx == k.actions.size()) k.actions.push_back(a);
        if (std::find(k.admissible[s].begin(), k.admissible[s].end(), idx) != k.admissible[s].end())
          fail(sp + "/" + std::to_string(i), "action '" + a + "' listed twice");
        k.admissible[s].push_back(idx);
      }
    }

    const Json& kernel = field(e, p, "kernel");
    if (!kernel.is_object()) fail(p + "/kernel", "expected an object mapping actions to matrices");
    for (auto it = kernel.begin(); it != kernel.end(); ++it)
      if (index_of(k.actions, it.key()) == k.actions.size())
        fail(p + "/kernel/" + it.key(), "kernel given for unknown action '" + it.key() + "'");
    // Action indices follow the key order of "kernel", which is the order the writer uses.
    {
      std::vector<std::string> order;
      for (auto it = kernel.begin(); it != kernel.end(); ++it) order.push_back(it.key());
      for (const auto& a : k.actions)
        if (index_of(order, a) == order.size()) order.push_back(a);
      for (auto& list : k.admissible)
        for (auto& idx : list) idx = index_of(order, k.actions[idx]);
      k.actions = std::move(order);
    }
    const auto n = static_cast<Eigen::Index>(k.states.size());
    for (const auto& a : k.actions) {
      const std::string kp = p + "/kernel/" + a;
      auto it = kernel.find(a);
      if (it == kernel.end()) fail(p + "/kernel", "no kernel for action '" + a + "'");
      if (!it->is_array() || it->size() != k.states.size())
        fail(kp, "expected " + std::to_string(n) + " rows (one per next state)");
      Mat m(n, n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const Json& row = (*it)[static_cast<std::size_t>(i)];
        const std::string rp = kp + "/" + std::to_string(i);
        if (!row.is_array() || row.size() != k.states.size())
          fail(rp, "expected " + std::to_string(n) + " entries (one per current state)");
        for (Eigen::Index j = 0; j < n; ++j)
          m(i, j) = number(row[static_cast<std::size_t>(j)], rp + "/" + std::to_string(j));
      }
      k.kernel.push_back(std::move(m));
    }

    congestion_.push_back(false);
    if (auto it = e.find("reward"); it != e.end()) k.reward = load_reward(*it, p + "/reward", k, c, resources);
    return k;
  }

  std::shared_ptr<const RewardFunction> load_reward(const Json& r, const std::string& p, const ClassSpec& k,
                                                    std::size_t c, const std::shared_ptr<ResourceModel>& resources) {
    const std::string family = text(field(r, p, "family"), p + "/family");
    static const Json empty = Json::object();
    const Json& params = r.contains("params") ? r["params"] : empty;
    const std::string pp = p + "/params";
    if (!params.is_object()) fail(pp, "expected an object");

    if (family == "constant") return std::make_shared<ConstantReward>(number(field(params, pp, "value"), pp + "/value"));

    if (family == "tabular") {
      const Json& table = field(params, pp, "table");
      const std::string tp = pp + "/table";
      if (!table.is_object()) fail(tp, "expected an object mapping states to {action: reward}");
      RowMat t = RowMat::Zero(static_cast<Eigen::Index>(k.num_states()), static_cast<Eigen::Index>(k.num_actions()));
      for (auto it = table.begin(); it != table.end(); ++it) {
        const std::size_t s = index_of(k.states, it.key());
        if (s == k.states.size()) fail(tp + "/" + it.key(), "unknown state '" + it.key() + "'");
        if (!it->is_object()) fail(tp + "/" + it.key(), "expected an object mapping actions to rewards");
        for (auto jt = it->begin(); jt != it->end(); ++jt) {
          const std::string ap = tp + "/" + it.key() + "/" + jt.key();
          const std::size_t a = index_of(k.actions, jt.key());
          if (a == k.actions.size() || !k.is_admissible(s, a))
            fail(ap, "action '" + jt.key() + "' is not admissible in state '" + it.key() + "'");
          t(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a)) = number(*jt, ap);
        }
      }
      for (std::size_t s = 0; s < k.num_states(); ++s)
        for (std::size_t a : k.admissible[s]) {
          auto st = table.find(k.states[s]);
          if (st == table.end() || !st->contains(k.actions[a]))
            fail(tp, "missing reward for state '" + k.states[s] + "', action '" + k.actions[a] + "'");
        }
      return std::make_shared<TabularReward>(std::move(t));
    }

    if (family == "congestion") {
      if (!resources) fail(p, "congestion rewards need a top-level 'resources' list");
      const Json& usage = field(params, pp, "usage");
      const std::string up = pp + "/usage";
      if (!usage.is_object()) fail(up, "expected an object mapping actions to resource lists");
      if (resources->usage.size() <= c) resources->usage.resize(c + 1);
      auto& table = resources->usage[c];
      table.assign(k.num_actions(), {});
      for (auto it = usage.begin(); it != usage.end(); ++it) {
        const std::size_t a = index_of(k.actions, it.key());
        if (a == k.actions.size()) fail(up + "/" + it.key(), "unknown action '" + it.key() + "'");
        if (!it->is_array()) fail(up + "/" + it.key(), "expected an array of resource names");
        for (std::size_t i = 0; i < it->size(); ++i) {
          const std::string rp = up + "/" + it.key() + "/" + std::to_string(i);
          const std::string name = text((*it)[i], rp);
          const std::size_t ri = index_of(resources->resources, name);
          if (ri == resources->resources.size()) fail(rp, "unknown resource '" + name + "'");
          table[a].push_back(ri);
        }
      }
      congestion_.back() = true;
      return std::make_shared<CongestionReward>(resources);
    }

    if (family == "mac") {
      MacReward::Params mp;
      const Json& power = field(params, pp, "power");
      if (!power.is_object()) fail(pp + "/power", "expected an object mapping actions to powers");
      mp.power.assign(k.num_actions(), 0.0);
      for (auto it = power.begin(); it != power.end(); ++it) {
        const std::size_t a = index_of(k.actions, it.key());
        if (a == k.actions.size()) fail(pp + "/power/" + it.key(), "unknown action '" + it.key() + "'");
        mp.power[a] = number(*it, pp + "/power/" + it.key());
      }
      mp.sigma2 = number_or(params, pp, "sigma2", 1.0);
      mp.channel = number_or(params, pp, "channel", 1.0);
      mp.duration = number_or(params, pp, "duration", 1.0);
      mp.beta = number_or(params, pp, "beta", 0.0);
      mp.action_rate = k.action_rate;
      if (!(mp.sigma2 > 0.0)) fail(pp + "/sigma2", "noise power must be positive");
      return std::make_shared<MacReward>(std::move(mp));
    }

    fail(p + "/family", "unknown reward family '" + family + "' (constant, tabular, congestion, mac)");
  }

  LineIndex index_;
  std::string source_;
  std::vector<bool> congestion_;
};

}  // namespace

GameSpec parse_game_spec(const std::string& text, const std::string& source) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1;
    const std::size_t upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < upto; ++i)
      if (text[i] == '\n') ++line;
    std::string msg = e.what();
    if (auto k = msg.find("parse error"); k != std::string::npos) msg = msg.substr(k);
    throw SpecError(source + ":" + std::to_string(line) + ": " + msg);
  }
  Loader loader(text, source);
  return loader.load(root);
}

GameSpec load_game_spec(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SpecError("cannot open game spec '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_game_spec(buf.str(), path);
}

std::string game_spec_to_json(const GameSpec& spec) {
  Json root;
  std::shared_ptr<const ResourceModel> model;
  for (const auto& k : spec.classes)
    if (auto* cr = dynamic_cast<const CongestionReward*>(k.reward.get())) {
      if (model && model != cr->model()) throw SpecError("classes use different resource models");
      model = cr->model();
    }
  if (model) {
    Json res = Json::array();
    for (std::size_t r = 0; r < model->resources.size(); ++r)
      res.push_back({{"name", model->resources[r]},
                     {"intercept", model->reward[r].intercept},
                     {"slope", model->reward[r].slope}});
    root["resources"] = res;
  }
  Json classes = Json::array();
  for (std::size_t c = 0; c < spec.classes.size(); ++c) {
    const ClassSpec& k = spec.classes[c];
    Json j;
    j["name"] = k.name;
    j["mass"] = k.mass;
    j["action_rate"] = k.action_rate;
    j["revision_rate"] = k.revision_rate;
    j["states"] = k.states;
    Json actions = Json::object();
    for (std::size_t s = 0; s < k.num_states(); ++s) {
      Json list = Json::array();
      for (std::size_t a : k.admissible[s]) list.push_back(k.actions.at(a));
      actions[k.states[s]] = list;
    }
    j["actions"] = actions;
    Json kernel = Json::object();
    for (std::size_t a = 0; a < k.num_actions(); ++a) {
      Json rows = Json::array();
      for (Eigen::Index i = 0; i < k.kernel[a].rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index jj = 0; jj < k.kernel[a].cols(); ++jj) row.push_back(k.kernel[a](i, jj));
        rows.push_back(row);
      }
      kernel[k.actions[a]] = rows;
    }
    j["kernel"] = kernel;

    if (k.reward) {
      if (!k.reward->serializable())
        throw SpecError("class '" + k.name + "': custom reward '" + k.reward->family() + "' cannot be serialized");
      Json r;
      r["family"] = k.reward->family();
      Json params = Json::object();
      if (auto* cr = dynamic_cast<const ConstantReward*>(k.reward.get())) {
        params["value"] = cr->constant();
      } else if (auto* tr = dynamic_cast<const TabularReward*>(k.reward.get())) {
        Json table = Json::object();
        for (std::size_t s = 0; s < k.num_states(); ++s) {
          Json row = Json::object();
          for (std::size_t a : k.admissible[s])
            row[k.actions[a]] = tr->table()(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a));
          table[k.states[s]] = row;
        }
        params["table"] = table;
      } else if (dynamic_cast<const CongestionReward*>(k.reward.get())) {
        Json usage = Json::object();
        for (std::size_t a = 0; a < k.num_actions(); ++a) {
          Json list = Json::array();
          if (c < model->usage.size() && a < model->usage[c].size())
            for (std::size_t r : model->usage[c][a]) list.push_back(model->resources[r]);
          usage[k.actions[a]] = list;
        }
        params["usage"] = usage;
      } else if (auto* mr = dynamic_cast<const MacReward*>(k.reward.get())) {
        const auto& mp = mr->params();
        Json power = Json::object();
        for (std::size_t a = 0; a < k.num_actions() && a < mp.power.size(); ++a) power[k.actions[a]] = mp.power[a];
        params["power"] = power;
        params["sigma2"] = mp.sigma2;
        params["channel"] = mp.channel;
        params["duration"] = mp.duration;
        params["beta"] = mp.beta;
      } else {
        throw SpecError("class '" + k.name + "': reward family '" + k.reward->family() + "' has no file form");
      }
      r["params"] = params;
      j["reward"] = r;
    }
    classes.push_back(j);
  }
  root["classes"] = classes;
  return root.dump(2) + "\n";
}

}  // namespace mfgevo

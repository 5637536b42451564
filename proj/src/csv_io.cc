#include <charconv>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "mfgevo/io.h"

namespace mfgevo {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_trajectory_csv(std::ostream& os, const Game& game, const TrajectoryRecord& traj) {
  os << "t,class,state,policy,mass\n";
  for (std::size_t k = 0; k < traj.t.size(); ++k) {
    const std::string t = format_double(traj.t[k]);
    for (std::size_t c = 0; c < game.num_classes(); ++c) {
      const ClassSpec& cls = game.cls(c);
      const auto& b = traj.mu[k].classes[c];
      for (std::size_t s = 0; s < game.num_states(c); ++s)
        for (std::size_t u = 0; u < game.num_policies(c); ++u)
          os << t << ',' << cls.name << ',' << cls.states[s] << ',' << game.policy(c, u).label(cls) << ','
             << format_double(b(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(u))) << '\n';
    }
  }
}

void write_diagnostics_csv(std::ostream& os, const Game& game, const TrajectoryRecord& traj) {
  const bool res = !traj.residual.empty();
  const bool pay = !traj.payoffs.empty();
  os << 't';
  if (res) os << ",residual";
  if (pay)
    for (std::size_t c = 0; c < game.num_classes(); ++c)
      for (std::size_t u = 0; u < game.num_policies(c); ++u)
        os << ",F[" << game.cls(c).name << ':' << game.policy(c, u).label(game.cls(c)) << ']';
  os << '\n';
  for (std::size_t k = 0; k < traj.t.size(); ++k) {
    os << format_double(traj.t[k]);
    if (res) os << ',' << format_double(traj.residual[k]);
    if (pay)
      for (const auto& v : traj.payoffs[k].classes)
        for (Eigen::Index u = 0; u < v.size(); ++u) os << ',' << format_double(v[u]);
    os << '\n';
  }
}

void write_study_csv(std::ostream& os, const ConvergenceStudy& study) {
  os << "N,rep,sup_deviation\n";
  for (const auto& r : study.rows) os << r.N << ',' << r.rep << ',' << format_double(r.sup_deviation) << '\n';
}

void write_study_summary_csv(std::ostream& os, const ConvergenceStudy& study) {
  os << "N,mean_sup_deviation,stddev\n";
  for (const auto& s : study.summary)
    os << s.N << ',' << format_double(s.mean) << ',' << format_double(s.stddev) << '\n';
}

void write_certificate_csv(std::ostream& os, const Game& game, const EquilibriumCertificate& cert) {
  os << "class,state,policy,mass,marginal,payoff\n";
  for (std::size_t c = 0; c < game.num_classes(); ++c) {
    const ClassSpec& cls = game.cls(c);
    for (std::size_t s = 0; s < game.num_states(c); ++s)
      for (std::size_t u = 0; u < game.num_policies(c); ++u) {
        const auto ui = static_cast<Eigen::Index>(u);
        os << cls.name << ',' << cls.states[s] << ',' << game.policy(c, u).label(cls) << ','
           << format_double(cert.mu.classes[c](static_cast<Eigen::Index>(s), ui)) << ','
           << format_double(cert.marginal.classes[c][ui]) << ',' << format_double(cert.payoffs.classes[c][ui])
           << '\n';
      }
  }
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

// Name first, then 1-based index.
std::size_t resolve(const std::string& token, const std::vector<std::string>& names) {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == token) return i;
  std::size_t idx = 0;
  auto [p, ec] = std::from_chars(token.data(), token.data() + token.size(), idx);
  if (ec == std::errc() && p == token.data() + token.size() && idx >= 1 && idx <= names.size()) return idx - 1;
  return names.size();
}

bool parse_number(const std::string& s, double& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

}  // namespace

StatePolicyDist read_distribution_csv(std::istream& is, const Game& game, const std::string& source) {
  auto fail = [&](std::size_t line, const std::string& msg) -> void {
    throw SpecError(source + ":" + std::to_string(line) + ": " + msg);
  };
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(is, line)) fail(1, "empty distribution file");
  const auto header = split(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* need : {"class", "state", "policy", "mass"})
    if (!col.count(need)) fail(1, std::string("missing column '") + need + "'");
  const bool timed = col.count("t") > 0;

  std::vector<std::string> class_names;
  for (std::size_t c = 0; c < game.num_classes(); ++c) class_names.push_back(game.cls(c).name);
  std::vector<std::vector<std::string>> labels(game.num_classes());
  for (std::size_t c = 0; c < game.num_classes(); ++c)
    for (std::size_t u = 0; u < game.num_policies(c); ++u) labels[c].push_back(game.policy(c, u).label(game.cls(c)));

  double last_t = -std::numeric_limits<double>::infinity();
  StatePolicyDist mu = game.zero_state_policy();
  bool any = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto f = split(line);
    if (f.size() != header.size()) fail(lineno, "expected " + std::to_string(header.size()) + " fields");
    if (timed) {
      double t = 0.0;
      if (!parse_number(f[col["t"]], t)) fail(lineno, "bad time value '" + f[col["t"]] + "'");
      if (t < last_t) fail(lineno, "time column must be nondecreasing");
      if (t > last_t) {
        mu = game.zero_state_policy();
        last_t = t;
      }
    }
    const std::size_t c = resolve(f[col["class"]], class_names);
    if (c == class_names.size()) fail(lineno, "unknown class '" + f[col["class"]] + "'");
    const std::size_t s = resolve(f[col["state"]], game.cls(c).states);
    if (s == game.num_states(c)) fail(lineno, "unknown state '" + f[col["state"]] + "'");
    const std::size_t u = resolve(f[col["policy"]], labels[c]);
    if (u == labels[c].size()) fail(lineno, "unknown policy '" + f[col["policy"]] + "'");
    double m = 0.0;
    if (!parse_number(f[col["mass"]], m)) fail(lineno, "bad mass value '" + f[col["mass"]] + "'");
    mu(c, s, u) = m;
    any = true;
  }
  if (!any) fail(lineno, "no distribution rows");
  try {
    game.check(mu, kIntegratedMassTolerance);
  } catch (const Error& e) {
    throw SpecError(source + ": " + e.what());
  }
  return mu;
}

StatePolicyDist load_distribution_csv(const std::string& path, const Game& game) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open distribution file '" + path + "'");
  return read_distribution_csv(in, game, path);
}

}  // namespace mfgevo

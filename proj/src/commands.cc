#include "mfgevo/commands.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace mfgevo {

namespace fs = std::filesystem;

void apply_config_json(RunConfig& cfg, const std::string& json_text, const std::string& source) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(source + ": " + e.what());
  }
  if (!j.is_object()) throw SpecError(source + ": run config must be a JSON object");
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& k = it.key();
      const auto& v = it.value();
      if (k == "scenario") cfg.scenario = v.get<std::string>();
      else if (k == "spec") cfg.spec_path = v.get<std::string>();
      else if (k == "protocol") cfg.protocol = v.is_string() ? v.get<std::string>() : v.dump();
      else if (k == "horizon") cfg.horizon = v.get<double>();
      else if (k == "step") cfg.step = v.get<double>();
      else if (k == "sample_interval") cfg.sample_interval = v.get<double>();
      else if (k == "tol") cfg.tol = v.get<double>();
      else if (k == "n") cfg.N = v.get<std::size_t>();
      else if (k == "seed") cfg.seed = v.get<std::uint64_t>();
      else if (k == "reps") cfg.reps = v.get<std::size_t>();
      else if (k == "multistart") cfg.multistart = v.get<std::size_t>();
      else if (k == "strict") cfg.strict = v.get<bool>();
      else if (k == "init") cfg.init = v.get<std::string>();
      else if (k == "out") cfg.out_dir = v.get<std::string>();
      else if (k == "ns") cfg.study_Ns = v.get<std::vector<std::size_t>>();
      else throw SpecError(source + ": unknown run-config key '" + k + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(source + ": " + e.what());
  }
}

RevisionProtocol resolve_protocol(const RunConfig& cfg, bool solving) {
  std::string text = cfg.protocol;
  if (text.empty()) text = cfg.scenario == "example3" && !solving ? "dissatisfaction:2" : "smith";
  RevisionProtocol p = parse_protocol(text);
  return cfg.strict ? p.with_strict(true) : p;
}

std::vector<std::string> named_distributions(const std::string& scenario) {
  if (scenario == "example3") return {"uniform", "fig1", "fig2"};
  if (scenario == "mac") return {"uniform", "msne"};
  return {"uniform"};
}

StatePolicyDist named_distribution(const Game& game, const std::string& scenario, const std::string& name) {
  if (name == "uniform") return uniform_state_policy(game);
  if (scenario == "example3") {
    auto ex = build_example3();
    if (auto it = ex.named.find(name); it != ex.named.end()) return it->second;
  }
  if (scenario == "mac" && name == "msne")
    return stationary_lift(game, solve_mac_msne(default_mac_params()).marginal);
  throw SpecError("unknown distribution '" + name + "'" +
                  (scenario.empty() ? std::string() : " for scenario '" + scenario + "'"));
}

StatePolicyDist resolve_initial(const Game& game, const RunConfig& cfg) {
  if (cfg.init.empty()) return uniform_state_policy(game);
  for (const auto& n : named_distributions(cfg.scenario))
    if (n == cfg.init) return named_distribution(game, cfg.scenario, n);
  return load_distribution_csv(cfg.init, game);
}

namespace {

std::string prepare(const RunConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw SpecError("cannot create output directory '" + cfg.out_dir + "': " + ec.message());
  return cfg.out_dir;
}

template <class Fn>
std::string write_file(const std::string& dir, const std::string& name, Fn&& fn) {
  const std::string path = (fs::path(dir) / name).string();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SpecError("cannot write '" + path + "'");
  fn(out);
  return path;
}

void check_positive(double v, const char* what) {
  if (!(v > 0.0)) throw SpecError(std::string(what) + " must be positive");
}

}  // namespace

CommandOutcome cmd_integrate(const Game& game, const RunConfig& cfg) {
  if (cfg.horizon < 0.0) throw SpecError("horizon must be nonnegative");
  const RevisionProtocol protocol = resolve_protocol(cfg);
  const StatePolicyDist mu0 = resolve_initial(game, cfg);
  const std::string dir = prepare(cfg);

  IntegrateOptions io;
  io.horizon = cfg.horizon;
  io.step = cfg.step;
  io.sample_interval = cfg.sample_interval;
  CommandOutcome out;
  std::ostringstream os;
  TrajectoryRecord traj;
  try {
    traj = integrate(game, mu0, uniform_protocols(game, protocol), io);
  } catch (const IntegrationError& e) {
    out.status = 1;
    os << "integration aborted at t = " << format_double(e.time()) << ": " << e.what() << "\n";
    out.summary = os.str();
    return out;
  }
  out.files.push_back(write_file(dir, "trajectory.csv", [&](std::ostream& f) { write_trajectory_csv(f, game, traj); }));
  out.files.push_back(write_file(dir, "diagnostics.csv", [&](std::ostream& f) { write_diagnostics_csv(f, game, traj); }));

  const auto cert = verify_msne(game, traj.final_state(), cfg.tol, {protocol});
  os << "protocol: " << protocol.name() << "\n"
     << "method: " << traj.method << ", step " << format_double(traj.step) << ", samples " << traj.t.size() << "\n"
     << "final time: " << format_double(traj.t.back()) << "\n"
     << "final residual: " << format_double(traj.residual.back()) << "\n"
     << "clipped steps: " << traj.clipped_steps << "\n"
     << "msne: " << (cert.is_msne ? "true" : "false") << " (gap " << format_double(cert.max_gap())
     << ", conditional deviation " << format_double(cert.max_conditional_deviation()) << ")\n"
     << "rest point: " << (cert.is_rest_point(protocol.name()) ? "true" : "false") << "\n";
  out.files.push_back(write_file(dir, "certificate.json", [&](std::ostream& f) { f << cert.to_json() << "\n"; }));
  out.summary = os.str();
  return out;
}

CommandOutcome cmd_simulate(const Game& game, const RunConfig& cfg) {
  if (cfg.horizon < 0.0) throw SpecError("horizon must be nonnegative");
  check_positive(cfg.sample_interval, "sample interval");
  if (cfg.reps == 0) throw SpecError("replications must be at least 1");
  const RevisionProtocol protocol = resolve_protocol(cfg);
  const ProtocolSet protocols = uniform_protocols(game, protocol);
  const StatePolicyDist mu0 = resolve_initial(game, cfg);
  const std::string dir = prepare(cfg);
  CommandOutcome out;
  std::ostringstream os;

  if (!cfg.study_Ns.empty()) {
    ConvergenceStudy study;
    try {
      study = convergence_study(game, protocols, mu0, cfg.study_Ns, cfg.reps, cfg.horizon, cfg.seed,
                                cfg.sample_interval);
    } catch (const AssumptionError& e) {
      out.status = 1;
      out.summary = std::string("simulation aborted: ") + e.what() + "\n";
      return out;
    }
    out.files.push_back(write_file(dir, "study.csv", [&](std::ostream& f) { write_study_csv(f, study); }));
    out.files.push_back(write_file(dir, "study_summary.csv", [&](std::ostream& f) { write_study_summary_csv(f, study); }));
    os << "N,mean_sup_deviation,stddev\n";
    for (const auto& s : study.summary)
      os << s.N << ',' << format_double(s.mean) << ',' << format_double(s.stddev) << "\n";
    out.summary = os.str();
    return out;
  }

  if (cfg.N == 0) throw SpecError("population size must be at least 1");
  IntegrateOptions io;
  io.horizon = cfg.horizon;
  io.sample_interval = cfg.sample_interval;
  io.record_payoffs = false;
  io.step = cfg.step > 0.0 ? cfg.step : cfg.sample_interval / std::ceil(cfg.sample_interval / default_step(game) - 1e-9);
  TrajectoryRecord ode;
  try {
    ode = integrate(game, mu0, protocols, io);
  } catch (const IntegrationError& e) {
    out.status = 1;
    out.summary = "reference integration aborted at t = " + format_double(e.time()) + ": " + e.what() + "\n";
    return out;
  }

  std::vector<SimResult> runs(cfg.reps);
  std::vector<std::string> errors(cfg.reps);
  parallel_for(cfg.reps, [&](std::size_t r) {
    SimOptions so;
    so.horizon = cfg.horizon;
    so.sample_interval = cfg.sample_interval;
    so.seed = cfg.seed;
    so.stream = r;
    so.strict = cfg.strict;
    try {
      runs[r] = simulate(game, protocols, mu0, cfg.N, so);
    } catch (const AssumptionError& e) {
      errors[r] = e.what();
    }
  });
  for (std::size_t r = 0; r < cfg.reps; ++r)
    if (!errors[r].empty()) {
      out.status = 1;
      out.summary = "replication " + std::to_string(r) + " aborted: " + errors[r] + "\n";
      return out;
    }

  std::ostringstream summary;
  summary << "rep,N,action_events,revision_events,switches,rate_bound_violations,sup_deviation\n";
  for (std::size_t r = 0; r < cfg.reps; ++r) {
    const auto& tr = runs[r].trajectory;
    double sup = 0.0;
    for (std::size_t k = 0; k < std::min(tr.t.size(), ode.t.size()); ++k)
      sup = std::max(sup, max_abs_diff(tr.mu[k].classes, ode.mu[k].classes));
    out.files.push_back(write_file(dir, "sim_rep" + std::to_string(r) + ".csv",
                                   [&](std::ostream& f) { write_trajectory_csv(f, game, tr); }));
    summary << r << ',' << cfg.N << ',' << runs[r].action_events << ',' << runs[r].revision_events << ','
            << runs[r].switches << ',' << runs[r].rate_bound_violations << ',' << format_double(sup) << "\n";
  }
  const std::string table = summary.str();
  out.files.push_back(write_file(dir, "summary.csv", [&](std::ostream& f) { f << table; }));
  os << "protocol: " << protocol.name() << ", N = " << cfg.N << ", replications = " << cfg.reps << "\n" << table;
  out.summary = os.str();
  return out;
}

namespace {

CommandOutcome mac_equilibrium(const Game& game, const RunConfig& cfg, const std::string& dir) {
  const MacParams p = default_mac_params();
  const MacMsne msne = solve_mac_msne(p);
  const MacBsne bsne = solve_mac_bsne(p);
  CommandOutcome out;
  constexpr int kGrid = 101;
  out.files.push_back(write_file(dir, "mac_mixed_curves.csv", [&](std::ostream& f) {
    f << "x,J_u1,J_u0\n";
    for (int i = 0; i < kGrid; ++i) {
      const double x = static_cast<double>(i) / (kGrid - 1);
      auto [j1, j0] = mac_mixed_payoffs(x, p);
      f << format_double(x) << ',' << format_double(j1) << ',' << format_double(j0) << '\n';
    }
    auto [j1, j0] = mac_mixed_payoffs(msne.x, p);
    f << format_double(msne.x) << ',' << format_double(j1) << ',' << format_double(j0) << '\n';
  }));
  out.files.push_back(write_file(dir, "mac_behavioral_grid.csv", [&](std::ostream& f) {
    f << "q,h,J\n";
    for (int i = 0; i < kGrid; ++i)
      for (int k = 0; k < kGrid; ++k) {
        const double q = static_cast<double>(i) / (kGrid - 1), h = static_cast<double>(k) / (kGrid - 1);
        f << format_double(q) << ',' << format_double(h) << ',' << format_double(mac_deviation_payoff(q, h, p)) << '\n';
      }
  }));
  const auto cert = verify_ne_steady_state(game, msne.marginal, cfg.tol, {resolve_protocol(cfg, true)});
  out.files.push_back(write_file(dir, "mac_msne_certificate.json", [&](std::ostream& f) { f << cert.to_json() << "\n"; }));
  std::ostringstream os;
  os << "mac msne x* = " << format_double(msne.x) << " (interior " << (msne.interior ? "yes" : "no")
     << ", J(u1) - J(u0) = " << format_double(msne.payoff_difference) << ", certified "
     << (cert.is_msne ? "true" : "false") << ")\n"
     << "mac bsne h* = " << format_double(bsne.h) << " (interior " << (bsne.interior ? "yes" : "no")
     << ", best-response gap " << format_double(bsne.gap) << ")\n";
  out.summary = os.str();
  out.status = cert.is_msne ? 0 : 1;
  return out;
}

CommandOutcome congestion_equilibrium(const Game& game, const ResourceModel& model, const RunConfig& cfg,
                                      const std::string& dir) {
  CongestionOptions co;
  co.multistart = cfg.multistart;
  co.certify_tol = cfg.tol;
  co.seed = cfg.seed;
  const CongestionResult res = solve_congestion_equilibrium(game, model, co);
  CommandOutcome out;
  out.files.push_back(write_file(dir, "congestion_flows.csv", [&](std::ostream& f) {
    f << "resource,flow\n";
    for (std::size_t r = 0; r < res.flows.size(); ++r) f << model.resources[r] << ',' << format_double(res.flows[r]) << '\n';
  }));
  out.files.push_back(write_file(dir, "congestion_certificate.csv",
                                 [&](std::ostream& f) { write_certificate_csv(f, game, res.certificate); }));
  std::ostringstream os;
  os << "potential: " << format_double(res.potential) << "\n";
  for (std::size_t r = 0; r < res.flows.size(); ++r)
    os << "flow " << model.resources[r] << ": " << format_double(res.flows[r]) << "\n";
  os << "flow spread across " << co.multistart << " starts: " << format_double(res.flow_spread) << "\n"
     << "certified msne: " << (res.certificate.is_msne ? "true" : "false") << "\n";
  out.summary = os.str();
  out.status = res.certificate.is_msne && res.converged ? 0 : 1;
  return out;
}

}  // namespace

CommandOutcome cmd_equilibrium(const Game& game, const RunConfig& cfg) {
  const std::string dir = prepare(cfg);
  if (cfg.scenario == "mac") return mac_equilibrium(game, cfg, dir);
  if (auto model = congestion_model(game)) return congestion_equilibrium(game, *model, cfg, dir);

  const RevisionProtocol protocol = resolve_protocol(cfg, true);
  SolveOptions so;
  so.multistart = cfg.multistart;
  so.certify_tol = cfg.tol;
  so.seed = cfg.seed;
  if (cfg.step > 0.0) so.step = cfg.step;
  const SolveResult res = solve_msne_by_dynamics(game, protocol, so);

  CommandOutcome out;
  out.files.push_back(write_file(dir, "equilibria.json", [&](std::ostream& f) {
    f << "[";
    for (std::size_t i = 0; i < res.equilibria.size(); ++i) f << (i ? ",\n" : "\n") << res.equilibria[i].to_json();
    f << "\n]\n";
  }));
  for (std::size_t i = 0; i < res.equilibria.size(); ++i)
    out.files.push_back(write_file(dir, "msne_" + std::to_string(i) + ".csv",
                                   [&](std::ostream& f) { write_certificate_csv(f, game, res.equilibria[i]); }));
  std::ostringstream os;
  os << "protocol: " << res.protocol << ", starts: " << res.starts.size() << ", not converged: " << res.nonconverged
     << "\n"
     << "certified msne: " << res.equilibria.size() << "\n";
  for (std::size_t i = 0; i < res.equilibria.size(); ++i) {
    const auto& e = res.equilibria[i];
    os << "  [" << i << "] gap " << format_double(e.max_gap()) << ", marginal";
    for (const auto& v : e.marginal.classes)
      for (Eigen::Index u = 0; u < v.size(); ++u) os << ' ' << format_double(v[u]);
    os << "\n";
  }
  for (const auto& d : res.defects) os << "defect: " << d << "\n";
  if (!res.non_msne_rest_points.empty())
    os << "rest points that are not MSNE (allowed for imitative protocols): " << res.non_msne_rest_points.size() << "\n";
  if (res.equilibria.empty()) {
    os << "no certified equilibrium found\n";
    out.status = 1;
  }
  out.summary = os.str();
  return out;
}

}  // namespace mfgevo

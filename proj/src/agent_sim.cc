#include "mfgevo/agent_sim.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace mfgevo {

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

// Largest-remainder apportionment; ties go to the lower index.
std::vector<std::size_t> apportion(std::size_t total, const std::vector<double>& weights) {
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<std::size_t> out(weights.size(), 0);
  if (weights.empty() || !(sum > 0.0)) return out;
  std::vector<double> frac(weights.size());
  std::size_t given = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double quota = static_cast<double>(total) * std::max(0.0, weights[i]) / sum;
    out[i] = static_cast<std::size_t>(std::floor(quota));
    frac[i] = quota - static_cast<double>(out[i]);
    given += out[i];
  }
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (std::size_t k = 0; given < total && k < order.size(); ++k, ++given) ++out[order[k]];
  return out;
}

}  // namespace

StatePolicyDist PopulationState::empirical(const Game& game) const {
  StatePolicyDist mu = game.zero_state_policy();
  const double inv = 1.0 / static_cast<double>(N);
  for (std::size_t c = 0; c < counts.size(); ++c)
    for (Eigen::Index i = 0; i < mu.classes[c].size(); ++i)
      mu.classes[c].data()[i] = static_cast<double>(counts[c][static_cast<std::size_t>(i)]) * inv;
  return mu;
}

StateActionDist PopulationState::empirical_state_action(const Game& game) const {
  StateActionDist sa = game.zero_state_action();
  const double inv = 1.0 / static_cast<double>(N);
  for (std::size_t c = 0; c < counts.size(); ++c) {
    const std::size_t n = game.num_policies(c);
    for (std::size_t s = 0; s < game.num_states(c); ++s)
      for (std::size_t u = 0; u < n; ++u) {
        const std::size_t k = counts[c][s * n + u];
        if (k) sa.classes[c](static_cast<Eigen::Index>(s),
                             static_cast<Eigen::Index>(game.policy(c, u).action[s])) += static_cast<double>(k) * inv;
      }
  }
  return sa;
}

std::size_t PopulationState::class_size(std::size_t c) const {
  return std::accumulate(counts[c].begin(), counts[c].end(), std::size_t{0});
}

PopulationState initial_population(const Game& game, const StatePolicyDist& mu0, std::size_t N) {
  if (N == 0) throw Error("population size must be at least 1");
  game.check(mu0, kIntegratedMassTolerance);
  PopulationState pop;
  pop.N = N;
  std::vector<double> masses;
  for (std::size_t c = 0; c < game.num_classes(); ++c) masses.push_back(game.cls(c).mass);
  const auto sizes = apportion(N, masses);
  pop.counts.resize(game.num_classes());
  for (std::size_t c = 0; c < game.num_classes(); ++c) {
    if (sizes[c] == 0)
      throw Error("class '" + game.cls(c).name + "' receives no player at N = " + std::to_string(N));
    const auto& b = mu0.classes[c];
    std::vector<double> w(b.data(), b.data() + b.size());
    pop.counts[c] = apportion(sizes[c], w);
    const std::size_t n = game.num_policies(c);
    for (std::size_t cell = 0; cell < pop.counts[c].size(); ++cell)
      for (std::size_t k = 0; k < pop.counts[c][cell]; ++k) {
        pop.cls.push_back(c);
        pop.state.push_back(cell / n);
        pop.policy.push_back(cell % n);
      }
  }
  return pop;
}

std::size_t find_player(const PopulationState& pop, std::size_t c, std::size_t u) {
  for (std::size_t i = 0; i < pop.cls.size(); ++i)
    if (pop.cls[i] == c && pop.policy[i] == u) return i;
  throw Error("no player of class " + std::to_string(c) + " holds policy " + std::to_string(u + 1));
}

namespace {

struct TagObserver {
  std::size_t player = kNone;
  double burn_in = 0.0;
  double batch_len = 1.0;
  std::vector<double> sums;
  std::vector<std::size_t> counts;
};

// Shared event loop. With `revision` false only the action clocks run.
SimResult run(const Game& game, const ProtocolSet* protocols, const PopulationState& initial,
              const SimOptions& opts, bool revision, TagObserver* tag) {
  if (revision && (!protocols || protocols->size() != game.num_classes()))
    throw DimensionError("one revision protocol per class is required");
  SimResult res;
  PopulationState pop = initial;
  const std::size_t C = game.num_classes();
  const double inv_n = 1.0 / static_cast<double>(pop.N);

  std::vector<std::vector<std::size_t>> members(C);
  for (std::size_t i = 0; i < pop.cls.size(); ++i) members[pop.cls[i]].push_back(i);
  std::vector<double> per_player(C), class_rate(C);
  double total_rate = 0.0;
  for (std::size_t c = 0; c < C; ++c) {
    per_player[c] = game.cls(c).action_rate + (revision ? game.cls(c).revision_rate : 0.0);
    class_rate[c] = per_player[c] * static_cast<double>(members[c].size());
    total_rate += class_rate[c];
  }
  res.player_action_events.assign(pop.cls.size(), 0);

  std::vector<double> grid;
  if (opts.sample_interval > 0.0) {
    const auto K = static_cast<std::size_t>(std::llround(opts.horizon / opts.sample_interval));
    for (std::size_t k = 0; k <= K; ++k) grid.push_back(std::min(opts.horizon, static_cast<double>(k) * opts.sample_interval));
    if (grid.back() < opts.horizon) grid.push_back(opts.horizon);
  }
  std::size_t next_sample = 0;
  auto record_until = [&](double t) {
    while (next_sample < grid.size() && grid[next_sample] <= t) {
      res.trajectory.t.push_back(grid[next_sample]);
      res.trajectory.mu.push_back(pop.empirical(game));
      ++next_sample;
    }
  };

  bool dirty = true;
  PayoffVector F;
  std::vector<RowMat> rho(C);
  std::vector<bool> rho_fresh(C, false);

  Rng rng(opts.seed, opts.stream);
  double t = 0.0;
  while (true) {
    const double u_dt = rng.uniform(), u_player = rng.uniform(), u_type = rng.uniform(), u_out = rng.uniform();
    const double t_next = total_rate > 0.0 ? t - std::log1p(-u_dt) / total_rate
                                           : std::numeric_limits<double>::infinity();
    record_until(std::min(t_next, opts.horizon));
    if (t_next > opts.horizon) break;
    t = t_next;

    double pos = u_player * total_rate;
    std::size_t c = 0;
    while (c + 1 < C && pos >= class_rate[c]) pos -= class_rate[c++];
    const auto& mem = members[c];
    const std::size_t idx = std::min(mem.size() - 1, static_cast<std::size_t>(pos / per_player[c]));
    const std::size_t i = mem[idx];
    const ClassSpec& k = game.cls(c);
    const std::size_t n = game.num_policies(c);
    const std::size_t s = pop.state[i], u = pop.policy[i];

    if (u_type * per_player[c] < k.action_rate) {
      ++res.action_events;
      ++res.player_action_events[i];
      const std::size_t a = game.policy(c, u).action[s];
      if (tag && i == tag->player && t >= tag->burn_in) {
        const StateActionDist sa = pop.empirical_state_action(game);
        const double r = k.reward->value(c, s, a, sa);
        const auto b = std::min(tag->sums.size() - 1,
                                static_cast<std::size_t>((t - tag->burn_in) / tag->batch_len));
        tag->sums[b] += r;
        ++tag->counts[b];
      }
      const auto col = k.kernel[a].col(static_cast<Eigen::Index>(s));
      std::size_t next = static_cast<std::size_t>(col.size()) - 1;
      double acc = 0.0;
      for (Eigen::Index j = 0; j < col.size(); ++j) {
        acc += col[j];
        if (u_out < acc) {
          next = static_cast<std::size_t>(j);
          break;
        }
      }
      // Never land on a zero-probability state through round-off.
      while (col[static_cast<Eigen::Index>(next)] == 0.0 && next > 0) --next;
      if (next != s) {
        --pop.counts[c][s * n + u];
        ++pop.counts[c][next * n + u];
        pop.state[i] = next;
        dirty = true;
      }
    } else {
      ++res.revision_events;
      if (dirty) {
        F = payoff_map(game, pop.empirical(game));
        std::fill(rho_fresh.begin(), rho_fresh.end(), false);
        dirty = false;
      }
      if (!rho_fresh[c]) {
        Vec sigma = Vec::Zero(static_cast<Eigen::Index>(n));
        for (std::size_t ss = 0; ss < game.num_states(c); ++ss)
          for (std::size_t v = 0; v < n; ++v)
            sigma[static_cast<Eigen::Index>(v)] += static_cast<double>(pop.counts[c][ss * n + v]) * inv_n;
        (*protocols)[c].rates_into(F.classes[c], sigma, rho[c]);
        rho_fresh[c] = true;
      }
      const auto row = rho[c].row(static_cast<Eigen::Index>(u));
      const double lr = k.revision_rate;
      const double row_sum = row.sum();
      double scale = 1.0 / lr;
      if (row_sum > lr * (1.0 + 1e-12)) {
        if ((*protocols)[c].strict() || opts.strict) {
          std::ostringstream os;
          os << "switch rates of policy " << u + 1 << " in class '" << k.name << "' sum to " << row_sum
             << ", above lambda_r = " << lr << " at t = " << t;
          throw AssumptionError(os.str());
        }
        ++res.rate_bound_violations;
        scale = 1.0 / row_sum;
      }
      double acc = 0.0;
      for (std::size_t v = 0; v < n; ++v) {
        if (v == u) continue;
        acc += row[static_cast<Eigen::Index>(v)] * scale;
        if (u_out < acc) {
          --pop.counts[c][s * n + u];
          ++pop.counts[c][s * n + v];
          pop.policy[i] = v;
          ++res.switches;
          dirty = true;
          break;
        }
      }
    }
  }
  pop.t = opts.horizon;
  res.trajectory.method = "ssa";
  res.final_state = std::move(pop);
  return res;
}

}  // namespace

SimResult simulate(const Game& game, const ProtocolSet& protocols, const PopulationState& initial,
                   const SimOptions& opts) {
  if (!(opts.horizon >= 0.0) || !std::isfinite(opts.horizon)) throw Error("horizon must be nonnegative");
  return run(game, &protocols, initial, opts, true, nullptr);
}

SimResult simulate(const Game& game, const ProtocolSet& protocols, const StatePolicyDist& mu0, std::size_t N,
                   const SimOptions& opts) {
  return simulate(game, protocols, initial_population(game, mu0, N), opts);
}

ConvergenceStudy convergence_study(const Game& game, const ProtocolSet& protocols, const StatePolicyDist& mu0,
                                   const std::vector<std::size_t>& Ns, std::size_t replications,
                                   double horizon, std::uint64_t seed, double sample_interval) {
  IntegrateOptions io;
  io.horizon = horizon;
  io.sample_interval = sample_interval;
  io.record_payoffs = false;
  // The step must divide the sampling interval so both grids coincide.
  const double h0 = default_step(game);
  io.step = sample_interval / std::ceil(sample_interval / h0 - 1e-9);
  const TrajectoryRecord ode = integrate(game, mu0, protocols, io);

  ConvergenceStudy out;
  out.rows.resize(Ns.size() * replications);
  parallel_for(out.rows.size(), [&](std::size_t k) {
    const std::size_t ni = k / replications, rep = k % replications;
    SimOptions so;
    so.horizon = horizon;
    so.sample_interval = sample_interval;
    so.seed = seed;
    so.stream = (static_cast<std::uint64_t>(Ns[ni]) << 20) + rep;
    const SimResult sim = simulate(game, protocols, mu0, Ns[ni], so);
    const std::size_t K = std::min(sim.trajectory.t.size(), ode.t.size());
    double sup = 0.0;
    for (std::size_t g = 0; g < K; ++g)
      sup = std::max(sup, max_abs_diff(sim.trajectory.mu[g].classes, ode.mu[g].classes));
    out.rows[k] = {Ns[ni], rep, sup};
  });
  for (std::size_t ni = 0; ni < Ns.size(); ++ni) {
    StudySummary s;
    s.N = Ns[ni];
    double sum = 0.0, sq = 0.0;
    for (std::size_t r = 0; r < replications; ++r) sum += out.rows[ni * replications + r].sup_deviation;
    s.mean = replications ? sum / static_cast<double>(replications) : 0.0;
    for (std::size_t r = 0; r < replications; ++r) {
      const double d = out.rows[ni * replications + r].sup_deviation - s.mean;
      sq += d * d;
    }
    s.stddev = replications > 1 ? std::sqrt(sq / static_cast<double>(replications - 1)) : 0.0;
    out.summary.push_back(s);
  }
  return out;
}

namespace {

struct BatchStats {
  double mean = 0.0;
  std::size_t samples = 0;
  std::vector<double> batch_means;
};

BatchStats collect(const TagObserver& tag) {
  BatchStats b;
  double sum = 0.0;
  for (std::size_t k = 0; k < tag.sums.size(); ++k) {
    sum += tag.sums[k];
    b.samples += tag.counts[k];
    b.batch_means.push_back(tag.counts[k] ? tag.sums[k] / static_cast<double>(tag.counts[k]) : 0.0);
  }
  b.mean = b.samples ? sum / static_cast<double>(b.samples) : 0.0;
  return b;
}

double standard_error(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double sq = 0.0;
  for (double x : v) sq += (x - m) * (x - m);
  return std::sqrt(sq / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace

PayoffEstimate estimate_average_payoff(const Game& game, const PopulationState& population, std::size_t j,
                                       std::size_t deviation, const PayoffOptions& opts) {
  if (j >= population.cls.size()) throw DimensionError("tagged player index out of range");
  const std::size_t c = population.cls[j];
  if (deviation >= game.num_policies(c)) throw DimensionError("deviation policy index out of range");
  if (!(opts.horizon > opts.burn_in) || opts.burn_in < 0.0)
    throw Error("payoff estimation needs 0 <= burn_in < horizon");
  const std::size_t B = std::max<std::size_t>(opts.batches, 2);

  SimOptions so;
  so.horizon = opts.horizon;
  so.sample_interval = 0.0;
  so.seed = opts.seed;
  so.stream = opts.stream;

  auto run_with = [&](const PopulationState& pop) {
    TagObserver tag;
    tag.player = j;
    tag.burn_in = opts.burn_in;
    tag.batch_len = (opts.horizon - opts.burn_in) / static_cast<double>(B);
    tag.sums.assign(B, 0.0);
    tag.counts.assign(B, 0);
    run(game, nullptr, pop, so, false, &tag);
    return collect(tag);
  };

  const BatchStats keep = run_with(population);
  PopulationState dev = population;
  {
    const std::size_t n = game.num_policies(c);
    const std::size_t s = dev.state[j];
    --dev.counts[c][s * n + dev.policy[j]];
    ++dev.counts[c][s * n + deviation];
    dev.policy[j] = deviation;
  }
  const BatchStats alt = run_with(dev);

  if (keep.samples < 100 || alt.samples < 100) {
    std::ostringstream os;
    os << "horizon too short: only " << std::min(keep.samples, alt.samples)
       << " rewards collected for the tagged player (need at least 100)";
    throw Error(os.str());
  }
  PayoffEstimate e;
  e.keep = keep.mean;
  e.deviate = alt.mean;
  e.gain = alt.mean - keep.mean;
  e.samples_keep = keep.samples;
  e.samples_deviate = alt.samples;
  e.se_keep = standard_error(keep.batch_means);
  e.se_deviate = standard_error(alt.batch_means);
  std::vector<double> diffs(B);
  for (std::size_t k = 0; k < B; ++k) diffs[k] = alt.batch_means[k] - keep.batch_means[k];
  e.se_gain = standard_error(diffs);
  return e;
}

}  // namespace mfgevo

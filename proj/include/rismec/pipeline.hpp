// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rismec/moop.hpp"
#include "rismec/phaseopt.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace rismec {

enum class RunKind { Optimized, BcOnly, BcLocal, NoRis, NoRisBcOnly, NoRisBcLocal, RandomPhase };

inline const char* to_string(RunKind k) {
  switch (k) {
    case RunKind::Optimized: return "optimized";
    case RunKind::BcOnly: return "bc_only";
    case RunKind::BcLocal: return "bc_local";
    case RunKind::NoRis: return "no_ris";
    case RunKind::NoRisBcOnly: return "no_ris_bc_only";
    case RunKind::NoRisBcLocal: return "no_ris_bc_local";
    case RunKind::RandomPhase: return "random_phase";
  }
  return "?";
}

inline RunKind parse_run_kind(const std::string& s) {
  for (RunKind k : {RunKind::Optimized, RunKind::BcOnly, RunKind::BcLocal, RunKind::NoRis,
                    RunKind::NoRisBcOnly, RunKind::NoRisBcLocal, RunKind::RandomPhase})
    if (s == to_string(k)) return k;
  throw ConfigError("unknown run kind '" + s + "'");
}

struct PipelineConfig {
  SolverConfig solver;
  MmOptions mm;
  int J_max = 10;
  double ao_tol = 1e-4;
  std::vector<double> alpha_grid;  // empty: 0, step, ..., 1 with the scenario's alpha_step
  bool sweep = true;
};

struct AoRow {
  int iteration = 0;
  double R_sum = 0;
};

struct RunResult {
  std::uint64_t scenario_hash = 0;
  std::uint64_t seed = 0;
  std::string tag;
  bool feasible = true;
  std::string failed_step;
  std::string message;
  PhaseShifts theta;
  Allocation throughput_alloc;
  Utopia utopia;
  std::vector<ParetoPoint> front;
  std::vector<AoRow> trace;
  double EE_peak = 0;
  double alpha_peak = -1;
  // last phase step of the AO loop (zero when no phase step ran)
  double rank_ratio = 0;
  double lifted_value = 0;
  double extracted_value = 0;
  int phase_steps = 0;
};

/// Co-phases the cascade of the device whose PB->RIS->device product is
/// strongest; all-zero phases when the reflector carries no signal.
inline PhaseShifts initial_phases(const ChannelSet& ch) {
  const int N = ch.N();
  if (N == 0) return PhaseShifts::zeros(0);
  int best = -1;
  double best_v = 0;
  for (int k = 0; k < ch.K(); ++k) {
    double v = 0;
    for (int n = 0; n < N; ++n) v += std::abs(ch.g_PI[n]) * std::abs(ch.g_IU[k][n]);
    if (v > best_v) {
      best_v = v;
      best = k;
    }
  }
  return best < 0 ? PhaseShifts::zeros(N) : align_phases(ch, best);
}

namespace detail {

inline bool ris_active(const ChannelSet& ch) {
  if (ch.N() == 0) return false;
  if (ch.g_PI.cwiseAbs().maxCoeff() == 0 || ch.h_IM.cwiseAbs().maxCoeff() == 0) return false;
  return true;
}

inline SolverConfig restricted(SolverConfig c, RunKind kind) {
  if (kind == RunKind::BcOnly || kind == RunKind::NoRisBcOnly) {
    c.allow_at = false;
    c.allow_local = false;
  } else if (kind == RunKind::BcLocal || kind == RunKind::NoRisBcLocal) {
    c.allow_at = false;
  }
  return c;
}

/// Steps 2 and 3 at fixed phases.
inline void finish_run(RunResult& r, const ChannelSet& ch, const Scenario& sc,
                       const PipelineConfig& cfg, const SolverConfig& solver) {
  const Gains g = gain_powers(ch, r.theta);
  try {
    r.utopia = compute_utopia(g, sc, solver);
  } catch (const InfeasibleError& e) {
    r.feasible = false;
    r.failed_step = "utopia";
    r.message = e.what();
    return;
  }
  if (!cfg.sweep) return;
  auto grid = cfg.alpha_grid.empty() ? default_alpha_grid(sc.alpha_step) : cfg.alpha_grid;
  r.front = tchebycheff_sweep(g, sc, r.utopia, grid, solver);
  int at = -1;
  r.EE_peak = peak_ee(r.front, &at);
  r.alpha_peak = at >= 0 ? r.front[static_cast<std::size_t>(at)].alpha : -1;
}

}  // namespace detail

/// Alternating optimization of resources and phases, then the utopia point
/// and the Tchebycheff sweep at the final phases. `solver` restricts the
/// admissible transmission modes for the baselines.
inline RunResult algorithm2(const ChannelSet& ch, const Scenario& sc, const PipelineConfig& cfg,
                            const SolverConfig& solver, PhaseShifts theta0) {
  RunResult r;
  r.scenario_hash = sc.hash();
  r.tag = to_string(RunKind::Optimized);
  r.theta = theta0;
  ResourceSolution best;
  try {
    best = solve_throughput_max(gain_powers(ch, r.theta), sc, solver);
  } catch (const InfeasibleError& e) {
    r.feasible = false;
    r.failed_step = "throughput";
    r.message = e.what();
    return r;
  }
  double R = best.value;
  r.trace.push_back({0, R});
  if (detail::ris_active(ch)) {
    MmOptions mo = cfg.mm;
    for (int j = 1; j <= cfg.J_max; ++j) {
      mo.seed = splitmix64(cfg.mm.seed ^ static_cast<std::uint64_t>(j));
      MmResult mm = mm_optimize(ch, best.alloc, r.theta, sc, mo);
      ++r.phase_steps;
      if (!mm.trace.empty()) {
        // last step that produced a lifted matrix
        const MmIterate& last = mm.trace.back();
        r.rank_ratio = last.rank_ratio;
        r.lifted_value = last.surrogate;
        r.extracted_value = last.extracted;
      }
      double R_new = mm.R_final;
      Allocation alloc = best.alloc;
      try {
        auto s = solve_throughput_max(gain_powers(ch, mm.theta), sc, solver);
        if (s.value > R_new) {
          R_new = s.value;
          alloc = s.alloc;
        }
      } catch (const InfeasibleError&) {
        // the previous allocation stays feasible at the accepted phases
      }
      // accepted phases never lower the objective; a numerically equal
      // re-solve keeps the previous point so the trace is monotone
      if (R_new < R) {
        r.trace.push_back({j, R});
        break;
      }
      const double rel = (R_new - R) / std::max(std::abs(R), 1e-300);
      r.theta = mm.theta;
      best.alloc = alloc;
      best.value = R_new;
      R = R_new;
      r.trace.push_back({j, R});
      if (rel < cfg.ao_tol) break;
    }
  }
  r.throughput_alloc = best.alloc;
  detail::finish_run(r, ch, sc, cfg, solver);
  return r;
}

inline RunResult algorithm2(const ChannelSet& ch, const Scenario& sc,
                            const PipelineConfig& cfg = {}) {
  return algorithm2(ch, sc, cfg, cfg.solver, initial_phases(ch));
}

/// Baselines: restricted modes keep the phase optimization; the no-RIS
/// variants drop the reflector; random phases skip the phase step.
inline RunResult run_baseline(const ChannelSet& ch, const Scenario& sc, RunKind kind,
                              const PipelineConfig& cfg = {}, std::uint64_t seed = 0) {
  const SolverConfig solver = detail::restricted(cfg.solver, kind);
  RunResult r;
  switch (kind) {
    case RunKind::Optimized:
    case RunKind::BcOnly:
    case RunKind::BcLocal:
      r = algorithm2(ch, sc, cfg, solver, initial_phases(ch));
      break;
    case RunKind::NoRis:
    case RunKind::NoRisBcOnly:
    case RunKind::NoRisBcLocal: {
      PipelineConfig c = cfg;
      c.J_max = 0;
      r = algorithm2(ch.without_ris(), sc, c, solver, PhaseShifts::zeros(ch.N()));
      break;
    }
    case RunKind::RandomPhase: {
      PipelineConfig c = cfg;
      c.J_max = 0;
      r = algorithm2(ch, sc, c, solver, random_phases(ch.N(), seed));
      break;
    }
  }
  r.tag = to_string(kind);
  return r;
}

/// Generates the channels for `seed` and runs the requested variant.
inline RunResult run_seed(const Scenario& sc, std::uint64_t seed, RunKind kind,
                          const PipelineConfig& cfg = {}) {
  PipelineConfig c = cfg;
  c.mm.seed = splitmix64(seed ^ 0x5eedULL);
  ChannelSet ch = generate_channels(sc, seed);
  RunResult r = kind == RunKind::Optimized ? algorithm2(ch, sc, c) : run_baseline(ch, sc, kind, c, seed);
  r.seed = seed;
  return r;
}

// ---------------------------------------------------------------------------
// Monte-Carlo aggregation
// ---------------------------------------------------------------------------

struct Stat {
  int n = 0;
  double mean = 0;
  double stddev = 0;  // sample standard deviation
  // standard error of the mean
  double sem() const { return n > 0 ? stddev / std::sqrt(static_cast<double>(n)) : 0.0; }
};

inline Stat summarize(const std::vector<double>& v) {
  Stat s;
  s.n = static_cast<int>(v.size());
  if (s.n == 0) return s;
  for (double x : v) s.mean += x;
  s.mean /= s.n;
  if (s.n > 1) {
    double ss = 0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / (s.n - 1));
  }
  return s;
}

struct AggregateRow {
  double alpha = 0;
  Stat EE, R_sum, E_total;
};

struct Aggregate {
  std::vector<AggregateRow> rows;  // one per alpha, over feasible runs
  Stat EE_peak;
  int runs = 0;
  int feasible = 0;
};

/// Runs `fn` for every index in [0, n) on up to `jobs` threads. Results are
/// written by index so the outcome does not depend on scheduling.
template <class T>
std::vector<T> parallel_map(int n, int jobs, const std::function<T(int)>& fn) {
  std::vector<T> out(static_cast<std::size_t>(n));
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  for (int w = 0; w < jobs; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          out[i] = fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(err_mu);
          if (!err) err = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
  return out;
}

inline Aggregate aggregate(const std::vector<RunResult>& runs) {
  Aggregate a;
  a.runs = static_cast<int>(runs.size());
  std::vector<double> alphas, peaks;
  for (const auto& r : runs) {
    if (!r.feasible) continue;
    ++a.feasible;
    peaks.push_back(r.EE_peak);
    for (const auto& p : r.front)
      if (std::find(alphas.begin(), alphas.end(), p.alpha) == alphas.end()) alphas.push_back(p.alpha);
  }
  std::sort(alphas.begin(), alphas.end());
  a.EE_peak = summarize(peaks);
  for (double al : alphas) {
    std::vector<double> ee, R, E;
    for (const auto& r : runs) {
      if (!r.feasible) continue;
      for (const auto& p : r.front)
        if (p.alpha == al && p.feasible && !p.metrics.ee_unbounded) {
          ee.push_back(p.metrics.EE);
          R.push_back(p.metrics.R_sum);
          E.push_back(p.metrics.E_total);
        }
    }
    a.rows.push_back({al, summarize(ee), summarize(R), summarize(E)});
  }
  return a;
}

struct MonteCarlo {
  std::vector<RunResult> runs;  // in seed-list order
  Aggregate table;
};

inline MonteCarlo monte_carlo(const Scenario& sc, const std::vector<std::uint64_t>& seeds,
                              RunKind kind, const PipelineConfig& cfg = {}, int jobs = 1) {
  MonteCarlo mc;
  mc.runs = parallel_map<RunResult>(static_cast<int>(seeds.size()), jobs, [&](int i) {
    return run_seed(sc, seeds[static_cast<std::size_t>(i)], kind, cfg);
  });
  mc.table = aggregate(mc.runs);
  return mc;
}

}  // namespace rismec

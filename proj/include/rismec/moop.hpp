// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rismec/resource.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace rismec {

/// Utopia point from the two single-objective solves at fixed phases.
inline Utopia compute_utopia(const Gains& g, const Scenario& sc, const SolverConfig& cfg = {}) {
  auto feas = find_feasible(g, sc, cfg);
  if (feas.infeasible) throw InfeasibleError("utopia", "rate floors cannot be met");
  auto rmax = solve_throughput_max(g, sc, cfg, &feas.pool);
  auto emin = solve_energy_min(g, sc, cfg, &feas.pool);
  Utopia u;
  u.R_max = rmax.value;
  u.E_min = emin.value;
  u.provenance = "R_max=throughput_max(iters=" + std::to_string(rmax.iterations) +
                 ");E_min=energy_min(iters=" + std::to_string(emin.iterations) + ");E_ref=minimum";
  return u;
}

inline Utopia compute_utopia(const ChannelSet& ch, const PhaseShifts& th, const Scenario& sc,
                             const SolverConfig& cfg = {}) {
  return compute_utopia(gain_powers(ch, th), sc, cfg);
}

struct ParetoPoint {
  double alpha = 0;
  double beta = 1;
  double chi = 0;
  Metrics metrics;
  Allocation alloc;
  bool feasible = true;
  std::string message;
};

/// alpha = 0, step, 2*step, ..., 1 (the last point is always exactly 1).
inline std::vector<double> default_alpha_grid(double step = 0.1) {
  if (!(step > 0) || step > 1) throw ConfigError("alpha step must lie in (0, 1]");
  std::vector<double> grid;
  const int n = static_cast<int>(std::llround(1.0 / step));
  for (int i = 0; i < n; ++i) grid.push_back(i * step);
  grid.push_back(1.0);
  return grid;
}

/// One Tchebycheff solve per weight. Points that fail are kept and flagged.
inline std::vector<ParetoPoint> tchebycheff_sweep(const Gains& g, const Scenario& sc,
                                                  const Utopia& u, std::vector<double> alpha_grid,
                                                  const SolverConfig& cfg = {}) {
  std::sort(alpha_grid.begin(), alpha_grid.end());
  auto feas = find_feasible(g, sc, cfg);
  std::vector<ParetoPoint> out;
  out.reserve(alpha_grid.size());
  for (double a : alpha_grid) {
    if (a < 0 || a > 1) throw ConfigError("alpha must lie in [0, 1]");
    ParetoPoint pt;
    pt.alpha = a;
    pt.beta = 1.0 - a;
    if (feas.infeasible) {
      pt.feasible = false;
      pt.message = "rate floors cannot be met";
      out.push_back(std::move(pt));
      continue;
    }
    try {
      auto s = solve_pareto_point(a, 1.0 - a, u, g, sc, cfg, &feas.pool);
      pt.chi = s.chi;
      pt.metrics = s.metrics;
      pt.alloc = s.alloc;
    } catch (const InfeasibleError& e) {
      pt.feasible = false;
      pt.message = e.what();
    }
    out.push_back(std::move(pt));
  }
  return out;
}

/// Largest finite energy efficiency among the feasible sweep points; returns
/// the index through `where` (-1 when no point qualifies).
inline double peak_ee(const std::vector<ParetoPoint>& front, int* where = nullptr) {
  double best = 0;
  int idx = -1;
  for (std::size_t i = 0; i < front.size(); ++i) {
    const auto& p = front[i];
    if (!p.feasible || p.metrics.ee_unbounded) continue;
    if (idx < 0 || p.metrics.EE > best) {
      best = p.metrics.EE;
      idx = static_cast<int>(i);
    }
  }
  if (where) *where = idx;
  return best;
}

struct DinkelbachOptions {
  double tol = 1e-6;  // stop once |R - ratio * E| < tol * R, i.e. the ratio moved by < tol
  int max_iterations = 50;
};

struct DinkelbachResult {
  double EE = 0;
  Allocation alloc;
  Metrics metrics;
  int iterations = 0;
  bool converged = false;
  bool degenerate = false;  // efficiency unbounded or attained only in a limit
  std::vector<double> ratios;
};

/// Fractional program max R/E through the parametric subproblems
/// max R - ratio * E, solved with the same machinery as the other modes.
/// `cfg.min_useful_bits` bounds the delivered bits from below so that
/// vanishing-energy limits stay well posed.
inline DinkelbachResult dinkelbach_ee(const Gains& g, const Scenario& sc,
                                      const SolverConfig& cfg = {},
                                      const DinkelbachOptions& opt = {}) {
  DinkelbachResult res;
  auto feas = find_feasible(g, sc, cfg);
  if (feas.infeasible) throw InfeasibleError("dinkelbach", "rate floors cannot be met");
  std::vector<Column> pool = feas.pool;
  // start from the energy-minimal point: it has E > 0 whenever any bits flow
  auto start = solve_energy_min(g, sc, cfg, &pool);
  double ratio = 0;
  if (start.metrics.E_total > 0 && start.metrics.R_sum > 0)
    ratio = start.metrics.R_sum / start.metrics.E_total;
  res.alloc = start.alloc;
  res.metrics = start.metrics;
  res.EE = ratio;
  for (int it = 1; it <= opt.max_iterations; ++it) {
    res.iterations = it;
    res.ratios.push_back(ratio);
    ResourceSolution s;
    try {
      s = solve_weighted(ratio, g, sc, cfg, &pool);
    } catch (const InfeasibleError&) {
      s = solve_weighted(ratio, g, sc, cfg);
    }
    pool = s.pool;
    const double R = s.metrics.R_sum, E = s.metrics.E_total;
    if (!(E > 0)) {
      res.degenerate = R > 0 || res.EE == 0;
      res.converged = false;
      if (R > 0) res.EE = std::numeric_limits<double>::infinity();
      break;
    }
    const double gap = R - ratio * E;
    const double next = R / E;
    if (next > res.EE) {
      res.EE = next;
      res.alloc = s.alloc;
      res.metrics = s.metrics;
    }
    if (std::abs(gap) <= opt.tol * std::max(R, 1e-300)) {
      res.converged = true;
      break;
    }
    ratio = next;
  }
  return res;
}

inline DinkelbachResult dinkelbach_ee(const ChannelSet& ch, const PhaseShifts& th,
                                      const Scenario& sc, const SolverConfig& cfg = {},
                                      const DinkelbachOptions& opt = {}) {
  return dinkelbach_ee(gain_powers(ch, th), sc, cfg, opt);
}

}  // namespace rismec

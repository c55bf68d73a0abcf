// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rismec/kkt.hpp"
#include "rismec/netmodel.hpp"
#include "rismec/physics.hpp"
#include "rismec/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace rismec {

struct SolverConfig {
  enum class Method { ColumnGeneration, Subgradient };
  Method method = Method::ColumnGeneration;
  double step0 = 0.1;           // subgradient: initial Polyak factor
  int max_iters = 500;          // outer iterations (pricing rounds or subgradient steps)
  double tol_rel = 1e-7;        // duality-gap tolerance, relative
  double tol_abs = 1e-9;        // duality-gap tolerance for normalized objectives
  double lp_tolerance = 1e-10;  // reduced-cost tolerance of the master LP
  bool refine_pareto = true;    // second pass breaking ties among min-max optima
  bool allow_at = true;         // active transmission permitted
  bool allow_local = true;      // local computing permitted
  double min_useful_bits = 0;   // weighted mode: lower bound on delivered bits
};

/// Normalized Tchebycheff target of the Pareto mode.
struct ParetoTarget {
  double alpha = 0.5;
  double R_ref = 0;   // utopia throughput
  double E_ref = 0;   // utopia (minimum) energy
  double R_norm = 1;  // |R_ref| floored at one bit
  double E_norm = 1;  // |E_ref| floored at 1e-9 J
  // When non-negative, the min-max value is frozen at chi + 1 <= chi_cap and the
  // master instead maximizes R/R_norm - E/E_norm over the tied optima.
  double chi_cap = -1;
  double beta() const { return 1.0 - alpha; }
  bool refining() const { return chi_cap >= 0; }
};

struct ObjectiveSpec {
  Mode mode = Mode::Throughput;
  double ratio = 0;  // weighted mode: price of one joule in bits
  ParetoTarget pareto{};
};

enum class ColumnKind { Bc, At, Local };

/// One candidate operating point: BC at reflection v, AT at power v, or
/// local computing at frequency v, for device k.
struct Column {
  ColumnKind kind = ColumnKind::Bc;
  int k = 0;
  double v = 0;
  bool operator==(const Column&) const = default;
};

struct TraceRow {
  int iteration = 0;
  double dual_objective = 0;  // Lagrangian upper bound
  double primal_value = 0;    // restricted-master value
  double residual = 0;        // worst relative constraint violation of the master point
};

struct ResourceSolution {
  Allocation alloc;
  DualVars duals;
  Metrics metrics;
  double value = 0;        // objective of the recovered allocation in mode units
  double lp_value = 0;     // restricted-master optimum
  double upper_bound = 0;  // Lagrangian bound on the master optimum
  double chi = 0;          // Pareto mode: achieved Tchebycheff deviation
  int iterations = 0;
  bool converged = false;
  bool infeasible = false;
  std::vector<Column> pool;
  std::vector<TraceRow> trace;
};

namespace detail {

struct ColumnData {
  double bits = 0;    // per second (per second of tau for local)
  double energy = 0;  // consumed per second
  double own = 0;     // own harvest per second (BC only)
};

inline ColumnData column_data(const Column& c, const Gains& g, const Scenario& sc) {
  const int k = c.k;
  switch (c.kind) {
    case ColumnKind::Bc:
      return {bc_rate(1.0, c.v, g.h2[k], g.g2[k], sc), sc.P_circ_bc[k],
              eh_power(sc.eh(k), std::max(0.0, 1.0 - c.v) * sc.P_max * g.g2[k])};
    case ColumnKind::At:
      return {at_rate(1.0, c.v, g.h2[k], sc), c.v / sc.delta + sc.p_circ_at[k], 0.0};
    case ColumnKind::Local:
      return {c.v / sc.C_cpu, sc.eps[k] * c.v * c.v * c.v, 0.0};
  }
  return {};
}

struct Layout {
  int K = 0;
  int rows = 0;
  int pareto_row = -1;
  int bits_row = -1;
  int time() const { return 0; }
  int local(int k) const { return 1 + k; }
  int floor(int k) const { return 1 + K + k; }
  int energy(int k) const { return 1 + 2 * K + k; }
};

inline Layout make_layout(const Scenario& sc, const ObjectiveSpec& obj, const SolverConfig& cfg) {
  Layout L;
  L.K = sc.K;
  L.rows = 1 + 3 * sc.K;
  if (obj.mode == Mode::Pareto) {
    L.pareto_row = L.rows;
    L.rows += obj.pareto.refining() ? 3 : 2;
  }
  if (obj.mode == Mode::Weighted && cfg.min_useful_bits > 0) {
    L.bits_row = L.rows;
    L.rows += 1;
  }
  return L;
}

/// Objective weights (a1 per bit, a2 per joule) of a column in the master.
inline std::pair<double, double> objective_weights(const ObjectiveSpec& obj) {
  switch (obj.mode) {
    case Mode::Throughput: return {1.0, 0.0};
    case Mode::Energy: return {0.0, 1.0};
    case Mode::Weighted: return {1.0, obj.ratio};
    case Mode::Pareto:
      if (obj.pareto.refining()) return {1.0 / obj.pareto.R_norm, 1.0 / obj.pareto.E_norm};
      return {0.0, 0.0};
    case Mode::Feasibility: return {0.0, 0.0};
  }
  return {0.0, 0.0};
}

struct Master {
  Mat A;
  Vec b, c;
  int n_pool = 0;
};

inline Master build_master(const std::vector<Column>& pool, const std::vector<ColumnData>& data,
                           const Gains& g, const Scenario& sc, const ObjectiveSpec& obj,
                           const SolverConfig& cfg, const Layout& L) {
  const int K = sc.K;
  const int np = static_cast<int>(pool.size());
  int extra = 0;
  if (obj.mode == Mode::Feasibility) extra = K;
  if (obj.mode == Mode::Pareto) extra = 1;
  Master M;
  M.n_pool = np;
  M.A = Mat::Zero(L.rows, np + extra);
  M.b = Vec::Zero(L.rows);
  M.c = Vec::Zero(np + extra);
  M.b[L.time()] = sc.T;
  for (int k = 0; k < K; ++k) {
    M.b[L.local(k)] = sc.T;
    M.b[L.floor(k)] = -sc.gamma_min[k];
    M.b[L.energy(k)] = sc.Q[k];
  }
  std::vector<double> idle(static_cast<std::size_t>(K));
  for (int i = 0; i < K; ++i) idle[i] = idle_harvest_power(i, g, sc);
  auto [a1, a2] = objective_weights(obj);
  const auto& pt = obj.pareto;
  for (int j = 0; j < np; ++j) {
    const Column& col = pool[j];
    const ColumnData& d = data[j];
    const int k = col.k;
    if (col.kind == ColumnKind::Local) M.A(L.local(k), j) = 1.0;
    else M.A(L.time(), j) = 1.0;
    M.A(L.floor(k), j) = -d.bits;
    M.A(L.energy(k), j) = d.energy - d.own;
    if (col.kind == ColumnKind::Bc)
      for (int i = 0; i < K; ++i)
        if (i != k) M.A(L.energy(i), j) = -idle[i];
    if (L.pareto_row >= 0) {
      M.A(L.pareto_row, j) = -(pt.alpha / pt.R_norm) * d.bits;
      M.A(L.pareto_row + 1, j) = (pt.beta() / pt.E_norm) * d.energy;
    }
    if (L.bits_row >= 0) M.A(L.bits_row, j) = -d.bits;
    M.c[j] = a1 * d.bits - a2 * d.energy;
  }
  if (obj.mode == Mode::Feasibility) {
    for (int k = 0; k < K; ++k) {
      M.A(L.floor(k), np + k) = -1.0;
      M.c[np + k] = -1.0 / std::max(1.0, sc.gamma_min[k]);
    }
  }
  if (obj.mode == Mode::Pareto) {
    // chi' = chi + 1 >= 0 keeps every variable sign-constrained
    M.A(L.pareto_row, np) = -1.0;
    M.A(L.pareto_row + 1, np) = -1.0;
    M.b[L.pareto_row] = -(pt.alpha / pt.R_norm) * pt.R_ref - 1.0;
    M.b[L.pareto_row + 1] = (pt.beta() / pt.E_norm) * pt.E_ref - 1.0;
    M.c[np] = obj.pareto.refining() ? 0.0 : -1.0;
    if (obj.pareto.refining()) {
      M.A(L.pareto_row + 2, np) = 1.0;
      M.b[L.pareto_row + 2] = obj.pareto.chi_cap;
    }
  }
  if (L.bits_row >= 0) M.b[L.bits_row] = -cfg.min_useful_bits;
  return M;
}

/// Duals of the master mapped to multiplier form, and per-device weights.
struct Pricing {
  DualVars duals;
  std::vector<Weights> w;
  std::vector<double> local_price;
  std::vector<double> cross;
};

inline Pricing pricing_from_duals(const Vec& y, const Gains& g, const Scenario& sc,
                                  const ObjectiveSpec& obj, const Layout& L) {
  const int K = sc.K;
  Pricing P;
  P.duals = DualVars::zeros(K);
  P.duals.lambda = y[L.time()];
  for (int k = 0; k < K; ++k) {
    P.duals.rate_dual[k] = y[L.floor(k)];
    P.duals.nu[k] = y[L.energy(k)];
  }
  if (L.pareto_row >= 0) {
    P.duals.varsigma = y[L.pareto_row] * obj.pareto.alpha / obj.pareto.R_norm;
    P.duals.Omega_epi = y[L.pareto_row + 1] * obj.pareto.beta() / obj.pareto.E_norm;
  }
  if (L.bits_row >= 0) P.duals.bits_floor = y[L.bits_row];
  auto [a1, a2] = objective_weights(obj);
  for (int k = 0; k < K; ++k) {
    Weights w;
    w.wR = a1 + P.duals.rate_dual[k] + P.duals.varsigma + P.duals.bits_floor;
    w.wC = a2 + P.duals.nu[k] + P.duals.Omega_epi;
    w.wH = P.duals.nu[k];
    P.w.push_back(w);
    P.local_price.push_back(y[L.local(k)]);
    P.cross.push_back(cross_harvest_value(P.duals, k, g, sc));
    P.duals.mu[k] = frequency_cap_dual(w, k, sc);
  }
  return P;
}

/// Best column of every family under the current prices and its reduced cost.
struct Priced {
  Column col;
  double reduced_cost = 0;
};

inline std::vector<Priced> price_columns(const Pricing& P, const Gains& g, const Scenario& sc,
                                         const SolverConfig& cfg) {
  std::vector<Priced> out;
  const double lam = P.duals.lambda;
  for (int k = 0; k < sc.K; ++k) {
    const Weights& w = P.w[k];
    double rho = closed_form_rho(w, k, g.h2[k], g.g2[k], sc).rho;
    out.push_back({{ColumnKind::Bc, k, rho}, bc_unit_value(w, k, rho, g, sc, P.cross[k]) - lam});
    if (cfg.allow_at) {
      double p = closed_form_p(w, k, g.h2[k], sc);
      out.push_back({{ColumnKind::At, k, p}, at_unit_value(w, k, p, g, sc) - lam});
    }
    if (cfg.allow_local) {
      double f = closed_form_f(w, k, 0.0, sc);
      double per_second = w.wR * f / sc.C_cpu - w.wC * sc.eps[k] * f * f * f;
      out.push_back({{ColumnKind::Local, k, f}, per_second - P.local_price[k]});
    }
  }
  return out;
}

/// Merges the master solution into one allocation per device. Concavity of
/// the rates and harvest (and convexity of the CPU energy) make the merged
/// point at least as good as the master point in every constraint.
inline Allocation recover_allocation(const std::vector<Column>& pool, const Vec& x,
                                     const Scenario& sc) {
  Allocation a = Allocation::zeros(sc.K);
  std::vector<double> s(static_cast<std::size_t>(sc.K), 0.0), z = s, fl = s;
  for (std::size_t j = 0; j < pool.size(); ++j) {
    const double t = x[static_cast<Eigen::Index>(j)];
    if (t <= 0) continue;
    const Column& c = pool[j];
    switch (c.kind) {
      case ColumnKind::Bc:
        a.t_b[c.k] += t;
        s[c.k] += c.v * t;
        break;
      case ColumnKind::At:
        a.t_o[c.k] += t;
        z[c.k] += c.v * t;
        break;
      case ColumnKind::Local: fl[c.k] += c.v * t; break;
    }
  }
  for (int k = 0; k < sc.K; ++k) {
    a.rho[k] = a.t_b[k] > 0 ? std::clamp(s[k] / a.t_b[k], 0.0, 1.0) : 0.0;
    a.p[k] = a.t_o[k] > 0 ? z[k] / a.t_o[k] : 0.0;
    a.tau[k] = sc.T;
    a.f[k] = std::min(fl[k] / sc.T, sc.f_max);
  }
  return a;
}

inline std::vector<Column> seed_columns(const Scenario& sc, const SolverConfig& cfg) {
  std::vector<Column> pool;
  for (int k = 0; k < sc.K; ++k) {
    pool.push_back({ColumnKind::Bc, k, 1.0});
    pool.push_back({ColumnKind::Bc, k, 0.5});
    if (cfg.allow_at) pool.push_back({ColumnKind::At, k, 1e-3});
    if (cfg.allow_local) pool.push_back({ColumnKind::Local, k, std::min(1e7, sc.f_max)});
  }
  return pool;
}

inline bool column_allowed(const Column& c, const SolverConfig& cfg) {
  if (c.kind == ColumnKind::At) return cfg.allow_at;
  if (c.kind == ColumnKind::Local) return cfg.allow_local;
  return true;
}

inline double master_residual(const Master& M, const Vec& x) {
  Vec r = M.A * x - M.b;
  double worst = 0;
  for (Eigen::Index i = 0; i < r.size(); ++i)
    worst = std::max(worst, r[i] / std::max(1e-12, std::abs(M.b[i]) + M.A.row(i).cwiseAbs().maxCoeff() * 1e-3));
  return worst;
}

}  // namespace detail

/// Objective of an allocation in the units used by `ResourceSolution::value`.
inline double mode_value(const ObjectiveSpec& obj, const Metrics& m) {
  switch (obj.mode) {
    case Mode::Throughput: return m.R_sum;
    case Mode::Energy: return m.E_total;
    case Mode::Weighted: return m.R_sum - obj.ratio * m.E_total;
    case Mode::Pareto: {
      const auto& p = obj.pareto;
      return std::max(p.alpha / p.R_norm * (p.R_ref - m.R_sum),
                      p.beta() / p.E_norm * (m.E_total - p.E_ref));
    }
    case Mode::Feasibility: return 0.0;
  }
  return 0.0;
}

/// Column generation on the time-sharing master LP. Each pricing round maximizes
/// the per-device Lagrangian in closed form (rho*, p*, f*), which both proposes
/// new columns and yields a Lagrangian upper bound; the loop stops once the
/// bound meets the master value.
inline ResourceSolution solve_column_generation(const Gains& g, const Scenario& sc,
                                                const ObjectiveSpec& obj,
                                                const SolverConfig& cfg,
                                                std::vector<Column> pool = {}) {
  if (pool.empty()) pool = detail::seed_columns(sc, cfg);
  pool.erase(std::remove_if(pool.begin(), pool.end(),
                            [&](const Column& c) { return !detail::column_allowed(c, cfg); }),
             pool.end());
  const auto L = detail::make_layout(sc, obj, cfg);
  const bool normalized = (obj.mode == Mode::Pareto && !obj.pareto.refining()) ||
                          obj.mode == Mode::Feasibility;
  std::vector<detail::ColumnData> data;
  for (const auto& c : pool) data.push_back(detail::column_data(c, g, sc));

  ResourceSolution out;
  lp::Options lopt;
  lopt.opt_tol = cfg.lp_tolerance;
  lp::Result res;
  detail::Master M;
  detail::Pricing P;
  double best_ub = std::numeric_limits<double>::infinity();
  for (int it = 0; it < cfg.max_iters; ++it) {
    M = detail::build_master(pool, data, g, sc, obj, cfg, L);
    res = lp::solve(M.A, M.b, M.c, lopt);
    out.iterations = it + 1;
    if (res.status == lp::Status::Infeasible) {
      out.infeasible = true;
      break;
    }
    if (res.status != lp::Status::Optimal) break;
    P = detail::pricing_from_duals(res.y, g, sc, obj, L);
    auto priced = detail::price_columns(P, g, sc, cfg);
    double ub = M.b.dot(res.y);
    for (const auto& pc : priced) ub += sc.T * std::max(0.0, pc.reduced_cost);
    best_ub = std::min(best_ub, ub);
    out.trace.push_back({it, ub, res.objective, detail::master_residual(M, res.x)});

    const double val = res.objective;
    double scale = normalized ? 1.0 : std::max({std::abs(val), std::abs(best_ub), 1e-300});
    if (obj.mode == Mode::Weighted) {
      double bits = 0;
      for (int j = 0; j < M.n_pool; ++j) bits += res.x[j] * data[j].bits;
      scale = std::max(scale, bits);
    }
    const double tol = normalized ? cfg.tol_abs : cfg.tol_rel * scale;
    if (obj.mode == Mode::Feasibility && best_ub < -cfg.tol_abs) {
      out.infeasible = true;  // Lagrangian certificate: no point meets every floor
      break;
    }
    if (obj.mode == Mode::Feasibility && val >= -cfg.tol_abs) {
      out.converged = true;
      break;
    }
    if (best_ub - val <= tol) {
      out.converged = true;
      break;
    }
    const double add_tol = std::max(1e-14, 1e-3 * tol / (sc.T * sc.K));
    int added = 0;
    for (const auto& pc : priced) {
      if (pc.reduced_cost <= add_tol) continue;
      if (std::find(pool.begin(), pool.end(), pc.col) != pool.end()) continue;
      pool.push_back(pc.col);
      data.push_back(detail::column_data(pc.col, g, sc));
      ++added;
    }
    if (added == 0) {
      out.converged = best_ub - val <= 1e3 * tol;
      break;
    }
  }
  out.pool = pool;
  if (out.infeasible || res.status != lp::Status::Optimal) {
    out.infeasible = true;
    out.alloc = Allocation::zeros(sc.K);
    for (auto& t : out.alloc.tau) t = sc.T;
    return out;
  }
  out.lp_value = res.objective;
  out.upper_bound = best_ub;
  out.duals = P.duals;
  out.alloc = detail::recover_allocation(pool, res.x, sc);
  out.metrics = system_metrics(out.alloc, g, sc);
  out.value = mode_value(obj, out.metrics);
  if (obj.mode == Mode::Pareto) out.chi = out.value;
  return out;
}

/// Projected-subgradient alternative: duals follow Polyak steps of
/// [y - step * (b - A x(y))]^+, where x(y) is the closed-form Lagrangian
/// maximizer. Every maximizer is kept as a column and the primal point is
/// recovered from the master LP over those columns.
inline ResourceSolution solve_subgradient(const Gains& g, const Scenario& sc,
                                          const ObjectiveSpec& obj, const SolverConfig& cfg,
                                          std::vector<Column> pool = {}) {
  if (pool.empty()) pool = detail::seed_columns(sc, cfg);
  const auto L = detail::make_layout(sc, obj, cfg);
  const bool normalized = obj.mode == Mode::Pareto || obj.mode == Mode::Feasibility;
  lp::Options lopt;
  lopt.opt_tol = cfg.lp_tolerance;

  std::vector<detail::ColumnData> data;
  for (const auto& c : pool) data.push_back(detail::column_data(c, g, sc));
  auto master = [&]() {
    auto M = detail::build_master(pool, data, g, sc, obj, cfg, L);
    return std::make_pair(M, lp::solve(M.A, M.b, M.c, lopt));
  };
  auto [M0, r0] = master();
  ResourceSolution out;
  if (r0.status != lp::Status::Optimal) {
    out.infeasible = true;
    out.alloc = Allocation::zeros(sc.K);
    return out;
  }
  double lower = r0.objective;
  // row scales so that one step moves every multiplier comparably
  Vec rscale(L.rows);
  for (int i = 0; i < L.rows; ++i)
    rscale[i] = 1.0 / std::max({std::abs(M0.b[i]), M0.A.row(i).cwiseAbs().maxCoeff(), 1e-300});
  Vec y = r0.y;  // warm start from the seed master duals
  double best_ub = std::numeric_limits<double>::infinity();
  double theta = 2.0 * cfg.step0 * 10.0;
  int since_improve = 0;
  for (int it = 0; it < cfg.max_iters; ++it) {
    auto P = detail::pricing_from_duals(y, g, sc, obj, L);
    auto priced = detail::price_columns(P, g, sc, cfg);
    // Lagrangian value and the subgradient b - A x(y)
    Vec ax = Vec::Zero(L.rows);
    double lag = M0.b.dot(y);
    for (const auto& pc : priced) {
      if (pc.reduced_cost <= 0) continue;
      lag += sc.T * pc.reduced_cost;
      std::vector<Column> one{pc.col};
      std::vector<detail::ColumnData> od{detail::column_data(pc.col, g, sc)};
      auto Mc = detail::build_master(one, od, g, sc, obj, cfg, L);
      ax += sc.T * Mc.A.col(0);
      if (std::find(pool.begin(), pool.end(), pc.col) == pool.end()) {
        pool.push_back(pc.col);
        data.push_back(od[0]);
      }
    }
    if (!std::isfinite(best_ub) || lag < best_ub - 1e-12 * std::abs(best_ub)) {
      best_ub = lag;
      since_improve = 0;
    } else if (++since_improve > 20) {
      theta *= 0.5;
      since_improve = 0;
    }
    if ((it + 1) % 10 == 0) {
      auto [M, r] = master();
      if (r.status == lp::Status::Optimal) lower = std::max(lower, r.objective);
    }
    out.trace.push_back({it, lag, lower, 0.0});
    out.iterations = it + 1;
    double scale = normalized ? 1.0 : std::max({std::abs(lower), std::abs(best_ub), 1e-300});
    if (best_ub - lower <= (normalized ? cfg.tol_abs : cfg.tol_rel) * scale) {
      out.converged = true;
      break;
    }
    Vec sub = (M0.b - ax).cwiseProduct(rscale);
    double nrm2 = sub.squaredNorm();
    if (nrm2 <= 0) break;
    double step = theta * (lag - lower) / nrm2;
    for (int i = 0; i < L.rows; ++i) {
      double yi_scaled = y[i] / rscale[i];
      yi_scaled = std::max(0.0, yi_scaled - step * sub[i]);
      y[i] = yi_scaled * rscale[i];
    }
  }
  auto [Mf, rf] = master();
  if (rf.status != lp::Status::Optimal) {
    out.infeasible = true;
    out.alloc = Allocation::zeros(sc.K);
    return out;
  }
  out.pool = pool;
  out.lp_value = rf.objective;
  out.upper_bound = best_ub;
  out.duals = detail::pricing_from_duals(rf.y, g, sc, obj, L).duals;
  out.alloc = detail::recover_allocation(pool, rf.x, sc);
  out.metrics = system_metrics(out.alloc, g, sc);
  out.value = mode_value(obj, out.metrics);
  if (obj.mode == Mode::Pareto) out.chi = out.value;
  return out;
}

inline ResourceSolution solve_mode(const Gains& g, const Scenario& sc, const ObjectiveSpec& obj,
                                   const SolverConfig& cfg, std::vector<Column> pool = {}) {
  return cfg.method == SolverConfig::Method::Subgradient
             ? solve_subgradient(g, sc, obj, cfg, std::move(pool))
             : solve_column_generation(g, sc, obj, cfg, std::move(pool));
}

/// Phase one: finds a point meeting every rate floor or certifies that none
/// exists. The returned pool warm-starts the other modes.
inline ResourceSolution find_feasible(const Gains& g, const Scenario& sc, const SolverConfig& cfg,
                                      std::vector<Column> pool = {}) {
  ObjectiveSpec obj;
  obj.mode = Mode::Feasibility;
  SolverConfig c = cfg;
  c.method = SolverConfig::Method::ColumnGeneration;
  return solve_column_generation(g, sc, obj, c, std::move(pool));
}

namespace detail {
inline ResourceSolution solve_or_throw(const Gains& g, const Scenario& sc, const ObjectiveSpec& obj,
                                       const SolverConfig& cfg, const char* stage,
                                       const std::vector<Column>* warm) {
  std::vector<Column> pool;
  if (warm && !warm->empty()) {
    pool = *warm;
  } else {
    auto f = find_feasible(g, sc, cfg);
    if (f.infeasible) throw InfeasibleError(stage, "rate floors cannot be met");
    pool = f.pool;
  }
  auto s = solve_mode(g, sc, obj, cfg, pool);
  if (s.infeasible) throw InfeasibleError(stage, "resource subproblem infeasible");
  return s;
}
}  // namespace detail

/// Maximizes total delivered bits for fixed phases.
inline ResourceSolution solve_throughput_max(const Gains& g, const Scenario& sc,
                                             const SolverConfig& cfg = {},
                                             const std::vector<Column>* warm = nullptr) {
  ObjectiveSpec obj;
  obj.mode = Mode::Throughput;
  return detail::solve_or_throw(g, sc, obj, cfg, "throughput", warm);
}

inline ResourceSolution solve_throughput_max(const ChannelSet& ch, const PhaseShifts& th,
                                             const Scenario& sc, const SolverConfig& cfg = {}) {
  return solve_throughput_max(gain_powers(ch, th), sc, cfg);
}

/// Minimizes total consumed energy subject to the rate floors.
inline ResourceSolution solve_energy_min(const Gains& g, const Scenario& sc,
                                         const SolverConfig& cfg = {},
                                         const std::vector<Column>* warm = nullptr) {
  ObjectiveSpec obj;
  obj.mode = Mode::Energy;
  return detail::solve_or_throw(g, sc, obj, cfg, "energy", warm);
}

inline ResourceSolution solve_energy_min(const ChannelSet& ch, const PhaseShifts& th,
                                         const Scenario& sc, const SolverConfig& cfg = {}) {
  return solve_energy_min(gain_powers(ch, th), sc, cfg);
}

struct Utopia {
  double R_max = 0;
  double E_min = 0;
  std::string provenance;
  double R_norm() const { return std::max(1.0, std::abs(R_max)); }
  double E_norm() const { return std::max(1e-9, std::abs(E_min)); }
};

/// Tchebycheff point: minimizes chi subject to
///   (alpha/|R_max|)(R_max - R) <= chi,  (beta/|E_min|)(E - E_min) <= chi.
inline ResourceSolution solve_pareto_point(double alpha, double beta, const Utopia& u,
                                           const Gains& g, const Scenario& sc,
                                           const SolverConfig& cfg = {},
                                           const std::vector<Column>* warm = nullptr) {
  if (alpha < 0 || beta < 0 || std::abs(alpha + beta - 1.0) > 1e-9)
    throw ConfigError("pareto weights must be non-negative and sum to one");
  if (!(u.R_norm() > 0) || !(u.E_norm() > 0)) throw ConfigError("utopia normalizers vanish");
  ObjectiveSpec obj;
  obj.mode = Mode::Pareto;
  obj.pareto = {alpha, u.R_max, u.E_min, u.R_norm(), u.E_norm()};
  auto first = detail::solve_or_throw(g, sc, obj, cfg, "pareto", warm);
  if (!cfg.refine_pareto) return first;
  obj.pareto.chi_cap = -first.lp_value + std::max(cfg.tol_abs, 1e-8 * std::abs(first.lp_value));
  auto second = solve_mode(g, sc, obj, cfg, first.pool);
  if (second.infeasible) return first;
  second.chi = second.value;
  second.trace.insert(second.trace.begin(), first.trace.begin(), first.trace.end());
  second.iterations += first.iterations;
  return second;
}

inline ResourceSolution solve_pareto_point(double alpha, double beta, const Utopia& u,
                                           const ChannelSet& ch, const PhaseShifts& th,
                                           const Scenario& sc, const SolverConfig& cfg = {}) {
  return solve_pareto_point(alpha, beta, u, gain_powers(ch, th), sc, cfg);
}

/// Maximizes bits - ratio * energy (one Dinkelbach subproblem).
inline ResourceSolution solve_weighted(double ratio, const Gains& g, const Scenario& sc,
                                       const SolverConfig& cfg = {},
                                       const std::vector<Column>* warm = nullptr) {
  ObjectiveSpec obj;
  obj.mode = Mode::Weighted;
  obj.ratio = ratio;
  return detail::solve_or_throw(g, sc, obj, cfg, "weighted", warm);
}

}  // namespace rismec

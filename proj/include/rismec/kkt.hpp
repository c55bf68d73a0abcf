// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rismec/netmodel.hpp"
#include "rismec/physics.hpp"
#include "rismec/scenario.hpp"
#include "rismec/types.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace rismec {

/// Which scalar problem a Lagrangian belongs to.
///  Throughput: maximize bits.        Energy: minimize consumed energy.
///  Pareto: Tchebycheff min-max.      Weighted: bits - ratio * energy.
///  Feasibility: phase-one problem (only the rate floors carry weight).
enum class Mode { Throughput, Energy, Pareto, Weighted, Feasibility };

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::Throughput: return "throughput";
    case Mode::Energy: return "energy";
    case Mode::Pareto: return "pareto";
    case Mode::Weighted: return "weighted";
    case Mode::Feasibility: return "feasibility";
  }
  return "?";
}

/// Lagrange multipliers. `rate_dual` is the rate-floor multiplier of every
/// mode. `varsigma` and `Omega_epi` are the throughput / energy epigraph
/// multipliers of the Pareto mode, already multiplied by their normalized
/// weights (alpha/|R| and beta/|E|). `bits_floor` prices the optional
/// minimum-useful-bits row of the weighted mode.
struct DualVars {
  double lambda = 0;
  std::vector<double> mu, omega, nu, rate_dual;
  double varsigma = 0;
  double Omega_epi = 0;
  double bits_floor = 0;

  static DualVars zeros(int K) {
    DualVars d;
    auto z = std::vector<double>(static_cast<std::size_t>(K), 0.0);
    d.mu = d.omega = d.nu = d.rate_dual = z;
    return d;
  }

  bool nonnegative() const {
    auto ok = [](const std::vector<double>& v) {
      return std::all_of(v.begin(), v.end(), [](double x) { return x >= 0; });
    };
    return lambda >= 0 && varsigma >= 0 && Omega_epi >= 0 && bits_floor >= 0 && ok(mu) &&
           ok(omega) && ok(nu) && ok(rate_dual);
  }
};

/// Per-device prices seen by the closed forms: value of one bit (wR), cost
/// of one joule consumed (wC) and value of one joule harvested (wH).
struct Weights {
  double wR = 0;
  double wC = 0;
  double wH = 0;
};

inline Weights device_weights(Mode mode, const DualVars& d, int k, double ratio = 0.0) {
  const double om = d.rate_dual[k];
  const double nu = d.nu[k];
  switch (mode) {
    case Mode::Throughput: return {1.0 + om, nu, nu};
    case Mode::Energy: return {om, 1.0 + nu, nu};
    case Mode::Pareto: return {om + d.varsigma, d.Omega_epi + nu, nu};
    case Mode::Weighted: return {1.0 + om + d.bits_floor, ratio + nu, nu};
    case Mode::Feasibility: return {om, nu, nu};
  }
  return {};
}

inline double clip_dual(double x) { return std::clamp(x, 1e-12, 1e12); }

// ---------------------------------------------------------------------------
// closed-form maximizers of the per-device Lagrangian
// ---------------------------------------------------------------------------

/// Stationary AT power before projection (may be negative).
inline double stationary_p(const Weights& w, int /*k*/, double h2, const Scenario& sc) {
  return w.wR * sc.bandwidth * sc.delta / (clip_dual(w.wC) * kLn2) - sc.sigma2 / h2;
}

inline double closed_form_p(const Weights& w, int k, double h2, const Scenario& sc) {
  if (!(h2 > 0) || w.wR <= 0) return 0.0;
  return std::clamp(stationary_p(w, k, h2, sc), 0.0, sc.p_ceiling);
}

inline double closed_form_p(Mode mode, const DualVars& d, int k, double h2, const Scenario& sc,
                            double ratio = 0.0) {
  return closed_form_p(device_weights(mode, d, k, ratio), k, h2, sc);
}

/// Radicand of the CPU-frequency stationarity condition; `mu` is the
/// multiplier of the f <= f_max bound.
inline double frequency_radicand(const Weights& w, int k, double mu, const Scenario& sc) {
  return (w.wR * sc.T / sc.C_cpu - mu) / (3.0 * clip_dual(w.wC) * sc.eps[k] * sc.T);
}

inline double closed_form_f(const Weights& w, int k, double mu, const Scenario& sc) {
  double r = frequency_radicand(w, k, mu, sc);
  if (!(r > 0)) return 0.0;
  return std::min(std::sqrt(r), sc.f_max);
}

inline double closed_form_f(Mode mode, const DualVars& d, int k, const Scenario& sc,
                            double ratio = 0.0) {
  double mu = d.mu.empty() ? 0.0 : d.mu[k];
  return closed_form_f(device_weights(mode, d, k, ratio), k, mu, sc);
}

/// Multiplier that makes a clipped frequency satisfy stationarity.
inline double frequency_cap_dual(const Weights& w, int k, const Scenario& sc) {
  double v = w.wR * sc.T / sc.C_cpu - 3.0 * w.wC * sc.eps[k] * sc.f_max * sc.f_max * sc.T;
  return std::max(0.0, v);
}

struct RhoSolution {
  double rho = 0;         // projected onto [0, 1]
  double root = 0;        // stationary point before projection (when one exists)
  bool has_root = false;
  bool degenerate = false;  // Lagrangian (numerically) flat in rho
  double X = 0, Y = 0, Z = 0;
};

/// Reflection coefficient maximizing
///   wR * B * log2(1 + q rho) + wH * eh((1 - rho) P g2),  q = zeta P g2 h2 / sigma2.
/// Stationarity reduces to X rho^2 - Y rho + Z = 0; the smaller root is the
/// maximizer of this concave function.
inline RhoSolution closed_form_rho(const Weights& w, int k, double h2, double g2,
                                   const Scenario& sc) {
  RhoSolution out;
  const EhModel m = sc.eh(k);
  const double q = sc.zeta * sc.P_max * g2 * h2 / sc.sigma2;
  const double x0 = sc.P_max * g2;
  const double A = w.wR * sc.bandwidth * q / kLn2;
  const double ac = m.a * m.c - m.b;
  out.X = A * x0 * x0;
  out.Y = 2.0 * out.X + 2.0 * m.c * A * x0 + w.wH * ac * x0 * q;
  out.Z = A * (x0 + m.c) * (x0 + m.c) - w.wH * ac * x0;
  const double X = out.X, Y = out.Y, Z = out.Z;
  const double scale = std::max({std::abs(X), std::abs(Y), std::abs(Z)});
  if (!(scale > 0) || !std::isfinite(scale)) {
    out.degenerate = true;
    out.rho = 0.0;
    return out;
  }
  // the derivative at rho = 0 has the sign of Z
  if (Z <= 0) {
    out.rho = 0.0;
    if (X > 0 && Y * Y - 4 * X * Z >= 0) {
      out.root = 2.0 * Z / (Y + std::sqrt(Y * Y - 4 * X * Z));
      out.has_root = Y > 0;
    }
    return out;
  }
  if (X <= 1e-300 * scale) {
    if (Y > 0) {
      out.root = Z / Y;
      out.has_root = true;
      out.rho = std::clamp(out.root, 0.0, 1.0);
    } else {
      out.rho = 1.0;
    }
    return out;
  }
  const double disc = Y * Y - 4.0 * X * Z;
  if (disc < 0 || Y <= 0) {
    out.rho = 1.0;  // derivative positive throughout
    return out;
  }
  out.root = 2.0 * Z / (Y + std::sqrt(disc));
  out.has_root = true;
  out.rho = std::clamp(out.root, 0.0, 1.0);
  return out;
}

/// Mode-level wrapper. A positive omega (s_k <= t_b binding) selects the
/// zero branch of the case split; solvers in this library keep omega at
/// zero because the [0, 1] box is enforced by projection instead.
inline double closed_form_rho(Mode mode, const DualVars& d, int k, double h2, double g2,
                              const Scenario& sc, double ratio = 0.0) {
  if (!d.omega.empty() && d.omega[k] > 0) return 0.0;
  return closed_form_rho(device_weights(mode, d, k, ratio), k, h2, g2, sc).rho;
}

// ---------------------------------------------------------------------------
// per-unit-time Lagrangian values (used for pricing and time allocation)
// ---------------------------------------------------------------------------

/// Harvested power of device i when it is not the one backscattering.
inline double idle_harvest_power(int i, const Gains& g, const Scenario& sc) {
  return eh_power(sc.eh(i), sc.P_max * g.g2[i]);
}

/// Value of one second of BC for device k at reflection rho; `cross` is the
/// energy-dual-weighted harvest this slot gives the other devices.
inline double bc_unit_value(const Weights& w, int k, double rho, const Gains& g,
                            const Scenario& sc, double cross) {
  double bits = bc_rate(1.0, rho, g.h2[k], g.g2[k], sc);
  double own = eh_power(sc.eh(k), std::max(0.0, 1.0 - rho) * sc.P_max * g.g2[k]);
  return w.wR * bits - w.wC * sc.P_circ_bc[k] + w.wH * own + cross;
}

inline double at_unit_value(const Weights& w, int k, double p, const Gains& g,
                            const Scenario& sc) {
  double bits = at_rate(1.0, p, g.h2[k], sc);
  return w.wR * bits - w.wC * (p / sc.delta + sc.p_circ_at[k]);
}

/// Value of the whole block of local computing at frequency f.
inline double local_value(const Weights& w, int k, double f, double mu, const Scenario& sc) {
  return w.wR * local_bits(f, sc.T, sc.C_cpu) - w.wC * local_energy(f, sc.T, sc.eps[k]) - mu * f;
}

inline double cross_harvest_value(const DualVars& d, int k, const Gains& g, const Scenario& sc) {
  double s = 0;
  for (int i = 0; i < sc.K; ++i)
    if (i != k) s += d.nu[i] * idle_harvest_power(i, g, sc);
  return s;
}

// ---------------------------------------------------------------------------
// time allocation
// ---------------------------------------------------------------------------

struct TimeSplit {
  std::vector<double> t_b, t_o;
  double value = 0;  // Lagrangian contribution of the chosen vertex
};

/// Maximizes sum_j coeff_j t_j over {t >= 0, sum t <= T}. Coefficients are
/// ordered [BC_0..BC_{K-1}, AT_0..AT_{K-1}]. The optimum sits at one of the
/// 2K+1 vertices: all time on the best positive coefficient, or none.
inline TimeSplit vertex_time_allocation(const std::vector<double>& coeff, double T) {
  const std::size_t K = coeff.size() / 2;
  TimeSplit out{std::vector<double>(K, 0.0), std::vector<double>(K, 0.0), 0.0};
  std::size_t best = coeff.size();
  double best_v = 0.0;
  for (std::size_t j = 0; j < coeff.size(); ++j)
    if (coeff[j] > best_v) {
      best_v = coeff[j];
      best = j;
    }
  if (best == coeff.size()) return out;
  (best < K ? out.t_b[best] : out.t_o[best - K]) = T;
  out.value = best_v * T;
  return out;
}

struct FixedControls {
  std::vector<double> rho, p, f;
};

/// Marginal Lagrangian value of each BC / AT second for fixed (rho, p, f).
inline std::vector<double> time_coefficients(Mode mode, const DualVars& d,
                                             const FixedControls& x, const Gains& g,
                                             const Scenario& sc, double ratio = 0.0) {
  std::vector<double> c(2 * static_cast<std::size_t>(sc.K));
  for (int k = 0; k < sc.K; ++k) {
    Weights w = device_weights(mode, d, k, ratio);
    c[k] = bc_unit_value(w, k, x.rho[k], g, sc, cross_harvest_value(d, k, g, sc));
    c[sc.K + k] = at_unit_value(w, k, x.p[k], g, sc);
  }
  return c;
}

inline TimeSplit time_allocation_lp(Mode mode, const DualVars& d, const FixedControls& x,
                                    const Gains& g, const Scenario& sc, double ratio = 0.0) {
  return vertex_time_allocation(time_coefficients(mode, d, x, g, sc, ratio), sc.T);
}

// ---------------------------------------------------------------------------
// projected subgradient step on the multipliers
// ---------------------------------------------------------------------------

/// Constraint slacks (>= 0 when satisfied) at the current primal point.
struct Slacks {
  double time = 0;                 // T - sum(t_b + t_o)
  std::vector<double> f_cap;       // f_max - f
  std::vector<double> omega;       // t_b - s
  std::vector<double> energy;      // Q + harvested - consumed
  std::vector<double> rate;        // bits - gamma_min
  double throughput_epi = 0;       // Pareto: chi - alpha-weighted throughput deviation
  double energy_epi = 0;           // Pareto: chi - beta-weighted energy deviation
  double bits_floor = 0;           // Weighted: total bits - minimum useful bits
};

/// multiplier <- [multiplier - step * slack]^+ for every multiplier the mode
/// carries. Negative slack (violation) therefore raises the multiplier.
inline DualVars dual_update(Mode mode, const DualVars& d, const Slacks& s, double step) {
  DualVars n = d;
  auto upd = [step](double m, double slack) { return std::max(0.0, m - step * slack); };
  n.lambda = upd(d.lambda, s.time);
  for (std::size_t k = 0; k < d.nu.size(); ++k) {
    if (k < s.f_cap.size()) n.mu[k] = upd(d.mu[k], s.f_cap[k]);
    if (k < s.omega.size()) n.omega[k] = upd(d.omega[k], s.omega[k]);
    if (k < s.energy.size()) n.nu[k] = upd(d.nu[k], s.energy[k]);
    if (k < s.rate.size()) n.rate_dual[k] = upd(d.rate_dual[k], s.rate[k]);
  }
  if (mode == Mode::Pareto) {
    n.varsigma = upd(d.varsigma, s.throughput_epi);
    n.Omega_epi = upd(d.Omega_epi, s.energy_epi);
  }
  if (mode == Mode::Weighted) n.bits_floor = upd(d.bits_floor, s.bits_floor);
  return n;
}

}  // namespace rismec

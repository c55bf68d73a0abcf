// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rismec/netmodel.hpp"
#include "rismec/scenario.hpp"
#include "rismec/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace rismec {

/// Per-device time split, powers, reflection and CPU settings.
struct Allocation {
  std::vector<double> t_b, t_o, p, rho, f, tau;

  static Allocation zeros(int K) {
    auto z = std::vector<double>(static_cast<std::size_t>(K), 0.0);
    return {z, z, z, z, z, z};
  }
  int K() const { return static_cast<int>(t_b.size()); }
  double s(int k) const { return rho[k] * t_b[k]; }
  double z(int k) const { return p[k] * t_o[k]; }
  double total_time() const {
    double t = 0;
    for (int k = 0; k < K(); ++k) t += t_b[k] + t_o[k];
    return t;
  }
};

struct DeviceMetrics {
  double gamma_b = 0;       // BC bits
  double gamma_o = 0;       // AT bits
  double gamma_local = 0;   // locally computed bits
  double E1 = 0;            // BC circuit energy
  double E2 = 0;            // AT + computing energy
  double E_harvested = 0;
};

struct Metrics {
  double R_sum = 0;
  double E_total = 0;
  double EE = 0;
  bool ee_unbounded = false;  // bits delivered at zero energy
  std::vector<DeviceMetrics> devices;
};

// ---------------------------------------------------------------------------
// elementary physics
// ---------------------------------------------------------------------------

inline double eh_power(const EhModel& m, double x) {
  if (x < 0) throw DomainError("eh_power: negative input power");
  return (m.a * x + m.b) / (x + m.c) - m.b / m.c;
}

/// d/dx of the rational harvesting curve.
inline double eh_slope(const EhModel& m, double x) {
  double d = x + m.c;
  return (m.a * m.c - m.b) / (d * d);
}

inline double bc_rate(double t_b, double s_aux, double h2, double g2, const Scenario& sc) {
  if (t_b < 0 || s_aux < 0 || h2 < 0 || g2 < 0) throw DomainError("bc_rate: negative input");
  if (t_b == 0) return 0.0;
  double snr = sc.zeta * s_aux * sc.P_max * h2 * g2 / (t_b * sc.sigma2);
  return sc.bandwidth * t_b * std::log2(1.0 + snr);
}

inline double at_rate(double t_o, double z_aux, double h2, const Scenario& sc) {
  if (t_o < 0 || z_aux < 0 || h2 < 0) throw DomainError("at_rate: negative input");
  if (t_o == 0) return 0.0;
  return sc.bandwidth * t_o * std::log2(1.0 + z_aux * h2 / (t_o * sc.sigma2));
}

inline double local_bits(double f, double tau, double C_cpu) {
  if (f < 0 || tau < 0) throw DomainError("local_bits: negative input");
  return tau * f / C_cpu;
}

inline double local_energy(double f, double tau, double eps) {
  if (f < 0 || tau < 0) throw DomainError("local_energy: negative input");
  return eps * f * f * f * tau;
}

/// Energy harvested by device k over the block: its own BC slot (reflecting
/// a fraction rho) plus the full incident power while others backscatter.
inline double harvested_energy(int k, const Allocation& a, const Gains& g, const Scenario& sc) {
  const EhModel m = sc.eh(k);
  double own = eh_power(m, std::max(0.0, 1.0 - a.rho[k]) * sc.P_max * g.g2[k]) * a.t_b[k];
  double others = 0;
  for (int i = 0; i < a.K(); ++i)
    if (i != k) others += a.t_b[i];
  return own + eh_power(m, sc.P_max * g.g2[k]) * others;
}

struct EnergyParts {
  double E1 = 0;
  double E2 = 0;
};

inline EnergyParts energy_consumed(int k, const Allocation& a, const Scenario& sc) {
  EnergyParts e;
  e.E1 = sc.P_circ_bc[k] * a.t_b[k];
  e.E2 = (a.p[k] / sc.delta) * a.t_o[k] + sc.p_circ_at[k] * a.t_o[k] +
         local_energy(a.f[k], a.tau[k], sc.eps[k]);
  return e;
}

inline Metrics system_metrics(const Allocation& a, const Gains& g, const Scenario& sc) {
  Metrics m;
  m.devices.resize(static_cast<std::size_t>(a.K()));
  for (int k = 0; k < a.K(); ++k) {
    auto& d = m.devices[k];
    d.gamma_b = bc_rate(a.t_b[k], a.s(k), g.h2[k], g.g2[k], sc);
    d.gamma_o = at_rate(a.t_o[k], a.z(k), g.h2[k], sc);
    d.gamma_local = local_bits(a.f[k], a.tau[k], sc.C_cpu);
    auto e = energy_consumed(k, a, sc);
    d.E1 = e.E1;
    d.E2 = e.E2;
    d.E_harvested = harvested_energy(k, a, g, sc);
    m.R_sum += d.gamma_b + d.gamma_o + d.gamma_local;
    m.E_total += d.E1 + d.E2;
  }
  if (m.E_total > 0) {
    m.EE = m.R_sum / m.E_total;
  } else if (m.R_sum > 0) {
    m.EE = std::numeric_limits<double>::infinity();
    m.ee_unbounded = true;
  }
  return m;
}

inline Metrics system_metrics(const Allocation& a, const ChannelSet& ch, const PhaseShifts& th,
                              const Scenario& sc) {
  return system_metrics(a, gain_powers(ch, th), sc);
}

// ---------------------------------------------------------------------------
// feasibility
// ---------------------------------------------------------------------------

/// Signed residuals, one entry per constraint instance; a value <= 0 means
/// satisfied. Each family keeps its natural unit (bits, J, s, Hz, W).
struct FeasibilityReport {
  std::vector<double> rate_floor;   // gamma_min - delivered bits
  std::vector<double> energy;       // consumed - (Q + harvested)
  double time = 0;                  // sum(t_b + t_o) - T
  std::vector<double> exec_time;    // tau - T
  std::vector<double> cpu;          // f - f_max
  std::vector<double> rho_range;    // max(-rho, rho - 1)
  double pb_power = 0;              // P_0 - P_max (P_0 is held at P_max)
  double nonneg = 0;                // largest negative entry, sign flipped

  /// Feasible when every residual is below `tol` times its family scale.
  bool feasible(const Scenario& sc, double tol = 1e-9) const {
    for (std::size_t k = 0; k < rate_floor.size(); ++k) {
      if (rate_floor[k] > tol * std::max(1.0, sc.gamma_min[k])) return false;
      if (energy[k] > tol * std::max(1e-9, sc.Q[k] + energy_scale[k])) return false;
      if (exec_time[k] > tol * sc.T || cpu[k] > tol * std::max(1.0, sc.f_max)) return false;
      if (rho_range[k] > tol) return false;
    }
    return time <= tol * sc.T && pb_power <= tol && nonneg <= tol;
  }

  double worst_relative(const Scenario& sc) const {
    double w = std::max({time / sc.T, pb_power, nonneg});
    for (std::size_t k = 0; k < rate_floor.size(); ++k) {
      w = std::max(w, rate_floor[k] / std::max(1.0, sc.gamma_min[k]));
      w = std::max(w, energy[k] / std::max(1e-9, sc.Q[k] + energy_scale[k]));
      w = std::max({w, exec_time[k] / sc.T, cpu[k] / std::max(1.0, sc.f_max), rho_range[k]});
    }
    return w;
  }

  std::vector<double> energy_scale;  // harvested energy, used for relative checks
};

inline FeasibilityReport check_feasible(const Allocation& a, const Gains& g, const Scenario& sc) {
  FeasibilityReport r;
  auto m = system_metrics(a, g, sc);
  double neg = 0;
  auto track = [&](const std::vector<double>& v) {
    for (double x : v) neg = std::max(neg, -x);
  };
  track(a.t_b);
  track(a.t_o);
  track(a.p);
  track(a.rho);
  track(a.f);
  track(a.tau);
  r.nonneg = neg;
  for (int k = 0; k < a.K(); ++k) {
    const auto& d = m.devices[k];
    r.rate_floor.push_back(sc.gamma_min[k] - (d.gamma_b + d.gamma_o + d.gamma_local));
    r.energy.push_back(d.E1 + d.E2 - (sc.Q[k] + d.E_harvested));
    r.energy_scale.push_back(d.E_harvested);
    r.exec_time.push_back(a.tau[k] - sc.T);
    r.cpu.push_back(a.f[k] - sc.f_max);
    r.rho_range.push_back(std::max(-a.rho[k], a.rho[k] - 1.0));
  }
  r.time = a.total_time() - sc.T;
  r.pb_power = 0.0;
  return r;
}

inline FeasibilityReport check_feasible(const Allocation& a, const ChannelSet& ch,
                                        const PhaseShifts& th, const Scenario& sc) {
  return check_feasible(a, gain_powers(ch, th), sc);
}

}  // namespace rismec

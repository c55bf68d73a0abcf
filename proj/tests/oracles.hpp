// SPDX-License-Identifier: Apache-2.0
#pragma once

// Exhaustive lattice searches for single-device instances. They evaluate the
// physics formulas directly and share no code with the solvers under test.

#include "rismec/physics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace oracle {

using namespace rismec;

inline std::vector<double> linear(double lo, double hi, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(lo + (hi - lo) * i / (n - 1));
  return v;
}

/// {0} followed by n log-spaced points in [lo, hi].
inline std::vector<double> zero_and_log(double lo, double hi, int n) {
  std::vector<double> v{0.0};
  for (int i = 0; i < n; ++i) v.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
  return v;
}

inline std::vector<double> merged(std::vector<double> a, const std::vector<double>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

struct Lattice {
  std::vector<double> t_b = merged(linear(0, 1, 41), zero_and_log(1e-5, 1, 60));
  std::vector<double> rho = linear(0, 1, 41);
  std::vector<double> t_o = merged(linear(0, 1, 41), zero_and_log(1e-5, 1, 30));
  std::vector<double> p = zero_and_log(1e-7, 10, 50);
};

struct Point {
  double bits = 0;
  double energy = 0;
  double budget = 0;  // Q + harvested
};

/// Visits every lattice combination of (rho, t_b, t_o, p) for device 0 of a
/// one-device scenario. Besides the lattice values, t_b also takes the value
/// at which backscatter alone exactly meets the rate floor.
inline void enumerate(const Gains& g, const Scenario& sc, const Lattice& L,
                      const std::function<void(const Point&)>& visit) {
  const double h2 = g.h2[0], g2 = g.g2[0];
  const EhModel m = sc.eh(0);
  for (double rho : L.rho) {
    const double bc_rate_1s = sc.bandwidth * std::log2(1 + sc.zeta * rho * sc.P_max * h2 * g2 / sc.sigma2);
    std::vector<double> tbs = L.t_b;
    if (bc_rate_1s > 0 && sc.gamma_min[0] > 0 && sc.gamma_min[0] / bc_rate_1s <= sc.T)
      tbs = merged(tbs, {sc.gamma_min[0] / bc_rate_1s});
    for (double tb : tbs) {
      if (tb == 0 && rho > 0) continue;
      const double bc_bits = tb * bc_rate_1s;
      const double harvest = tb * eh_power(m, (1 - rho) * sc.P_max * g2);
      for (double to : L.t_o) {
        if (tb + to > sc.T + 1e-12) break;
        for (double p : L.p) {
          if (to == 0 && p > 0) break;
          Point pt;
          pt.bits = bc_bits + sc.bandwidth * to * std::log2(1 + p * h2 / sc.sigma2);
          pt.energy = sc.P_circ_bc[0] * tb + (p / sc.delta + sc.p_circ_at[0]) * to;
          pt.budget = sc.Q[0] + harvest;
          if (pt.energy > pt.budget) break;
          visit(pt);
        }
      }
    }
  }
}

inline double local_f_for_energy(double e, const Scenario& sc) {
  return std::min(sc.f_max, std::cbrt(std::max(0.0, e) / (sc.eps[0] * sc.T)));
}

/// Largest delivered bits; the CPU burns whatever energy is left.
inline double throughput_max(const Gains& g, const Scenario& sc, const Lattice& L = {}) {
  double best = -1;
  enumerate(g, sc, L, [&](const Point& pt) {
    double f = local_f_for_energy(pt.budget - pt.energy, sc);
    double bits = pt.bits + sc.T * f / sc.C_cpu;
    if (bits + 1e-9 < sc.gamma_min[0]) return;
    best = std::max(best, bits);
  });
  return best;
}

/// Smallest consumed energy meeting the floor; the CPU covers the missing bits.
inline double energy_min(const Gains& g, const Scenario& sc, const Lattice& L = {}) {
  double best = std::numeric_limits<double>::infinity();
  enumerate(g, sc, L, [&](const Point& pt) {
    double missing = std::max(0.0, sc.gamma_min[0] - pt.bits);
    double f = missing * sc.C_cpu / sc.T;
    if (f > sc.f_max) return;
    double e = pt.energy + sc.eps[0] * f * f * f * sc.T;
    if (e > pt.budget) return;
    best = std::min(best, e);
  });
  return best;
}

/// Visits (bits, energy) over the lattice extended by a log grid in f.
inline void enumerate_with_f(const Gains& g, const Scenario& sc, const Lattice& L,
                             const std::vector<double>& fgrid,
                             const std::function<void(double bits, double energy)>& visit) {
  enumerate(g, sc, L, [&](const Point& pt) {
    auto try_f = [&](double f) {
      double e = pt.energy + sc.eps[0] * f * f * f * sc.T;
      if (e > pt.budget) return false;
      double bits = pt.bits + sc.T * f / sc.C_cpu;
      if (bits + 1e-9 >= sc.gamma_min[0]) visit(bits, e);
      return true;
    };
    // the frequency that exactly closes the gap to the floor
    double f_floor = std::max(0.0, sc.gamma_min[0] - pt.bits) * sc.C_cpu / sc.T;
    if (f_floor <= sc.f_max) try_f(f_floor);
    for (double f : fgrid)
      if (!try_f(f)) break;
  });
}

inline double best_ee(const Gains& g, const Scenario& sc, const Lattice& L,
                      const std::vector<double>& fgrid) {
  double best = 0;
  enumerate_with_f(g, sc, L, fgrid, [&](double bits, double e) {
    if (e > 0) best = std::max(best, bits / e);
  });
  return best;
}

/// min over the lattice of max(alpha/Rn (R_ref - R), beta/En (E - E_ref)).
inline double pareto_chi(const Gains& g, const Scenario& sc, double alpha, double R_ref,
                         double E_ref, const Lattice& L, const std::vector<double>& fgrid) {
  const double Rn = std::max(1.0, std::abs(R_ref)), En = std::max(1e-9, std::abs(E_ref));
  double best = std::numeric_limits<double>::infinity();
  enumerate_with_f(g, sc, L, fgrid, [&](double bits, double e) {
    best = std::min(best, std::max(alpha / Rn * (R_ref - bits), (1 - alpha) / En * (e - E_ref)));
  });
  return best;
}

}  // namespace oracle

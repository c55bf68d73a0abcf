// SPDX-License-Identifier: Apache-2.0
#include "rismec/physics.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace rismec;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const EhModel kTable{2.463, 1.635, 0.826};

Scenario unit_scenario(int K) {
  Scenario s = Scenario::defaults(K);
  s.bandwidth = 1.0;
  s.sigma2 = 1.0;
  s.zeta = 1.0;
  s.P_max = 1.0;
  return s;
}

Gains gains(std::vector<double> g2, std::vector<double> h2) {
  Gains g{Vec(g2.size()), Vec(h2.size())};
  for (std::size_t i = 0; i < g2.size(); ++i) {
    g.g2[static_cast<Eigen::Index>(i)] = g2[i];
    g.h2[static_cast<Eigen::Index>(i)] = h2[i];
  }
  return g;
}

}  // namespace

TEST_CASE("rational harvesting curve") {
  CHECK(eh_power(kTable, 0.0) == 0.0);
  CHECK_THAT(eh_power(kTable, 1e12), WithinRel(2.463 - 1.635 / 0.826, 1e-9));
  CHECK_THAT(eh_power(kTable, 1.0), WithinAbs(4.098 / 1.826 - 1.635 / 0.826, 1e-12));
  CHECK_THAT(eh_power(kTable, 1.0), WithinAbs(0.2649, 1e-4));
  CHECK_THROWS_AS(eh_power(kTable, -1e-3), DomainError);

  double prev = 0;
  for (int i = 1; i <= 1000; ++i) {
    double x = 0.01 * i;
    double v = eh_power(kTable, x);
    CHECK(v >= prev);
    prev = v;
  }
  // slope matches a central difference
  for (double x : {0.0, 0.3, 2.0}) {
    double h = 1e-6;
    double fd = (eh_power(kTable, x + h) - eh_power(kTable, std::max(0.0, x - h))) /
                (x + h - std::max(0.0, x - h));
    CHECK_THAT(eh_slope(kTable, x), WithinRel(fd, 1e-5));
  }
}

TEST_CASE("backscatter and active rates") {
  Scenario s = unit_scenario(1);
  CHECK(bc_rate(0, 0, 1, 1, s) == 0.0);
  CHECK_THAT(bc_rate(1, 1, 1, 1, s), WithinAbs(1.0, 1e-15));
  CHECK_THAT(bc_rate(1, 1, 3, 1, s), WithinAbs(2.0, 1e-15));
  CHECK_THROWS_AS(bc_rate(-1, 0, 1, 1, s), DomainError);

  CHECK(at_rate(0, 0, 1, s) == 0.0);
  CHECK_THAT(at_rate(1, 1, 1, s), WithinAbs(1.0, 1e-15));
  CHECK_THAT(at_rate(0.5, 7 * 0.5, 1, s), WithinAbs(1.5, 1e-15));

  // bandwidth factor and SNR gap
  Scenario t = s;
  t.bandwidth = 1e5;
  t.zeta = 0.5;
  CHECK_THAT(bc_rate(1, 1, 2, 1, t), WithinRel(1e5, 1e-14));

  // monotone in rho and in the beacon power
  double prev = 0;
  for (int i = 0; i <= 20; ++i) {
    double v = bc_rate(0.7, 0.7 * i / 20.0, 2.0, 3.0, s);
    CHECK(v >= prev);
    prev = v;
  }
  Scenario hi = s;
  hi.P_max = 2.0;
  CHECK(bc_rate(1, 0.5, 1, 1, hi) > bc_rate(1, 0.5, 1, 1, s));
}

TEST_CASE("local computing") {
  CHECK(local_bits(0, 1, 1000) == 0.0);
  CHECK(local_energy(0, 1, 1e-26) == 0.0);
  CHECK_THAT(local_bits(1e6, 1, 1000), WithinRel(1000.0, 1e-15));
  CHECK_THAT(local_energy(1e8, 1, 1e-26), WithinRel(0.01, 1e-12));
}

TEST_CASE("harvested energy") {
  Scenario s = Scenario::defaults(1);
  Allocation a = Allocation::zeros(1);
  a.t_b[0] = 0.7;
  a.rho[0] = 1.0;
  CHECK(harvested_energy(0, a, gains({1}, {1}), s) == 0.0);

  Scenario s2 = Scenario::defaults(2);
  Allocation z = Allocation::zeros(2);
  CHECK(harvested_energy(0, z, gains({1, 1}, {1, 1}), s2) == 0.0);

  Allocation b = Allocation::zeros(2);
  b.t_b = {0.5, 0.5};
  double e = harvested_energy(0, b, gains({1, 1}, {1, 1}), s2);
  CHECK_THAT(e, WithinAbs(eh_power(kTable, 1.0), 1e-15));
  CHECK_THAT(e, WithinAbs(0.2649, 1e-4));
}

TEST_CASE("consumed energy") {
  Scenario s = Scenario::defaults(1);
  Allocation a = Allocation::zeros(1);
  auto e0 = energy_consumed(0, a, s);
  CHECK(e0.E1 == 0.0);
  CHECK(e0.E2 == 0.0);
  a.t_b[0] = 1.0;
  CHECK_THAT(energy_consumed(0, a, s).E1, WithinRel(1e-4, 1e-15));
  Allocation b = Allocation::zeros(1);
  b.p[0] = 0.1;
  b.t_o[0] = 1.0;
  CHECK_THAT(energy_consumed(0, b, s).E2, WithinRel(0.105, 1e-14));
}

TEST_CASE("system metrics add up their parts") {
  Scenario s = Scenario::defaults(1);
  Allocation z = Allocation::zeros(1);
  auto m0 = system_metrics(z, gains({1e-3}, {1e-3}), s);
  CHECK(m0.R_sum == 0.0);
  CHECK(m0.E_total == 0.0);
  CHECK_FALSE(m0.ee_unbounded);

  Allocation loc = Allocation::zeros(1);
  loc.f[0] = 1e6;
  loc.tau[0] = 1.0;
  auto m1 = system_metrics(loc, gains({0}, {0}), s);
  CHECK_THAT(m1.R_sum, WithinRel(1000.0, 1e-14));
  CHECK_THAT(m1.E_total, WithinRel(1e-8, 1e-12));

  // compositional oracle on random allocations
  Scenario s3 = Scenario::defaults(3);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (int rep = 0; rep < 50; ++rep) {
    Allocation a = Allocation::zeros(3);
    Gains g = gains({u(rng) * 1e-3, u(rng) * 1e-3, u(rng) * 1e-3},
                    {u(rng) * 1e-4, u(rng) * 1e-4, u(rng) * 1e-4});
    for (int k = 0; k < 3; ++k) {
      a.t_b[k] = u(rng) / 6;
      a.t_o[k] = u(rng) / 6;
      a.rho[k] = u(rng);
      a.p[k] = u(rng) * 0.01;
      a.f[k] = u(rng) * 1e7;
      a.tau[k] = 1.0;
    }
    auto m = system_metrics(a, g, s3);
    double R = 0, E = 0;
    for (int k = 0; k < 3; ++k) {
      R += bc_rate(a.t_b[k], a.rho[k] * a.t_b[k], g.h2[k], g.g2[k], s3) +
           at_rate(a.t_o[k], a.p[k] * a.t_o[k], g.h2[k], s3) + local_bits(a.f[k], a.tau[k], s3.C_cpu);
      E += s3.P_circ_bc[k] * a.t_b[k] + (a.p[k] / s3.delta + s3.p_circ_at[k]) * a.t_o[k] +
           local_energy(a.f[k], a.tau[k], s3.eps[k]);
    }
    CHECK_THAT(m.R_sum, WithinRel(R, 1e-12));
    CHECK_THAT(m.E_total, WithinRel(E, 1e-12));
    CHECK_THAT(m.EE, WithinRel(R / E, 1e-12));
  }
}

TEST_CASE("zero energy with positive bits is flagged") {
  Scenario s = Scenario::defaults(1);
  s.P_circ_bc = {0.0};
  Allocation a = Allocation::zeros(1);
  a.t_b[0] = 1.0;
  a.rho[0] = 1.0;
  auto m = system_metrics(a, gains({1e-3}, {1e-3}), s);
  CHECK(m.R_sum > 0);
  CHECK(m.ee_unbounded);
  CHECK(std::isinf(m.EE));
}

TEST_CASE("feasibility residuals") {
  Scenario s = Scenario::defaults(1);
  s.gamma_min = {0.0};
  s.Q = {0.0};
  Allocation z = Allocation::zeros(1);
  CHECK(check_feasible(z, gains({1e-3}, {1e-3}), s).feasible(s));
  s.gamma_min = {10.0};
  auto r = check_feasible(z, gains({1e-3}, {1e-3}), s);
  CHECK_FALSE(r.feasible(s));
  CHECK_THAT(r.rate_floor[0], WithinAbs(10.0, 1e-12));

  Scenario s2 = Scenario::defaults(1);
  s2.gamma_min = {0.0};
  Allocation over = Allocation::zeros(1);
  over.t_b[0] = s2.T + 0.1;
  auto r2 = check_feasible(over, gains({1e-3}, {1e-3}), s2);
  CHECK_THAT(r2.time, WithinAbs(0.1, 1e-12));
  CHECK_FALSE(r2.feasible(s2));

  // energy causality residual is exact: consumed - (Q + harvested)
  Scenario s3 = Scenario::defaults(2);
  s3.gamma_min = {0.0, 0.0};
  s3.Q = {0.2, 0.0};
  Allocation a = Allocation::zeros(2);
  a.t_o = {0.4, 0.0};
  a.p = {0.3, 0.0};
  a.t_b = {0.0, 0.5};
  a.rho = {0.0, 0.5};
  Gains g = gains({1.0, 1.0}, {1.0, 1.0});
  auto r3 = check_feasible(a, g, s3);
  double consumed = (0.3 + s3.p_circ_at[0]) * 0.4;
  double harvested = eh_power(kTable, 1.0) * 0.5;  // device 0 idles during device 1's slot
  CHECK_THAT(r3.energy[0], WithinAbs(consumed - (0.2 + harvested), 1e-14));
}

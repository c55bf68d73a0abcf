// SPDX-License-Identifier: Apache-2.0
#include "rismec/pipeline.hpp"

#include "oracles.hpp"

#include <catch_amalgamated.hpp>

using namespace rismec;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Gains default_gains(const Scenario& sc, std::uint64_t seed) {
  auto ch = generate_channels(sc, seed);
  return gain_powers(ch, initial_phases(ch));
}

}  // namespace

TEST_CASE("alpha grid") {
  auto g = default_alpha_grid(0.1);
  REQUIRE(g.size() == 11);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == 1.0);
  CHECK_THAT(g[3], WithinAbs(0.3, 1e-15));
  CHECK(default_alpha_grid(1.0).size() == 2);
  CHECK_THROWS_AS(default_alpha_grid(0.0), ConfigError);
  CHECK_THROWS_AS(default_alpha_grid(1.5), ConfigError);
}

TEST_CASE("utopia point dominates the front") {
  const Scenario sc = Scenario::defaults();
  for (std::uint64_t seed : {1, 2, 5}) {
    const Gains g = default_gains(sc, seed);
    Utopia u = compute_utopia(g, sc);
    CHECK(u.provenance.find("E_ref=minimum") != std::string::npos);
    auto front = tchebycheff_sweep(g, sc, u, default_alpha_grid(0.1));
    REQUIRE(front.size() == 11);
    for (const auto& p : front) {
      REQUIRE(p.feasible);
      CHECK(p.metrics.R_sum <= u.R_max * (1 + 1e-9));
      CHECK(p.metrics.E_total >= u.E_min * (1 - 1e-9));
      CHECK(p.chi >= -1e-9);
      CHECK(check_feasible(p.alloc, g, sc).feasible(sc));
    }
    // endpoints are the single-objective optima
    CHECK_THAT(front.back().metrics.R_sum, WithinRel(u.R_max, 1e-6));
    CHECK_THAT(front.front().metrics.E_total, WithinRel(u.E_min, 1e-6));
  }
}

TEST_CASE("front is monotone in the throughput weight") {
  const Scenario sc = Scenario::defaults();
  for (std::uint64_t seed : {2, 3}) {
    const Gains g = default_gains(sc, seed);
    Utopia u = compute_utopia(g, sc);
    // unsorted input is sorted by the sweep
    auto front = tchebycheff_sweep(g, sc, u, {0.9, 0.1, 0.5, 0.3, 0.7, 0.0, 1.0});
    for (std::size_t i = 1; i < front.size(); ++i) {
      CHECK(front[i].alpha > front[i - 1].alpha);
      CHECK(front[i].metrics.R_sum >= front[i - 1].metrics.R_sum * (1 - 1e-6));
      CHECK(front[i].metrics.E_total >= front[i - 1].metrics.E_total * (1 - 1e-6));
    }
    // no sweep point is dominated by another
    for (const auto& a : front)
      for (const auto& b : front)
        CHECK_FALSE((b.metrics.R_sum > a.metrics.R_sum * (1 + 1e-6) &&
                     b.metrics.E_total < a.metrics.E_total * (1 - 1e-6)));
  }
}

TEST_CASE("Dinkelbach efficiency dominates every sweep point") {
  const Scenario sc = Scenario::defaults();
  for (std::uint64_t seed : {1, 4}) {
    const Gains g = default_gains(sc, seed);
    auto d = dinkelbach_ee(g, sc);
    CHECK(d.converged);
    CHECK_FALSE(d.degenerate);
    CHECK_THAT(d.EE, WithinRel(d.metrics.R_sum / d.metrics.E_total, 1e-12));
    CHECK(check_feasible(d.alloc, g, sc).feasible(sc));
    // the ratio sequence increases
    for (std::size_t i = 1; i < d.ratios.size(); ++i) CHECK(d.ratios[i] >= d.ratios[i - 1]);
    Utopia u = compute_utopia(g, sc);
    auto front = tchebycheff_sweep(g, sc, u, default_alpha_grid(0.05));
    CHECK(d.EE >= peak_ee(front) * (1 - 1e-6));
  }
}

TEST_CASE("Dinkelbach efficiency agrees with an exhaustive lattice search") {
  const Scenario sc = Scenario::defaults(1).with_overrides(
      {{"N", "0"}, {"Q", "[1e-3]"}, {"gamma_min", "[2e4]"}, {"eps", "[1e-22]"}});
  const auto fgrid = oracle::zero_and_log(1e3, 5e8, 120);
  for (std::uint64_t seed : {2, 5}) {
    const Gains g = gain_powers(generate_channels(sc, seed), PhaseShifts::zeros(0));
    auto d = dinkelbach_ee(g, sc);
    const double bf = oracle::best_ee(g, sc, {}, fgrid);
    REQUIRE(bf > 0);
    CHECK(d.EE >= bf * (1 - 1e-6));
    CHECK(d.EE <= bf * 1.02);
  }
}

TEST_CASE("zero-energy backscatter makes the efficiency unbounded") {
  Scenario sc = Scenario::defaults().with_overrides(
      {{"P_circ_bc", "[0,0,0,0]"}, {"gamma_min", "[0,0,0,0]"}});
  const Gains g = default_gains(sc, 1);
  auto d = dinkelbach_ee(g, sc);
  CHECK(d.degenerate);
  CHECK(std::isinf(d.EE));

  // such points are skipped when the peak of a sweep is taken
  ParetoPoint inf_pt;
  inf_pt.metrics.R_sum = 1;
  inf_pt.metrics.ee_unbounded = true;
  inf_pt.metrics.EE = std::numeric_limits<double>::infinity();
  ParetoPoint ok;
  ok.metrics.EE = 5.0;
  ParetoPoint failed;
  failed.feasible = false;
  failed.metrics.EE = 9.0;
  int at = -2;
  CHECK(peak_ee({inf_pt, ok, failed}, &at) == 5.0);
  CHECK(at == 1);
  CHECK(peak_ee({failed}, &at) == 0.0);
  CHECK(at == -1);
}

TEST_CASE("infeasible floors are flagged point by point") {
  Scenario sc = Scenario::defaults().with("gamma_min", "[1e12,1e12,1e12,1e12]");
  const Gains g = default_gains(sc, 1);
  CHECK_THROWS_AS(compute_utopia(g, sc), InfeasibleError);
  Utopia u{1e6, 1e-5, "given"};
  auto front = tchebycheff_sweep(g, sc, u, {0.0, 0.5, 1.0});
  REQUIRE(front.size() == 3);
  for (const auto& p : front) CHECK_FALSE(p.feasible);
  CHECK_THROWS_AS(dinkelbach_ee(g, sc), InfeasibleError);
}

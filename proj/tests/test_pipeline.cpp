// SPDX-License-Identifier: Apache-2.0
#include "rismec/pipeline.hpp"

#include <catch_amalgamated.hpp>

using namespace rismec;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

PipelineConfig quick() {
  PipelineConfig c;
  c.J_max = 3;
  c.alpha_grid = {0.0, 0.5, 1.0};
  return c;
}

}  // namespace

TEST_CASE("run kinds round-trip through their names") {
  for (RunKind k : {RunKind::Optimized, RunKind::BcOnly, RunKind::BcLocal, RunKind::NoRis,
                    RunKind::NoRisBcOnly, RunKind::NoRisBcLocal, RunKind::RandomPhase})
    CHECK(parse_run_kind(to_string(k)) == k);
  CHECK_THROWS_AS(parse_run_kind("best"), ConfigError);
}

TEST_CASE("without a reflector a single resource solve is done") {
  Scenario sc = Scenario::defaults().with("N", "0");
  auto r = run_seed(sc, 1, RunKind::Optimized, quick());
  REQUIRE(r.feasible);
  CHECK(r.phase_steps == 0);
  REQUIRE(r.trace.size() == 1);
  CHECK_THAT(r.utopia.R_max, WithinRel(r.trace[0].R_sum, 1e-6));
  CHECK(r.front.size() == 3);
}

TEST_CASE("alternating optimization never lowers the throughput") {
  const Scenario sc = Scenario::defaults();
  PipelineConfig cfg = quick();
  cfg.sweep = false;
  for (std::uint64_t seed : {1, 2}) {
    auto r = run_seed(sc, seed, RunKind::Optimized, cfg);
    REQUIRE(r.feasible);
    REQUIRE(r.trace.size() >= 2);
    for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i].R_sum >= r.trace[i - 1].R_sum);
    CHECK(r.phase_steps >= 1);
    CHECK(r.rank_ratio > 0.9);
    // the final allocation is feasible at the final phases and delivers the last traced value
    auto ch = generate_channels(sc, seed);
    CHECK(check_feasible(r.throughput_alloc, ch, r.theta, sc).feasible(sc));
    CHECK_THAT(system_metrics(r.throughput_alloc, ch, r.theta, sc).R_sum,
               WithinRel(r.trace.back().R_sum, 1e-9));
    CHECK(r.front.empty());
  }
}

TEST_CASE("peak efficiency is the best point of the sweep") {
  auto r = run_seed(Scenario::defaults(), 3, RunKind::Optimized, quick());
  REQUIRE(r.feasible);
  double best = 0;
  double at = -1;
  for (const auto& p : r.front)
    if (p.feasible && p.metrics.EE > best) {
      best = p.metrics.EE;
      at = p.alpha;
    }
  CHECK(r.EE_peak == best);
  CHECK(r.alpha_peak == at);
}

TEST_CASE("backscatter-only runs leave active transmission and the CPU idle") {
  const Scenario sc = Scenario::defaults().with("gamma_min", "[1e3,1e3,1e3,1e3]");
  auto r = run_seed(sc, 2, RunKind::BcOnly, quick());
  REQUIRE(r.feasible);
  CHECK(r.tag == "bc_only");
  for (int k = 0; k < sc.K; ++k) {
    CHECK(r.throughput_alloc.t_o[k] == 0.0);
    CHECK(r.throughput_alloc.f[k] == 0.0);
  }
  for (const auto& p : r.front)
    for (int k = 0; k < sc.K; ++k) {
      CHECK(p.alloc.t_o[k] == 0.0);
      CHECK(p.alloc.f[k] == 0.0);
    }
}

TEST_CASE("baselines without phase optimization") {
  const Scenario sc = Scenario::defaults();
  auto nr = run_seed(sc, 4, RunKind::NoRis, quick());
  REQUIRE(nr.feasible);
  CHECK(nr.phase_steps == 0);
  CHECK(nr.trace.size() == 1);
  auto rp = run_seed(sc, 4, RunKind::RandomPhase, quick());
  REQUIRE(rp.feasible);
  CHECK(rp.phase_steps == 0);
  CHECK(rp.theta.theta() == random_phases(sc.N, 4).theta());
  CHECK(rp.tag == "random_phase");
}

TEST_CASE("runs are reproducible") {
  const Scenario sc = Scenario::defaults();
  auto a = run_seed(sc, 5, RunKind::Optimized, quick());
  auto b = run_seed(sc, 5, RunKind::Optimized, quick());
  CHECK(a.theta.theta() == b.theta.theta());
  CHECK(a.EE_peak == b.EE_peak);
  CHECK(a.seed == 5);
  CHECK(a.scenario_hash == sc.hash());
}

TEST_CASE("unreachable floors fail the run instead of throwing") {
  Scenario sc = Scenario::defaults().with("gamma_min", "[1e12,1e12,1e12,1e12]");
  auto r = run_seed(sc, 1, RunKind::Optimized, quick());
  CHECK_FALSE(r.feasible);
  CHECK(r.failed_step == "throughput");
  CHECK_FALSE(r.message.empty());
}

TEST_CASE("summary statistics") {
  auto s = summarize({1.0, 2.0, 3.0});
  CHECK(s.n == 3);
  CHECK_THAT(s.mean, WithinAbs(2.0, 1e-15));
  CHECK_THAT(s.stddev, WithinAbs(1.0, 1e-15));
  CHECK_THAT(s.sem(), WithinAbs(1.0 / std::sqrt(3.0), 1e-15));
  auto one = summarize({4.0});
  CHECK(one.stddev == 0.0);
  CHECK(summarize({}).n == 0);
}

TEST_CASE("aggregation over seeds") {
  RunResult a, b, bad;
  a.EE_peak = 2.0;
  b.EE_peak = 4.0;
  bad.feasible = false;
  ParetoPoint p;
  p.alpha = 0.5;
  p.metrics.R_sum = 10.0;
  p.metrics.E_total = 5.0;
  p.metrics.EE = 2.0;
  a.front = {p};
  p.metrics.R_sum = 30.0;
  p.metrics.EE = 6.0;
  b.front = {p};
  auto agg = aggregate({a, b, bad});
  CHECK(agg.runs == 3);
  CHECK(agg.feasible == 2);
  CHECK_THAT(agg.EE_peak.mean, WithinAbs(3.0, 1e-15));
  REQUIRE(agg.rows.size() == 1);
  CHECK(agg.rows[0].alpha == 0.5);
  CHECK_THAT(agg.rows[0].EE.mean, WithinAbs(4.0, 1e-15));
  CHECK_THAT(agg.rows[0].R_sum.mean, WithinAbs(20.0, 1e-15));
  CHECK(agg.rows[0].E_total.stddev == 0.0);
}

TEST_CASE("parallel map is order-preserving and rethrows") {
  std::function<int(int)> sq = [](int i) { return i * i; };
  auto one = parallel_map<int>(20, 1, sq);
  auto four = parallel_map<int>(20, 4, sq);
  CHECK(one == four);
  CHECK(four[7] == 49);
  std::function<int(int)> boom = [](int i) -> int {
    if (i == 3) throw ConfigError("boom");
    return i;
  };
  CHECK_THROWS_AS(parallel_map<int>(8, 3, boom), ConfigError);
}

TEST_CASE("Monte-Carlo results do not depend on the thread count") {
  const Scenario sc = Scenario::defaults();
  auto cfg = quick();
  cfg.J_max = 1;
  auto a = monte_carlo(sc, {1, 2}, RunKind::RandomPhase, cfg, 1);
  auto b = monte_carlo(sc, {1, 2}, RunKind::RandomPhase, cfg, 2);
  REQUIRE(a.runs.size() == 2);
  CHECK(a.runs[1].seed == 2);
  CHECK(a.table.EE_peak.mean == b.table.EE_peak.mean);
}

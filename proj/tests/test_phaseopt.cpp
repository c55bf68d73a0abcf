// SPDX-License-Identifier: Apache-2.0
#include "rismec/pipeline.hpp"

#include <catch_amalgamated.hpp>

#include <random>

using namespace rismec;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

PhaseShifts random_theta(int N, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0, 2 * std::numbers::pi);
  CVec t(N);
  for (int n = 0; n < N; ++n) t[n] = std::polar(1.0, u(rng));
  return PhaseShifts(std::move(t));
}

// Offloaded bits (BC + AT) of device k, straight from the rate formulas.
double offloaded_bits(int k, const Allocation& a, const Gains& g, const Scenario& sc) {
  return bc_rate(a.t_b[k], a.s(k), g.h2[k], g.g2[k], sc) + at_rate(a.t_o[k], a.z(k), g.h2[k], sc);
}

struct Instance {
  Scenario sc;
  ChannelSet ch;
  Allocation al;
};

Instance instance(int K, int N, std::uint64_t seed) {
  Instance in{Scenario::defaults(K).with("N", std::to_string(N)), {}, {}};
  in.ch = generate_channels(in.sc, seed);
  in.al = solve_throughput_max(in.ch, initial_phases(in.ch), in.sc).alloc;
  return in;
}

}  // namespace

TEST_CASE("quadratic forms reproduce the channel gains") {
  const Scenario sc = Scenario::defaults();
  std::mt19937_64 rng(1);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto ch = generate_channels(sc, seed);
    auto q = build_quadforms(ch);
    for (int rep = 0; rep < 5; ++rep) {
      auto th = random_theta(sc.N, rng);
      Gains a = quad_gains(q, th.theta());
      Gains b = gain_powers(ch, th);
      for (int k = 0; k < sc.K; ++k) {
        CHECK_THAT(a.h2[k], WithinRel(b.h2[k], 1e-10));
        CHECK_THAT(a.g2[k], WithinRel(b.g2[k], 1e-10));
      }
    }
  }
}

TEST_CASE("minorizer touches at the expansion point and stays below") {
  const Scenario sc = Scenario::defaults();
  std::mt19937_64 rng(2);
  auto ch = generate_channels(sc, 3);
  auto q = build_quadforms(ch);
  auto th0 = random_theta(sc.N, rng);
  Vec l(sc.K);
  for (int k = 0; k < sc.K; ++k) l[k] = curvature_bound(q, k);
  auto m = build_minorizer(q, th0, l);
  Gains g0 = quad_gains(q, th0.theta());
  CMat P0 = lifted_matrix(th0);
  for (int k = 0; k < sc.K; ++k) {
    // the constant and the quadratic part cancel to about l (N + 1) / 2
    const double cancel = 1e-12 * l[k] * (sc.N + 1);
    CHECK_THAT(product_minorizer(m, k, P0), WithinAbs(g0.h2[k] * g0.g2[k], cancel));
    CHECK_THAT(quartic_minorizer(m, k, P0), WithinAbs(g0.g2[k] * g0.g2[k], cancel));
  }
  for (int rep = 0; rep < 200; ++rep) {
    auto th = random_theta(sc.N, rng);
    Gains g = quad_gains(q, th.theta());
    CMat P = lifted_matrix(th);
    for (int k = 0; k < sc.K; ++k) {
      const double truth = g.h2[k] * g.g2[k];
      CHECK(product_minorizer(m, k, P) <= truth * (1 + 1e-9));
      CHECK(quartic_minorizer(m, k, P) <= g.g2[k] * g.g2[k] * (1 + 1e-9));
    }
  }
  CHECK_THROWS_AS(build_minorizer(q, PhaseShifts::zeros(3), l), DimensionError);
  CHECK_THROWS_AS(build_minorizer(q, th0, 0.0), DomainError);
}

TEST_CASE("lifted evaluation is exact at rank-one points") {
  Instance in = instance(4, 6, 2);
  auto q = build_quadforms(in.ch);
  std::mt19937_64 rng(3);
  auto th = random_theta(in.sc.N, rng);
  auto m = build_minorizer(q, th, initial_curvature(q, in.sc, 1.0));
  CMat P = lifted_matrix(th);
  Gains g = gain_powers(in.ch, th);
  auto rep = check_feasible(in.al, g, in.sc);
  double total = 0;
  for (int k = 0; k < in.sc.K; ++k) {
    const double bits = offloaded_bits(k, in.al, g, in.sc);
    CHECK_THAT(lifted_device_bits(P, q, m, k, in.al, in.sc), WithinRel(bits, 1e-8));
    // energy slack is the negated causality residual
    CHECK_THAT(lifted_energy_slack(P, q, k, in.al, in.sc), WithinAbs(-rep.energy[k], 1e-12));
    total += bits;
  }
  CHECK_THAT(lifted_objective(P, q, m, in.al, in.sc), WithinRel(total, 1e-8));
}

TEST_CASE("lifted functions are concave") {
  Instance in = instance(4, 5, 4);
  auto q = build_quadforms(in.ch);
  std::mt19937_64 rng(5);
  auto th0 = random_theta(in.sc.N, rng);
  auto m = build_minorizer(q, th0, initial_curvature(q, in.sc, 1.0 / 64.0));
  for (int rep = 0; rep < 50; ++rep) {
    CMat A = lifted_matrix(random_theta(in.sc.N, rng));
    CMat B = lifted_matrix(random_theta(in.sc.N, rng));
    CMat C = 0.5 * (A + B);
    for (int k = 0; k < in.sc.K; ++k) {
      double fa = lifted_device_bits(A, q, m, k, in.al, in.sc);
      double fb = lifted_device_bits(B, q, m, k, in.al, in.sc);
      double fc = lifted_device_bits(C, q, m, k, in.al, in.sc);
      CHECK(fc >= 0.5 * (fa + fb) - 1e-9 * (std::abs(fa) + std::abs(fb)));
      double ea = lifted_energy_slack(A, q, k, in.al, in.sc);
      double eb = lifted_energy_slack(B, q, k, in.al, in.sc);
      double ec = lifted_energy_slack(C, q, k, in.al, in.sc);
      CHECK(ec >= 0.5 * (ea + eb) - 1e-15);
    }
  }
}

TEST_CASE("subproblem gradients agree with finite differences") {
  Instance in = instance(4, 4, 5);
  auto q = build_quadforms(in.ch);
  auto th = initial_phases(in.ch);
  auto m = build_minorizer(q, th, initial_curvature(q, in.sc, 1.0 / 64.0));
  CMat P = lifted_matrix(th);
  auto prob = sdp_problem(q, m, in.al, in.sc, in.sc.penalty_delta, P);
  CHECK(conic::gradient_check(prob, P, 4) < 1e-5);
}

TEST_CASE("phase extraction recovers rank-one matrices") {
  std::mt19937_64 rng(6);
  for (int N : {1, 3, 8}) {
    auto th = random_theta(N, rng);
    // any common phase on the lifted vector is removed by the reference entry
    CVec v = lift_twice(th.theta()) * std::polar(1.0, 0.7);
    auto ex = extract_phases(v * v.adjoint());
    CHECK_THAT(ex.rank_ratio, WithinAbs(1.0, 1e-12));
    CHECK(ex.consistent);
    CHECK_FALSE(ex.degenerate);
    for (int n = 0; n < N; ++n) CHECK(std::abs(ex.theta.theta()[n] - th.theta()[n]) < 1e-10);
  }
  CHECK_THROWS_AS(extract_phases(CMat::Identity(1, 1)), DimensionError);
  CHECK(extract_phases(CMat::Identity(4, 4)).degenerate);
}

TEST_CASE("randomized candidates are unit modulus") {
  std::mt19937_64 rng(7);
  CMat A = CMat::Identity(5, 5);
  A += lifted_matrix(random_theta(3, rng));
  auto c = gaussian_randomization(A, 20, 9);
  REQUIRE(c.size() == 20);
  for (const auto& t : c)
    for (int n = 0; n < 3; ++n) CHECK_THAT(std::abs(t.theta()[n]), WithinAbs(1.0, 1e-12));
  auto again = gaussian_randomization(A, 20, 9);
  CHECK(again[5].theta() == c[5].theta());
}

TEST_CASE("geodesic interpolation between phase vectors") {
  std::mt19937_64 rng(8);
  auto a = random_theta(4, rng), b = random_theta(4, rng);
  CHECK((interpolate_phases(a, b, 0.0).theta() - a.theta()).norm() < 1e-12);
  CHECK((interpolate_phases(a, b, 1.0).theta() - b.theta()).norm() < 1e-12);
  auto mid = interpolate_phases(a, b, 0.5);
  for (int n = 0; n < 4; ++n) {
    double da = std::abs(std::arg(mid.theta()[n] * std::conj(a.theta()[n])));
    double db = std::abs(std::arg(mid.theta()[n] * std::conj(b.theta()[n])));
    CHECK_THAT(da, WithinAbs(db, 1e-12));
    CHECK(da <= std::numbers::pi / 2 + 1e-12);
  }
}

TEST_CASE("majorization-minimization is monotone and keeps feasibility") {
  for (std::uint64_t seed : {1, 3, 6}) {
    Instance in = instance(4, 8, seed);
    auto th0 = initial_phases(in.ch);
    auto r = mm_optimize(in.ch, in.al, th0, in.sc);
    double prev = r.R_initial;
    for (const auto& it : r.trace) {
      CHECK(it.R_true >= prev);
      prev = it.R_true;
    }
    CHECK(r.R_final >= r.R_initial);
    CHECK(check_feasible(in.al, gain_powers(in.ch, r.theta), in.sc).feasible(in.sc, 1e-7));
    CHECK_THAT(r.R_final, WithinRel(system_metrics(in.al, in.ch, r.theta, in.sc).R_sum, 1e-12));
  }
}

TEST_CASE("two-element reflector matches an exhaustive phase grid") {
  MmOptions opt;
  opt.T_max = 100;
  opt.rel_tol = 1e-7;
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    Instance in = instance(1, 2, seed);
    auto r = mm_optimize(in.ch, in.al, initial_phases(in.ch), in.sc, opt);
    double best = -1;
    for (int i = 0; i < 72; ++i) {
      for (int j = 0; j < 72; ++j) {
        CVec t(2);
        t << std::polar(1.0, i * std::numbers::pi / 36), std::polar(1.0, j * std::numbers::pi / 36);
        PhaseShifts th(t);
        Gains g = gain_powers(in.ch, th);
        if (!check_feasible(in.al, g, in.sc).feasible(in.sc, 1e-7)) continue;
        best = std::max(best, system_metrics(in.al, g, in.sc).R_sum);
      }
    }
    REQUIRE(best > 0);
    CHECK(r.R_final >= 0.99 * best);
  }
}

TEST_CASE("no reflector leaves the phases alone") {
  Scenario sc = Scenario::defaults().with("N", "0");
  auto ch = generate_channels(sc, 2);
  auto al = solve_throughput_max(ch, PhaseShifts::zeros(0), sc).alloc;
  auto r = mm_optimize(ch, al, PhaseShifts::zeros(0), sc);
  CHECK(r.trace.empty());
  CHECK(r.R_final == r.R_initial);
}

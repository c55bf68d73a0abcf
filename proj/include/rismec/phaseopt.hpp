// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rismec/conic.hpp"
#include "rismec/netmodel.hpp"
#include "rismec/physics.hpp"
#include "rismec/scenario.hpp"
#include "rismec/types.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace rismec {

// ---------------------------------------------------------------------------
// quadratic forms of the cascaded gains
// ---------------------------------------------------------------------------

/// |h_k|^2 = th^H S_k th + |h_UM,k|^2 and |g_k|^2 = th^H R_k th + |g_PU,k|^2
/// with th = [theta; 1]. The blocks are built on conj(phi) so that the
/// quadratic form in theta reproduces the channel model exactly.
struct QuadForms {
  int N = 0;
  std::vector<CVec> phi_UIM;  // diag(h_UI^H) h_IM
  std::vector<CVec> phi_PIU;  // diag(g_PI^H) g_IU
  std::vector<cplx> h_UM, g_PU;
  std::vector<CMat> S, R;
  Vec h_UM2, g_PU2;

  int K() const { return static_cast<int>(S.size()); }
};

/// [theta; 1]
inline CVec lift_once(const CVec& theta) {
  CVec t(theta.size() + 1);
  t.head(theta.size()) = theta;
  t[theta.size()] = 1.0;
  return t;
}

/// [theta; 1; 1], the vector whose outer product is the lifted matrix.
inline CVec lift_twice(const CVec& theta) { return lift_once(lift_once(theta)); }

inline CMat lifted_matrix(const PhaseShifts& th) {
  CVec t = lift_twice(th.theta());
  return t * t.adjoint();
}

/// Zero-pads an (N+1)-square block to (N+2).
inline CMat embed(const CMat& M) {
  const Eigen::Index n = M.rows();
  CMat E = CMat::Zero(n + 1, n + 1);
  E.topLeftCorner(n, n) = M;
  return E;
}

namespace detail {
inline CMat quad_block(const CVec& v, cplx c) {
  const Eigen::Index N = v.size();
  CMat M = CMat::Zero(N + 1, N + 1);
  M.topLeftCorner(N, N) = v * v.adjoint();
  M.col(N).head(N) = v * c;
  M.row(N).head(N) = (v * c).adjoint();
  return M;
}
}  // namespace detail

inline QuadForms build_quadforms(const ChannelSet& ch) {
  QuadForms q;
  q.N = ch.N();
  const int K = ch.K();
  q.h_UM2 = Vec(K);
  q.g_PU2 = Vec(K);
  for (int k = 0; k < K; ++k) {
    CVec pu = ch.h_UI[k].conjugate().cwiseProduct(ch.h_IM);
    CVec pp = ch.g_PI.conjugate().cwiseProduct(ch.g_IU[k]);
    q.phi_UIM.push_back(pu);
    q.phi_PIU.push_back(pp);
    q.h_UM.push_back(ch.h_UM[k]);
    q.g_PU.push_back(ch.g_PU[k]);
    q.S.push_back(detail::quad_block(pu.conjugate(), ch.h_UM[k]));
    q.R.push_back(detail::quad_block(pp.conjugate(), ch.g_PU[k]));
    q.h_UM2[k] = std::norm(ch.h_UM[k]);
    q.g_PU2[k] = std::norm(ch.g_PU[k]);
  }
  return q;
}

/// |h_k|^2 and |g_k|^2 from the quadratic forms.
inline Gains quad_gains(const QuadForms& q, const CVec& theta) {
  CVec t = lift_once(theta);
  Gains g{Vec(q.K()), Vec(q.K())};
  for (int k = 0; k < q.K(); ++k) {
    g.h2[k] = (t.adjoint() * q.S[k] * t)(0, 0).real() + q.h_UM2[k];
    g.g2[k] = (t.adjoint() * q.R[k] * t)(0, 0).real() + q.g_PU2[k];
  }
  return g;
}

// ---------------------------------------------------------------------------
// minorizer of the quartic gain products
// ---------------------------------------------------------------------------

/// Bounded-curvature minorizers of |h|^2|g|^2 (via B, T, kappa1) and of
/// |g|^4 (via C, U, kappa2) around an expansion point. T and U include the
/// factor l/2, so th~^H T th~ + kappa1 is the minorizer value itself.
struct MinorizerMats {
  std::vector<CMat> B, C, T, U;
  Vec kappa1, kappa2;
  CVec theta0_hat;
  Vec l;
};

/// Curvature bound: the largest second directional derivative of
/// |h|^2|g|^2 over unit-modulus theta, from triangle-inequality bounds on
/// the gains and their first and second variations.
inline double curvature_bound(const QuadForms& q, int k) {
  CVec vh = q.phi_UIM[k], vg = q.phi_PIU[k];
  double hmax = std::abs(q.h_UM[k]) + vh.cwiseAbs().sum();
  double gmax = std::abs(q.g_PU[k]) + vg.cwiseAbs().sum();
  double nh = vh.norm(), ng = vg.norm();
  double prod = 2 * nh * nh * gmax * gmax + 8 * hmax * gmax * nh * ng + 2 * ng * ng * hmax * hmax;
  double quart = 4 * ng * ng * gmax * gmax + 8 * gmax * gmax * ng * ng;
  return std::max(prod, quart);
}

namespace detail {
inline CMat minorizer_block(const CMat& Bm, const CVec& t0, double l) {
  const Eigen::Index n = t0.size();
  CVec w = (2.0 / l) * (Bm * t0) + t0;
  CMat T = CMat::Zero(n + 1, n + 1);
  T.topLeftCorner(n, n) = -CMat::Identity(n, n);
  T.col(n).head(n) = w;
  T.row(n).head(n) = w.adjoint();
  return 0.5 * l * T;
}
}  // namespace detail

inline MinorizerMats build_minorizer(const QuadForms& q, const PhaseShifts& theta0, const Vec& l) {
  if (theta0.size() != q.N) throw DimensionError("build_minorizer: theta0 length differs from N");
  if (l.size() != q.K()) throw DimensionError("build_minorizer: one curvature per device");
  for (int k = 0; k < q.K(); ++k)
    if (!(l[k] > 0)) throw DomainError("build_minorizer: curvature must be positive");
  MinorizerMats m;
  m.theta0_hat = lift_once(theta0.theta());
  m.l = l;
  const CVec& t = m.theta0_hat;
  const CMat P = t * t.adjoint();
  const double n1 = static_cast<double>(t.size());
  m.kappa1 = Vec(q.K());
  m.kappa2 = Vec(q.K());
  for (int k = 0; k < q.K(); ++k) {
    const CMat& S = q.S[k];
    const CMat& R = q.R[k];
    const double a = q.h_UM2[k], b = q.g_PU2[k];
    CMat B = R * P * S + S * P * R + a * R + b * S;
    CMat C = 2.0 * R * P * R + 2.0 * b * R;
    B = conic::hermitian_part(B);
    C = conic::hermitian_part(C);
    double s0 = (t.adjoint() * S * t)(0, 0).real() + a;
    double r0 = (t.adjoint() * R * t)(0, 0).real() + b;
    m.kappa1[k] = s0 * r0 - 2.0 * (t.adjoint() * B * t)(0, 0).real() - 0.5 * l[k] * n1;
    m.kappa2[k] = r0 * r0 - 2.0 * (t.adjoint() * C * t)(0, 0).real() - 0.5 * l[k] * n1;
    m.T.push_back(detail::minorizer_block(B, t, l[k]));
    m.U.push_back(detail::minorizer_block(C, t, l[k]));
    m.B.push_back(std::move(B));
    m.C.push_back(std::move(C));
  }
  return m;
}

inline MinorizerMats build_minorizer(const QuadForms& q, const PhaseShifts& theta0, double l) {
  return build_minorizer(q, theta0, Vec::Constant(q.K(), l));
}

/// Minorizer values (product, quartic) of device k at a lifted matrix.
inline double product_minorizer(const MinorizerMats& m, int k, const CMat& Phi) {
  return conic::inner(m.T[k], Phi) + m.kappa1[k];
}
inline double quartic_minorizer(const MinorizerMats& m, int k, const CMat& Phi) {
  return conic::inner(m.U[k], Phi) + m.kappa2[k];
}

// ---------------------------------------------------------------------------
// lifted evaluation
// ---------------------------------------------------------------------------

namespace detail {

// log2(u) for u >= u0, continued by its tangent below; concave everywhere.
inline double log2_ext(double u) {
  constexpr double u0 = 1e-3;
  if (u >= u0) return std::log2(u);
  return std::log2(u0) + (u - u0) / (u0 * kLn2);
}
inline double log2_ext_slope(double u) {
  constexpr double u0 = 1e-3;
  return 1.0 / (std::max(u, u0) * kLn2);
}

// harvesting curve continued linearly below zero input (concave)
inline double eh_ext(const EhModel& m, double x) {
  if (x >= 0) return eh_power(m, x);
  return eh_slope(m, 0.0) * x;
}
inline double eh_ext_slope(const EhModel& m, double x) { return eh_slope(m, std::max(x, 0.0)); }

struct DeviceTerms {
  double a = 0;  // coefficient of the gain product in the BC SNR
  double b = 0;  // coefficient of |h|^2 in the AT SNR
};

inline DeviceTerms device_terms(int k, const Allocation& al, const Scenario& sc) {
  DeviceTerms d;
  d.a = sc.zeta * al.rho[k] * sc.P_max / sc.sigma2;
  d.b = al.t_o[k] > 0 ? al.p[k] / sc.sigma2 : 0.0;
  return d;
}

}  // namespace detail

/// Concave surrogate of device k's offloaded bits (BC + AT).
inline double lifted_device_bits(const CMat& Phi, const QuadForms& q, const MinorizerMats& m,
                                 int k, const Allocation& al, const Scenario& sc, CMat* grad = nullptr,
                                 bool floor_at_zero = false) {
  auto d = detail::device_terms(k, al, sc);
  const CMat St = embed(q.S[k]);
  double x = product_minorizer(m, k, Phi);
  double hq = conic::inner(St, Phi) + q.h_UM2[k];
  if (floor_at_zero) {
    x = std::max(x, 0.0);
    hq = std::max(hq, 0.0);
  }
  double ub = 1.0 + d.a * x, uo = 1.0 + d.b * hq;
  double bits = sc.bandwidth * (al.t_b[k] * detail::log2_ext(ub) + al.t_o[k] * detail::log2_ext(uo));
  if (grad) {
    *grad = sc.bandwidth * (al.t_b[k] * d.a * detail::log2_ext_slope(ub) * m.T[k] +
                            al.t_o[k] * d.b * detail::log2_ext_slope(uo) * St);
  }
  return bits;
}

/// Surrogate sum of offloaded bits; trace arguments are floored at zero.
inline double lifted_objective(const CMat& Phi, const QuadForms& q, const MinorizerMats& m,
                               const Allocation& al, const Scenario& sc) {
  double v = 0;
  for (int k = 0; k < q.K(); ++k) v += lifted_device_bits(Phi, q, m, k, al, sc, nullptr, true);
  return v;
}

/// Energy causality slack of device k (J) as a function of the lifted
/// matrix: the incident power is linear in Phi and the harvesting curve is
/// concave, so the slack is concave.
inline double lifted_energy_slack(const CMat& Phi, const QuadForms& q, int k, const Allocation& al,
                                  const Scenario& sc, CMat* grad = nullptr) {
  const EhModel eh = sc.eh(k);
  const CMat Rt = embed(q.R[k]);
  double g2 = conic::inner(Rt, Phi) + q.g_PU2[k];
  double others = 0;
  for (int i = 0; i < al.K(); ++i)
    if (i != k) others += al.t_b[i];
  double own_in = std::max(0.0, 1.0 - al.rho[k]) * sc.P_max;
  double harvest = detail::eh_ext(eh, own_in * g2) * al.t_b[k] + detail::eh_ext(eh, sc.P_max * g2) * others;
  auto e = energy_consumed(k, al, sc);
  if (grad) {
    double slope = own_in * detail::eh_ext_slope(eh, own_in * g2) * al.t_b[k] +
                   sc.P_max * detail::eh_ext_slope(eh, sc.P_max * g2) * others;
    *grad = slope * Rt;
  }
  return sc.Q[k] + harvest - e.E1 - e.E2;
}

// ---------------------------------------------------------------------------
// penalized SDR step
// ---------------------------------------------------------------------------

struct SdpOptions {
  bool all_energy_constraints = true;  // false: only devices within 10% of their budget
  conic::Options conic;
};

struct SdpStepResult {
  CMat Phi;
  double objective = 0;          // surrogate bits minus the weighted rank penalty
  double initial_objective = 0;
  double rank_ratio = 0;         // lambda_1 / trace
  double residual = 0;
  int iterations = 0;
  bool warning = false;
  std::string message;
  std::vector<double> multipliers;  // constraint multipliers, reusable as a warm start
};

inline double rank_ratio(const CMat& Phi) {
  if (Phi.rows() == 0) return 1.0;
  Eigen::SelfAdjointEigenSolver<CMat> es(conic::hermitian_part(Phi), Eigen::EigenvaluesOnly);
  double tr = Phi.trace().real();
  return tr > 0 ? es.eigenvalues()[Phi.rows() - 1] / tr : 0.0;
}

/// Builds the conic subproblem: surrogate bits - Delta * rank penalty,
/// rate floors on the surrogate and exact energy causality.
inline conic::Problem sdp_problem(const QuadForms& q, const MinorizerMats& m, const Allocation& al,
                                  const Scenario& sc, double Delta, const CMat& Phi_prev,
                                  const SdpOptions& opt = {}) {
  const int dim = q.N + 2;
  conic::Norms np = conic::norms(Phi_prev);
  CMat Uu = np.leading * np.leading.adjoint();
  const double spectral = np.spectral;
  const double lin0 = conic::inner(Uu, Phi_prev);
  conic::Problem p;
  p.m = dim;
  p.options = opt.conic;
  const int K = q.K();
  // nuclear norm is written as the trace, its value on the feasible set
  p.objective = [=, &q, &m, &al, &sc](const CMat& X) {
    double v = 0;
    for (int k = 0; k < K; ++k) v += lifted_device_bits(X, q, m, k, al, sc);
    double pen = X.trace().real() - spectral - (conic::inner(Uu, X) - lin0);
    return v - Delta * pen;
  };
  p.gradient = [=, &q, &m, &al, &sc](const CMat& X) {
    CMat G = Delta * (Uu - CMat::Identity(dim, dim));
    CMat gk;
    for (int k = 0; k < K; ++k) {
      lifted_device_bits(X, q, m, k, al, sc, &gk);
      G += gk;
    }
    return G;
  };
  for (int k = 0; k < K; ++k) {
    if (sc.gamma_min[k] > 0) {
      const double local = local_bits(al.f[k], al.tau[k], sc.C_cpu);
      const double gam = sc.gamma_min[k];
      conic::Inequality c;
      c.name = "rate_floor_" + std::to_string(k);
      c.scale = std::max(1.0, gam);
      c.value = [=, &q, &m, &al, &sc](const CMat& X) {
        return lifted_device_bits(X, q, m, k, al, sc) + local - gam;
      };
      c.gradient = [=, &q, &m, &al, &sc](const CMat& X) {
        CMat G;
        lifted_device_bits(X, q, m, k, al, sc, &G);
        return G;
      };
      p.constraints.push_back(std::move(c));
    }
    auto e = energy_consumed(k, al, sc);
    const double consumed = e.E1 + e.E2;
    const double slack0 = lifted_energy_slack(Phi_prev, q, k, al, sc);
    if (!opt.all_energy_constraints && slack0 > 0.1 * std::max(consumed, 1e-12)) continue;
    conic::Inequality c;
    c.name = "energy_" + std::to_string(k);
    c.scale = std::max({consumed, sc.Q[k], 1e-12});
    c.value = [=, &q, &al, &sc](const CMat& X) { return lifted_energy_slack(X, q, k, al, sc); };
    c.gradient = [=, &q, &al, &sc](const CMat& X) {
      CMat G;
      lifted_energy_slack(X, q, k, al, sc, &G);
      return G;
    };
    p.constraints.push_back(std::move(c));
  }
  return p;
}

inline SdpStepResult solve_sdp_step(const QuadForms& q, const MinorizerMats& m, const Allocation& al,
                                    const Scenario& sc, double Delta, const CMat& Phi_prev,
                                    const SdpOptions& opt = {},
                                    const std::vector<double>* warm_multipliers = nullptr) {
  if (!(Delta >= 0)) throw DomainError("solve_sdp_step: penalty weight must be >= 0");
  if (Phi_prev.rows() != q.N + 2) throw DimensionError("solve_sdp_step: lifted matrix size");
  SdpStepResult out;
  auto prob = sdp_problem(q, m, al, sc, Delta, Phi_prev, opt);
  if (warm_multipliers) prob.initial_multipliers = *warm_multipliers;
  auto r = conic::solve(prob, Phi_prev);
  out.multipliers = r.multipliers;
  out.Phi = r.X;
  out.objective = r.value;
  out.initial_objective = r.initial_value;
  out.residual = r.residual;
  out.iterations = r.iterations;
  out.warning = r.warning;
  out.message = r.message;
  out.rank_ratio = rank_ratio(r.X);
  return out;
}

// ---------------------------------------------------------------------------
// phase extraction
// ---------------------------------------------------------------------------

struct Extraction {
  PhaseShifts theta;
  double rank_ratio = 0;
  bool degenerate = false;     // leading eigenvalue not separated
  double ref_mismatch = 0;     // phase gap between the two homogenizing entries (rad)
  bool consistent = true;      // ref_mismatch below 1e-3 rad
};

/// Point at fraction t along the shortest per-element arc from a to b.
inline PhaseShifts interpolate_phases(const PhaseShifts& a, const PhaseShifts& b, double t) {
  if (a.size() != b.size()) throw DimensionError("interpolate_phases: size mismatch");
  CVec out(a.size());
  for (int n = 0; n < a.size(); ++n) {
    double d = std::arg(b.theta()[n] * std::conj(a.theta()[n]));
    out[n] = a.theta()[n] * std::polar(1.0, t * d);
  }
  return PhaseShifts(std::move(out));
}

inline Extraction extract_phases(const CMat& Phi) {
  Extraction ex;
  const Eigen::Index dim = Phi.rows();
  if (dim < 2) throw DimensionError("extract_phases: lifted matrix needs at least two rows");
  const int N = static_cast<int>(dim - 2);
  Eigen::SelfAdjointEigenSolver<CMat> es(conic::hermitian_part(Phi));
  const Vec& w = es.eigenvalues();
  CVec u = es.eigenvectors().col(dim - 1);
  double tr = w.sum();
  ex.rank_ratio = tr > 0 ? w[dim - 1] / tr : 0.0;
  ex.degenerate = w[dim - 1] - w[dim - 2] <= 1e-9 * std::max(1.0, std::abs(w[dim - 1]));
  double ref = std::abs(u[N]) > 0 ? std::arg(u[N]) : 0.0;
  double tail = std::abs(u[N + 1]) > 0 ? std::arg(u[N + 1]) : ref;
  ex.ref_mismatch = std::abs(std::remainder(tail - ref, 2.0 * std::numbers::pi));
  ex.consistent = ex.ref_mismatch < 1e-3;
  CVec t(N);
  for (int n = 0; n < N; ++n)
    t[n] = std::abs(u[n]) > 0 ? std::polar(1.0, std::arg(u[n]) - ref) : cplx(1.0, 0.0);
  ex.theta = PhaseShifts(std::move(t));
  return ex;
}

/// Candidate phase vectors drawn from CN(0, Phi) and referenced to entry N+1.
inline std::vector<PhaseShifts> gaussian_randomization(const CMat& Phi, int count, std::uint64_t seed) {
  const Eigen::Index dim = Phi.rows();
  const int N = static_cast<int>(dim - 2);
  Eigen::SelfAdjointEigenSolver<CMat> es(conic::hermitian_part(Phi));
  CMat L = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().cast<cplx>().asDiagonal();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
  std::vector<PhaseShifts> out;
  for (int s = 0; s < count; ++s) {
    CVec z(dim);
    for (Eigen::Index i = 0; i < dim; ++i) z[i] = cplx(nd(rng), nd(rng));
    CVec xi = L * z;
    CVec t(N);
    double ref = std::arg(xi[N]);
    for (int n = 0; n < N; ++n) t[n] = std::polar(1.0, std::arg(xi[n]) - ref);
    out.emplace_back(std::move(t));
  }
  return out;
}

// ---------------------------------------------------------------------------
// majorization-minimization loop
// ---------------------------------------------------------------------------

struct MmOptions {
  int T_max = 10;
  double rel_tol = 1e-4;
  int penalty_rounds = 5;         // DC linearization updates per MM iteration
  double rank_target = 0.999;
  double randomize_below = 0.99;  // rank ratio under which randomization candidates are added
  int randomization_samples = 50;
  int retries = 1;                // curvature doublings after a rejected step
  double curvature_fraction = 1.0 / 64.0;  // initial l as a fraction of the bound
  double feas_tol = 1e-7;
  int backtracks = 30;            // geodesic pull-backs toward the current phases
  std::uint64_t seed = 0;
  SdpOptions sdp;
};

struct MmIterate {
  int iteration = 0;
  double surrogate = 0;  // surrogate objective after the SDR step
  double extracted = 0;  // surrogate objective at the extracted unit-modulus phases
  double R_true = 0;     // un-lifted throughput at the accepted phases
  double rank_ratio = 0;
  bool accepted = false;
  bool randomized = false;
  bool backtracked = false;  // accepted point was pulled back toward the previous phases
};

struct MmResult {
  PhaseShifts theta;
  double R_initial = 0;
  double R_final = 0;
  Vec curvature;
  std::vector<MmIterate> trace;
  bool warning = false;
  std::string message;
};

inline Vec initial_curvature(const QuadForms& q, const Scenario& sc, double fraction) {
  Vec l(q.K());
  for (int k = 0; k < q.K(); ++k) l[k] = std::max(sc.curvature_l, fraction * curvature_bound(q, k));
  return l;
}

/// Phase optimization at a fixed allocation. Accepted iterates keep the
/// allocation feasible and never lower the throughput.
inline MmResult mm_optimize(const ChannelSet& ch, const Allocation& al, const PhaseShifts& theta0,
                            const Scenario& sc, const MmOptions& opt = {}) {
  MmResult res;
  res.theta = theta0;
  auto eval = [&](const PhaseShifts& th, bool* feasible) {
    Gains g = gain_powers(ch, th);
    if (feasible) *feasible = check_feasible(al, g, sc).feasible(sc, opt.feas_tol);
    return system_metrics(al, g, sc).R_sum;
  };
  res.R_initial = eval(theta0, nullptr);
  res.R_final = res.R_initial;
  if (ch.N() == 0) return res;
  const QuadForms q = build_quadforms(ch);
  Vec l = initial_curvature(q, sc, opt.curvature_fraction);
  for (int k = 0; k < q.K(); ++k)
    if (!(l[k] > 0)) l[k] = 1e-300;  // device without any channel
  PhaseShifts th = theta0;
  double R = res.R_initial;
  std::vector<double> mult;
  for (int it = 1; it <= opt.T_max; ++it) {
    MmIterate rec;
    rec.iteration = it;
    bool accepted = false;
    PhaseShifts best_th = th;
    double best_R = R;
    for (int attempt = 0; attempt <= opt.retries && !accepted; ++attempt) {
      MinorizerMats m = build_minorizer(q, th, l);
      CMat Phi = lifted_matrix(th);
      SdpStepResult step;
      for (int r = 0; r < opt.penalty_rounds; ++r) {
        step = solve_sdp_step(q, m, al, sc, sc.penalty_delta, Phi, opt.sdp, &mult);
        mult = step.multipliers;
        Phi = step.Phi;
        if (step.warning) res.warning = true;
        if (step.rank_ratio >= opt.rank_target) break;
      }
      rec.surrogate = lifted_objective(Phi, q, m, al, sc);
      rec.rank_ratio = step.rank_ratio;
      std::vector<PhaseShifts> cands{extract_phases(Phi).theta};
      rec.extracted = lifted_objective(lifted_matrix(cands.front()), q, m, al, sc);
      if (step.rank_ratio < opt.randomize_below) {
        auto extra = gaussian_randomization(Phi, opt.randomization_samples,
                                            splitmix64(opt.seed ^ static_cast<std::uint64_t>(it)));
        cands.insert(cands.end(), extra.begin(), extra.end());
        rec.randomized = true;
      }
      for (const auto& c : cands) {
        // The solver meets the constraints only to its residual tolerance, so
        // an extracted point may sit marginally outside the feasible set.
        // Pull it back along the phase geodesic from the current iterate.
        double t = 1.0;
        for (int bt = 0; bt <= opt.backtracks; ++bt, t *= 0.7) {
          PhaseShifts ct = bt == 0 ? c : interpolate_phases(th, c, t);
          bool feas = false;
          double Rc = eval(ct, &feas);
          if (!feas) continue;
          if (Rc > best_R) {
            best_R = Rc;
            best_th = ct;
            rec.backtracked = bt > 0;
          }
          break;
        }
      }
      if (best_R > R) {
        accepted = true;
        break;
      }
      // no improving feasible candidate: check the minorizer at the
      // extracted point and tighten the curvature where it overshoots
      const Gains gt = quad_gains(q, cands.front().theta());
      const CMat Pt = lifted_matrix(cands.front());
      bool any = false;
      for (int k = 0; k < q.K(); ++k) {
        double truth = gt.h2[k] * gt.g2[k];
        if (product_minorizer(m, k, Pt) > truth * (1 + 1e-9) + 1e-300) {
          l[k] *= 2.0;
          any = true;
        }
      }
      if (!any) l *= 2.0;
    }
    rec.accepted = accepted;
    if (!accepted) {
      rec.R_true = R;
      res.trace.push_back(rec);
      break;
    }
    double rel = (best_R - R) / std::max(std::abs(R), 1e-300);
    th = best_th;
    R = best_R;
    rec.R_true = R;
    res.trace.push_back(rec);
    if (rel < opt.rel_tol) break;
  }
  res.theta = th;
  res.R_final = R;
  res.curvature = l;
  return res;
}

}  // namespace rismec

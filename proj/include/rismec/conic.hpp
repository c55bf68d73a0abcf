// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rismec/types.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace rismec::conic {

/// Real inner product <A, B> = Re Tr(A^H B) on Hermitian matrices.
inline double inner(const CMat& A, const CMat& B) { return (A.conjugate().cwiseProduct(B)).sum().real(); }

inline CMat hermitian_part(const CMat& M) { return 0.5 * (M + M.adjoint()); }

inline CMat project_psd(const CMat& M) {
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(M));
  Vec w = es.eigenvalues().cwiseMax(0.0);
  const CMat& V = es.eigenvectors();
  return V * w.cast<cplx>().asDiagonal() * V.adjoint();
}

struct Norms {
  double nuclear = 0;
  double spectral = 0;
  CVec leading;  // unit eigenvector of the largest eigenvalue
};

/// Nuclear and spectral norms of a Hermitian matrix, with its leading eigenvector.
inline Norms norms(const CMat& M) {
  Norms n;
  if (M.rows() == 0) return n;
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(M));
  const Vec& w = es.eigenvalues();
  for (int i = 0; i < w.size(); ++i) {
    n.nuclear += std::abs(w[i]);
    n.spectral = std::max(n.spectral, std::abs(w[i]));
  }
  n.leading = es.eigenvectors().col(w.size() - 1);
  return n;
}

/// ||Phi||_* - ||Phi_prev||_2 - <u u^H, Phi - Phi_prev>, u the leading
/// eigenvector of Phi_prev. The supergradient w.r.t. Phi (valid on the PSD
/// cone, where the nuclear norm is the trace) is I - u u^H.
struct RankPenalty {
  double value = 0;
  CMat gradient;
};

inline RankPenalty rank_one_penalty(const CMat& Phi, const CMat& Phi_prev) {
  if (Phi.rows() != Phi_prev.rows() || Phi.cols() != Phi_prev.cols())
    throw DimensionError("rank_one_penalty: size mismatch");
  RankPenalty r;
  const int m = static_cast<int>(Phi.rows());
  if (m == 0) return r;
  Norms np = norms(Phi_prev);
  CMat U = np.leading * np.leading.adjoint();
  r.value = norms(Phi).nuclear - np.spectral - inner(U, Phi - Phi_prev);
  r.gradient = CMat::Identity(m, m) - U;
  return r;
}

/// Nearest matrix in {X Hermitian PSD, diag(X) = 1} in the Frobenius norm.
/// Solves the dual  min_y 1/2 ||(M + Diag y)_+||^2 - sum(y)  by semismooth
/// Newton with the generalized Hessian of the spectral projection. The dual
/// iterate is kept so consecutive calls on nearby inputs start warm.
class CorrelationProjector {
 public:
  double tolerance = 1e-11;
  int max_iterations = 60;

  CMat operator()(const CMat& M) {
    const int n = static_cast<int>(M.rows());
    if (n == 0) return M;
    if (y_.size() != n) y_ = Vec::Zero(n);
    CMat H0 = hermitian_part(M);
    Vec y = y_;
    auto dual = [&](const Vec& yy, Eigen::SelfAdjointEigenSolver<CMat>& es) {
      CMat A = H0;
      A.diagonal() += yy.cast<cplx>();
      es.compute(A);
      double v = 0;
      for (int i = 0; i < n; ++i) v += 0.5 * std::pow(std::max(es.eigenvalues()[i], 0.0), 2);
      return v - yy.sum();
    };
    Eigen::SelfAdjointEigenSolver<CMat> es;
    double theta = dual(y, es);
    double last_gn = std::numeric_limits<double>::infinity();
    int stagnant = 0;
    for (int it = 0; it < max_iterations; ++it) {
      const Vec& w = es.eigenvalues();
      const CMat& V = es.eigenvectors();
      Vec g(n);
      for (int i = 0; i < n; ++i) {
        double s = 0;
        for (int a = 0; a < n; ++a) s += std::max(w[a], 0.0) * std::norm(V(i, a));
        g[i] = s - 1.0;
      }
      const double gn = g.norm();
      if (gn <= tolerance * std::sqrt(static_cast<double>(n))) break;
      // near the solution the dual value loses resolution before the
      // gradient does; stop there once the gradient no longer shrinks
      const bool close = gn <= 1e-6 * std::sqrt(static_cast<double>(n));
      stagnant = close && gn > 0.5 * last_gn ? stagnant + 1 : 0;
      if (stagnant >= 2) break;
      last_gn = gn;
      Mat H = newton_matrix(w, V);
      H.diagonal().array() += 1e-10 * std::max(1.0, H.diagonal().maxCoeff());
      Vec d = -H.ldlt().solve(g);
      if (!d.allFinite() || g.dot(d) >= 0) d = -g;
      double step = 1.0;
      Eigen::SelfAdjointEigenSolver<CMat> trial;
      double th_new = theta;
      bool moved = false;
      for (int ls = 0; ls < 40; ++ls) {
        Vec yn = y + step * d;
        th_new = dual(yn, trial);
        if (th_new <= theta + 1e-4 * step * g.dot(d)) {
          y = yn;
          es = trial;
          theta = th_new;
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
    }
    y_ = y;
    const Vec w = es.eigenvalues().cwiseMax(0.0);
    const CMat& V = es.eigenvectors();
    CMat X = V * w.cast<cplx>().asDiagonal() * V.adjoint();
    // remove the remaining diagonal error by a congruence, which keeps X PSD
    Vec s(n);
    for (int i = 0; i < n; ++i) s[i] = 1.0 / std::sqrt(std::max(X(i, i).real(), 1e-300));
    X = s.cast<cplx>().asDiagonal() * X * s.cast<cplx>().asDiagonal();
    X = hermitian_part(X);
    for (int i = 0; i < n; ++i) X(i, i) = 1.0;
    return X;
  }

  void reset() { y_.resize(0); }

 private:
  Vec y_;

  // H_ij = Re sum_ab Om_ab V_ia conj(V_ib) conj(V_ja) V_jb. Om vanishes on
  // pairs of non-positive eigenvalues and equals one on positive pairs, so
  // the cheaper of the direct and complementary sums is used
  // (the full sum over all pairs is the identity).
  static Mat newton_matrix(const Vec& w, const CMat& V) {
    const int n = static_cast<int>(w.size());
    std::vector<int> pos, neg;
    for (int a = 0; a < n; ++a) (w[a] > 0 ? pos : neg).push_back(a);
    const bool direct = pos.size() <= neg.size();
    const std::vector<int>& P = direct ? pos : neg;
    const std::vector<int>& O = direct ? neg : pos;
    auto weight = [&](int a, int b) {
      // Om for the direct sum; 1 - Om for the complementary one
      double om = (std::max(w[a], 0.0) + std::max(w[b], 0.0)) / (std::abs(w[a]) + std::abs(w[b]));
      if (!std::isfinite(om)) om = 0.0;
      return direct ? om : 1.0 - om;
    };
    // the (b, a) term is the conjugate of the (a, b) term and has the same
    // real part, so mixed pairs are stored once with a factor 2
    const int pairs = static_cast<int>(P.size() * P.size() + P.size() * O.size());
    CMat W(n, std::max(pairs, 1));
    W.setZero();
    int col = 0;
    for (int a : P) {
      for (int b : P) {
        W.col(col++) = V.col(a).cwiseProduct(V.col(b).conjugate());
      }
      for (int b : O) {
        double c = std::sqrt(2.0 * weight(a, b));
        W.col(col++) = c * V.col(a).cwiseProduct(V.col(b).conjugate());
      }
    }
    Mat H = (W * W.adjoint()).real();
    if (!direct) H = Mat::Identity(n, n) - H;
    return H;
  }
};

/// Approximate projection onto {PSD, unit diagonal}: alternating PSD and
/// diagonal projections, then a diagonal congruence that makes the result
/// exactly feasible.
inline CMat alternating_projection(const CMat& M, int sweeps = 3) {
  const Eigen::Index n = M.rows();
  CMat X = hermitian_part(M);
  for (int s = 0; s < sweeps; ++s) {
    X = project_psd(X);
    X.diagonal().setOnes();
  }
  X = project_psd(X);
  Vec d(n);
  for (Eigen::Index i = 0; i < n; ++i) d[i] = 1.0 / std::sqrt(std::max(X(i, i).real(), 1e-300));
  X = hermitian_part(d.cast<cplx>().asDiagonal() * X * d.cast<cplx>().asDiagonal());
  X.diagonal().setOnes();
  return X;
}

// ---------------------------------------------------------------------------
// first-order solver
// ---------------------------------------------------------------------------

/// Scalar constraint  value(X) >= 0, concave in X. `scale` normalizes the
/// residual so different families are comparable.
struct Inequality {
  std::function<double(const CMat&)> value;
  std::function<CMat(const CMat&)> gradient;
  double scale = 1.0;
  std::string name;
};

struct Options {
  int max_iterations = 5000;      // total projected-gradient steps
  int max_outer = 25;             // multiplier updates
  double rel_tol = 1e-6;          // relative objective change
  double residual_tol = 1e-5;     // scaled constraint residual
  bool check_gradient = true;
  double gradient_tol = 1e-5;
  bool exact_projection = true;   // semismooth Newton; false: alternating sweeps
  double projection_tol = 1e-9;
  double penalty_factor = 1.0;     // initial penalty, relative to |objective(X0)|
  int inner_iterations = 40;       // gradient steps per multiplier update
  int projection_sweeps = 3;
};

struct Problem {
  int m = 0;
  std::function<double(const CMat&)> objective;
  std::function<CMat(const CMat&)> gradient;
  std::vector<Inequality> constraints;
  std::vector<double> initial_multipliers;  // optional warm start, one per constraint
  Options options;
};

struct Result {
  CMat X;
  double value = 0;           // objective at X
  double initial_value = 0;   // objective at X0
  double residual = 0;        // largest scaled constraint violation
  int iterations = 0;
  bool converged = false;
  bool warning = false;
  double gradient_error = 0;  // worst relative finite-difference mismatch at X0
  std::vector<double> trace;  // merit value after each accepted step
  std::vector<double> multipliers;
  std::string message;
};

/// Largest scaled violation  max_i max(0, -value_i / scale_i).
inline double constraint_residual(const Problem& p, const CMat& X) {
  double r = 0;
  for (const auto& c : p.constraints) r = std::max(r, std::max(0.0, -c.value(X) / c.scale));
  return r;
}

namespace detail {

inline CMat random_hermitian(int m, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  CMat D(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) D(i, j) = cplx(nd(rng), nd(rng));
  D = hermitian_part(D);
  return D / D.norm();
}

inline double directional_error(const std::function<double(const CMat&)>& f,
                                const std::function<CMat(const CMat&)>& g, const CMat& X,
                                const CMat& D) {
  // Central differences at this step are accurate to about 1e-9 relative for
  // the smooth terms used here. The floor in `scale` absorbs cancellation when a
  // function carries a large constant offset next to a tiny slope.
  const double h = 1e-4 * std::max(1.0, X.norm());
  double fd = (f(X + h * D) - f(X - h * D)) / (2 * h);
  double an = inner(g(X), D);
  const double roundoff = 1e-13 * std::max(1.0, std::abs(f(X))) / h;
  double scale = std::max({std::abs(fd), std::abs(an), roundoff, 1e-300});
  return std::abs(fd - an) / scale;
}

}  // namespace detail

/// Worst relative mismatch between analytic and central-difference
/// directional derivatives along a few random Hermitian directions.
inline double gradient_check(const Problem& p, const CMat& X, int directions = 2,
                             std::uint64_t seed = 7) {
  std::mt19937_64 rng(seed);
  double worst = 0;
  for (int d = 0; d < directions; ++d) {
    CMat D = detail::random_hermitian(p.m, rng);
    worst = std::max(worst, detail::directional_error(p.objective, p.gradient, X, D));
    for (const auto& c : p.constraints)
      worst = std::max(worst, detail::directional_error(c.value, c.gradient, X, D));
  }
  return worst;
}

/// Projected-gradient ascent over {PSD, unit diagonal}. Inequalities enter
/// through an augmented Lagrangian; a final bisection on the segment from
/// X0 restores feasibility if the multipliers have not fully converged.
/// Constraints already violated at X0 are relaxed to their value there, so
/// X0 is always admissible and the returned point never has a lower
/// objective than X0.
inline Result solve(const Problem& p, const CMat& X0) {
  if (p.m < 1) throw DimensionError("conic::solve: dimension must be positive");
  if (X0.rows() != p.m || X0.cols() != p.m) throw DimensionError("conic::solve: X0 size");
  const Options& opt = p.options;
  Result res;
  res.initial_value = p.objective(X0);
  res.X = X0;
  res.value = res.initial_value;
  if (opt.check_gradient) {
    res.gradient_error = gradient_check(p, X0);
    if (res.gradient_error > opt.gradient_tol) {
      res.warning = true;
      res.message = "gradient check mismatch " + std::to_string(res.gradient_error);
    }
  }

  const std::size_t nc = p.constraints.size();
  std::vector<double> shift(nc, 0.0);
  for (std::size_t i = 0; i < nc; ++i)
    shift[i] = std::min(0.0, p.constraints[i].value(X0) / p.constraints[i].scale);
  auto cval = [&](std::size_t i, const CMat& X) {
    return p.constraints[i].value(X) / p.constraints[i].scale - shift[i];
  };
  auto residual = [&](const CMat& X) {
    double r = 0;
    for (std::size_t i = 0; i < nc; ++i) r = std::max(r, -cval(i, X));
    return r;
  };

  std::vector<double> mult(nc, 0.0);
  if (p.initial_multipliers.size() == nc) mult = p.initial_multipliers;
  double rho = opt.penalty_factor * std::max(1.0, std::abs(res.initial_value));
  auto merit = [&](const CMat& X, CMat* grad) {
    double v = p.objective(X);
    if (grad) *grad = p.gradient(X);
    for (std::size_t i = 0; i < nc; ++i) {
      double t = std::max(0.0, mult[i] - rho * cval(i, X));
      v -= (t * t - mult[i] * mult[i]) / (2 * rho);
      if (grad && t > 0) *grad += (t / p.constraints[i].scale) * p.constraints[i].gradient(X);
    }
    return v;
  };

  CorrelationProjector proj;
  proj.tolerance = opt.projection_tol;
  auto project = [&](const CMat& M) {
    return opt.exact_projection ? proj(M) : alternating_projection(M, opt.projection_sweeps);
  };
  CMat X = X0;
  double prev_obj = res.initial_value;
  double prev_residual = 0.0;
  int iters = 0;
  bool done = false;
  double eta = -1;
  for (int outer = 0; outer < opt.max_outer && !done && iters < opt.max_iterations; ++outer) {
    CMat G;
    double L = merit(X, &G);
    const double gn = G.norm();
    if (!(gn > 0)) {
      done = residual(X) <= opt.residual_tol;
      break;
    }
    if (eta <= 0) {
      // secant estimate of the local Lipschitz constant
      const double h = 1e-4 * std::max(1.0, X.norm());
      CMat G2;
      merit(X + (h / gn) * G, &G2);
      double lip = (G2 - G).norm() / h;
      eta = lip > 0 ? 1.0 / lip : X.norm() / gn;
      eta = std::min(eta, 10.0 * std::max(1.0, X.norm()) / gn);
    }
    // monotone accelerated projected gradient with function-value restart
    int small = 0;
    int steps = 0;
    CMat Y = X, GY = G;
    double LY = L, t = 1.0;
    while (iters < opt.max_iterations && steps < opt.inner_iterations) {
      CMat Z, GZ;
      double LZ = LY;
      bool accepted = false;
      for (int bt = 0; bt < 60; ++bt) {
        Z = project(Y + eta * GY);
        CMat D = Z - Y;
        LZ = merit(Z, &GZ);
        // exact projection: quadratic-model test; sweeps: Armijo increase
        double lin = inner(GY, D);
        double model = opt.exact_projection ? LY + lin - D.squaredNorm() / (2 * eta) : LY + 1e-4 * lin;
        if (LZ >= model - 1e-12 * std::abs(LY) && (opt.exact_projection || lin > 0)) {
          accepted = true;
          break;
        }
        eta *= 0.5;
      }
      ++iters;
      ++steps;
      if (!accepted) break;
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      const double Lprev = L;
      if (LZ >= L) {
        CMat Xprev = X;
        X = Z;
        L = LZ;
        G = GZ;
        Y = X + ((t - 1.0) / t_next) * (X - Xprev);
        t = t_next;
        LY = merit(Y, &GY);
      } else {
        t = 1.0;
        Y = X;
        GY = G;
        LY = L;
      }
      res.trace.push_back(L);
      bool stalled = std::abs(L - Lprev) <= opt.rel_tol * std::max(1.0, std::abs(L));
      small = stalled ? small + 1 : 0;
      if (small >= 3) break;
      eta *= 1.2;
    }
    double resid = 0;
    for (std::size_t i = 0; i < nc; ++i) {
      double ci = cval(i, X);
      mult[i] = std::max(0.0, mult[i] - rho * ci);
      resid = std::max(resid, -ci);
    }
    double obj = p.objective(X);
    bool stable = std::abs(obj - prev_obj) <= opt.rel_tol * std::max(1.0, std::abs(obj));
    if (resid <= opt.residual_tol && (stable || nc == 0)) done = true;
    if (resid > opt.residual_tol && outer > 0 && resid > 0.25 * prev_residual) rho *= 10.0;
    prev_residual = resid;
    prev_obj = obj;
  }
  res.iterations = iters;
  res.converged = done;
  res.multipliers = mult;

  // feasibility repair on the segment X0 -> X (the admissible set is convex)
  CMat best = X;
  if (residual(X) > opt.residual_tol) {
    double lo = 0, hi = 1;
    for (int b = 0; b < 50; ++b) {
      double mid = 0.5 * (lo + hi);
      if (residual(X0 + mid * (X - X0)) <= opt.residual_tol)
        lo = mid;
      else
        hi = mid;
    }
    best = X0 + lo * (X - X0);
    res.warning = true;
    if (res.message.empty()) res.message = "constraint repair applied";
  }
  double v = p.objective(best);
  if (v < res.initial_value) {
    best = X0;
    v = res.initial_value;
  }
  res.X = best;
  res.value = v;
  res.residual = constraint_residual(p, best);
  if (!done) {
    res.warning = true;
    if (res.message.empty()) res.message = "iteration cap reached";
  }
  return res;
}

}  // namespace rismec::conic

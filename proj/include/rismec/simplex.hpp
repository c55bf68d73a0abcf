// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rismec/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace rismec::lp {

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
    case Status::IterationLimit: return "iteration_limit";
  }
  return "?";
}

struct Result {
  Status status = Status::Infeasible;
  Vec x;             // primal solution
  Vec y;             // row duals (>= 0 for <= rows of a max problem)
  double objective = 0;
  int iterations = 0;
};

struct Options {
  double feas_tol = 1e-9;   // phase-one objective / primal tolerance, scaled units
  double opt_tol = 1e-10;   // reduced-cost tolerance, scaled units
  double pivot_tol = 1e-11;
  int max_iterations = 0;   // 0: 50 * (rows + cols) + 1000
  int bland_after = 40;     // consecutive degenerate pivots before switching rule
};

namespace detail {

// Revised simplex on  max c'x  s.t.  M x = b, x >= 0, starting from a
// feasible basis. Columns flagged in `barred` never enter.
inline Status iterate(const Mat& M, const Vec& b, const Vec& c, std::vector<int>& basis,
                      const std::vector<char>& barred, const Options& opt, int& iters,
                      int max_iters) {
  const int m = static_cast<int>(M.rows());
  const int n = static_cast<int>(M.cols());
  std::vector<char> in_basis(static_cast<std::size_t>(n), 0);
  for (int j : basis) in_basis[j] = 1;
  int degenerate_run = 0;
  Mat B(m, m);
  Vec cb(m);
  while (iters < max_iters) {
    for (int i = 0; i < m; ++i) {
      B.col(i) = M.col(basis[i]);
      cb[i] = c[basis[i]];
    }
    Eigen::FullPivLU<Mat> lu(B);
    Mat Binv = lu.inverse();
    Vec xb = Binv * b;
    Vec y = Binv.transpose() * cb;

    const bool bland = degenerate_run >= opt.bland_after;
    int enter = -1;
    double best = opt.opt_tol;
    for (int j = 0; j < n; ++j) {
      if (in_basis[j] || barred[j]) continue;
      double d = c[j] - y.dot(M.col(j));
      if (d > best) {
        enter = j;
        if (bland) break;
        best = d;
      }
    }
    if (enter < 0) return Status::Optimal;

    Vec u = Binv * M.col(enter);
    int leave = -1;
    double ratio = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      if (u[i] <= opt.pivot_tol) continue;
      double r = std::max(xb[i], 0.0) / u[i];
      if (leave < 0) {
        ratio = r;
        leave = i;
        continue;
      }
      const double slack = 1e-14 * (1.0 + std::abs(ratio));
      if (r < ratio - slack || (r <= ratio + slack && basis[i] < basis[leave])) {
        ratio = r;
        leave = i;
      }
    }
    if (leave < 0) return Status::Unbounded;
    degenerate_run = ratio <= 1e-14 ? degenerate_run + 1 : 0;
    in_basis[basis[leave]] = 0;
    in_basis[enter] = 1;
    basis[leave] = enter;
    ++iters;
  }
  return Status::IterationLimit;
}

}  // namespace detail

/// Dense two-phase simplex for  max c'x  s.t.  A x <= b, x >= 0.
/// Rows with negative right-hand side are handled through artificials.
/// Rows, columns and the objective are equilibrated internally; the returned
/// primal and dual solutions are in the caller's units.
inline Result solve(const Mat& A, const Vec& b, const Vec& c, const Options& opt = {}) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  if (b.size() != m || c.size() != n) throw DimensionError("lp::solve: inconsistent sizes");
  Result res;
  res.x = Vec::Zero(n);
  res.y = Vec::Zero(m);
  if (m == 0) {
    for (int j = 0; j < n; ++j)
      if (c[j] > 0) {
        res.status = Status::Unbounded;
        return res;
      }
    res.status = Status::Optimal;
    return res;
  }

  // equilibrate
  Vec rs = Vec::Ones(m), cs = Vec::Ones(n);
  for (int pass = 0; pass < 2; ++pass) {
    for (int i = 0; i < m; ++i) {
      double mx = 0;
      for (int j = 0; j < n; ++j) mx = std::max(mx, std::abs(A(i, j) * rs[i] * cs[j]));
      if (mx > 0) rs[i] /= mx;
    }
    for (int j = 0; j < n; ++j) {
      double mx = 0;
      for (int i = 0; i < m; ++i) mx = std::max(mx, std::abs(A(i, j) * rs[i] * cs[j]));
      if (mx > 0) cs[j] /= mx;
    }
  }
  Vec cS = c.cwiseProduct(cs);
  double cmax = cS.cwiseAbs().maxCoeff();
  double osc = cmax > 0 ? 1.0 / cmax : 1.0;
  cS *= osc;
  Vec bS = b.cwiseProduct(rs);

  // [A | I | -e_i for rows with negative rhs]
  std::vector<int> art_rows;
  for (int i = 0; i < m; ++i)
    if (bS[i] < 0) art_rows.push_back(i);
  const int na = static_cast<int>(art_rows.size());
  const int total = n + m + na;
  Mat M = Mat::Zero(m, total);
  M.leftCols(n) = rs.asDiagonal() * A * cs.asDiagonal();
  M.middleCols(n, m).setIdentity();
  std::vector<int> basis(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) basis[i] = n + i;
  for (int a = 0; a < na; ++a) {
    M(art_rows[a], n + m + a) = -1.0;
    basis[art_rows[a]] = n + m + a;
  }

  const int max_iters = opt.max_iterations > 0 ? opt.max_iterations : 50 * (m + n) + 1000;
  std::vector<char> barred(static_cast<std::size_t>(total), 0);
  int iters = 0;

  if (na > 0) {
    Vec c1 = Vec::Zero(total);
    c1.tail(na).setConstant(-1.0);
    Status s1 = detail::iterate(M, bS, c1, basis, barred, opt, iters, max_iters);
    if (s1 == Status::IterationLimit) {
      res.status = s1;
      res.iterations = iters;
      return res;
    }
    Mat B(m, m);
    for (int i = 0; i < m; ++i) B.col(i) = M.col(basis[i]);
    Vec xb = B.fullPivLu().solve(bS);
    double infeas = 0;
    for (int i = 0; i < m; ++i)
      if (basis[i] >= n + m) infeas += std::max(0.0, xb[i]);
    if (infeas > opt.feas_tol * std::max(1.0, bS.cwiseAbs().maxCoeff())) {
      res.status = Status::Infeasible;
      res.iterations = iters;
      return res;
    }
    // pivot zero-level artificials out of the basis where possible
    for (int i = 0; i < m; ++i) {
      if (basis[i] < n + m) continue;
      for (int i2 = 0; i2 < m; ++i2) B.col(i2) = M.col(basis[i2]);
      Mat Binv = B.fullPivLu().inverse();
      for (int j = 0; j < n + m; ++j) {
        if (std::find(basis.begin(), basis.end(), j) != basis.end()) continue;
        double piv = Binv.row(i).dot(M.col(j));
        if (std::abs(piv) > 1e-9) {
          basis[i] = j;
          break;
        }
      }
    }
    for (int a = 0; a < na; ++a) barred[n + m + a] = 1;
  }

  Vec c2 = Vec::Zero(total);
  c2.head(n) = cS;
  Status s2 = detail::iterate(M, bS, c2, basis, barred, opt, iters, max_iters);
  res.iterations = iters;
  res.status = s2;
  if (s2 != Status::Optimal) return res;

  Mat B(m, m);
  Vec cb(m);
  for (int i = 0; i < m; ++i) {
    B.col(i) = M.col(basis[i]);
    cb[i] = c2[basis[i]];
  }
  Eigen::FullPivLU<Mat> lu(B);
  Vec xb = lu.solve(bS);
  Vec yS = lu.inverse().transpose() * cb;
  Vec xS = Vec::Zero(total);
  for (int i = 0; i < m; ++i) xS[basis[i]] = std::max(0.0, xb[i]);
  res.x = xS.head(n).cwiseProduct(cs);
  res.y = yS.cwiseProduct(rs) / osc;
  for (int i = 0; i < m; ++i) res.y[i] = std::max(0.0, res.y[i]);
  res.objective = c.dot(res.x);
  return res;
}

}  // namespace rismec::lp

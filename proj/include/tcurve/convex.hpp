#pragma once

// Small convex programs of the form
//
//   minimize   sum_x w_x * x_x^p
//   subject to A x >= 1,  x >= 0
//
// with A entrywise nonnegative and every row nonzero (so a large constant x
// is always feasible). Both the p-modulus of a curve family and the minimal
// Hajlasz gradient reduce to this shape.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace tcurve::convex {

struct PowerProgram {
  Eigen::MatrixXd rows;    ///< K x n, nonnegative
  Eigen::VectorXd weight;  ///< n, positive
  double p = 2.0;
};

enum class Method { automatic, simplex, active_set, barrier };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::automatic: return "automatic";
    case Method::simplex: return "simplex";
    case Method::active_set: return "active_set";
    case Method::barrier: return "barrier";
  }
  return "?";
}

struct Solution {
  Eigen::VectorXd x;
  double value = 0.0;        ///< sum_x w_x x_x^p
  double lower_bound = 0.0;  ///< dual objective at the returned multipliers
  Eigen::VectorXd multipliers;  ///< one per (deduplicated) row
  Method method = Method::automatic;
  bool tie = false;  ///< p = 1 only: the optimal x may not be unique
  int iterations = 0;
};

namespace detail {

inline double objective(const Eigen::VectorXd& w, const Eigen::VectorXd& x, double p) {
  double v = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x(i) > 0.0) v += w(i) * (p == 1.0 ? x(i) : p == 2.0 ? x(i) * x(i) : std::pow(x(i), p));
  }
  return v;
}

/// Lagrange dual at multipliers lambda >= 0; always a lower bound on the optimum.
inline double dual_value(const PowerProgram& prog, const Eigen::VectorXd& lambda) {
  const Eigen::VectorXd sigma = prog.rows.transpose() * lambda;
  const double p = prog.p;
  if (p == 1.0) {
    // Feasible only when sigma <= w; scale lambda down into the dual cone.
    double scale = 1.0;
    for (Eigen::Index x = 0; x < sigma.size(); ++x) scale = std::max(scale, sigma(x) / prog.weight(x));
    return lambda.sum() / scale;
  }
  const double q = p / (p - 1.0);
  double pen = 0.0;
  for (Eigen::Index x = 0; x < sigma.size(); ++x)
    if (sigma(x) > 0.0) pen += prog.weight(x) * std::pow(sigma(x) / (p * prog.weight(x)), q);
  return lambda.sum() - (p - 1.0) * pen;
}

/// Removes duplicate rows (exact equality); result is lexicographically sorted.
inline Eigen::MatrixXd unique_rows(const Eigen::MatrixXd& a) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(a.rows()));
  std::iota(idx.begin(), idx.end(), 0);
  auto less = [&](Eigen::Index i, Eigen::Index j) {
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      if (a(i, c) < a(j, c)) return true;
      if (a(i, c) > a(j, c)) return false;
    }
    return false;
  };
  std::stable_sort(idx.begin(), idx.end(), less);
  std::vector<Eigen::Index> keep;
  for (auto i : idx)
    if (keep.empty() || less(keep.back(), i)) keep.push_back(i);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(keep.size()), a.cols());
  for (std::size_t r = 0; r < keep.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = a.row(keep[r]);
  return out;
}

/// Constant x with every row product >= 1.
inline double constant_feasible(const Eigen::MatrixXd& a) {
  return 1.0 / a.rowwise().sum().minCoeff();
}

// p = 1: the LP  min w.x  s.t. Ax >= 1, x >= 0  is solved through its dual
//   max 1.lambda  s.t. A^T lambda <= w, lambda >= 0,
// whose slack basis is feasible because w > 0. Bland's rule keeps the pivot
// sequence (and hence tie-breaking) deterministic; x is read off the reduced
// costs of the slack columns.
inline Solution simplex(const PowerProgram& prog) {
  const Eigen::Index n = prog.rows.cols(), k = prog.rows.rows();
  const Eigen::Index cols = k + n;
  Eigen::MatrixXd tab = Eigen::MatrixXd::Zero(n + 1, cols + 1);
  tab.block(0, 0, n, k) = prog.rows.transpose();
  tab.block(0, k, n, n).setIdentity();
  tab.block(0, cols, n, 1) = prog.weight;
  tab.block(n, 0, 1, k).setConstant(-1.0);
  std::vector<Eigen::Index> basis(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) basis[static_cast<std::size_t>(i)] = k + i;

  const double eps = 1e-12;
  int it = 0;
  for (;; ++it) {
    if (it > 10000) throw std::runtime_error("simplex: iteration limit");
    Eigen::Index enter = -1;
    for (Eigen::Index j = 0; j < cols; ++j)
      if (tab(n, j) < -eps) { enter = j; break; }
    if (enter < 0) break;
    Eigen::Index leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (tab(i, enter) > eps) {
        const double ratio = tab(i, cols) / tab(i, enter);
        if (ratio < best - eps ||
            (std::fabs(ratio - best) <= eps && basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
          best = ratio;
          leave = i;
        }
      }
    }
    if (leave < 0) throw std::runtime_error("simplex: unbounded dual (infeasible primal)");
    tab.row(leave) /= tab(leave, enter);
    for (Eigen::Index i = 0; i <= n; ++i)
      if (i != leave && tab(i, enter) != 0.0) tab.row(i) -= tab(i, enter) * tab.row(leave);
    basis[static_cast<std::size_t>(leave)] = enter;
  }

  Solution sol;
  sol.method = Method::simplex;
  sol.iterations = it;
  sol.x = tab.block(n, k, 1, n).transpose().cwiseMax(0.0);
  sol.multipliers = Eigen::VectorXd::Zero(k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto b = basis[static_cast<std::size_t>(i)];
    if (b < k) sol.multipliers(b) = tab(i, cols);
    if (tab(i, cols) <= eps * std::max(1.0, prog.weight.maxCoeff())) sol.tie = true;
  }
  sol.value = objective(prog.weight, sol.x, 1.0);
  sol.lower_bound = dual_value(prog, sol.multipliers);
  return sol;
}

// p = 2: primal active-set method on  min x^T diag(w) x  s.t.  C x >= d,
// C = [A; I], d = [1; 0], started from a constant feasible point with an
// empty working set. Constraints enter only when blocking a step, which keeps
// the working set linearly independent.
inline bool active_set(const PowerProgram& prog, Solution& out) {
  const Eigen::Index n = prog.rows.cols(), k = prog.rows.rows();
  const Eigen::Index m = k + n;
  auto row = [&](Eigen::Index j) -> Eigen::VectorXd {
    if (j < k) return prog.rows.row(j).transpose();
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e(j - k) = 1.0;
    return e;
  };
  auto rhs = [&](Eigen::Index j) { return j < k ? 1.0 : 0.0; };
  const Eigen::VectorXd hinv = (2.0 * prog.weight).cwiseInverse();

  Eigen::VectorXd x = Eigen::VectorXd::Constant(n, constant_feasible(prog.rows));
  std::vector<Eigen::Index> work;
  std::vector<char> in_work(static_cast<std::size_t>(m), 0);
  const int limit = static_cast<int>(20 * m + 200);
  for (int it = 0; it < limit; ++it) {
    const auto w = static_cast<Eigen::Index>(work.size());
    Eigen::MatrixXd aw(w, n);
    for (Eigen::Index r = 0; r < w; ++r) aw.row(r) = row(work[static_cast<std::size_t>(r)]).transpose();
    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(w);
    Eigen::VectorXd step = -x;
    if (w > 0) {
      const Eigen::MatrixXd s = aw * hinv.asDiagonal() * aw.transpose();
      lambda = s.ldlt().solve(aw * x);
      step += hinv.asDiagonal() * (aw.transpose() * lambda);
    }
    if (step.norm() <= 1e-14 * (1.0 + x.norm())) {
      Eigen::Index worst = -1;
      double most = -1e-13;
      for (Eigen::Index r = 0; r < w; ++r)
        if (lambda(r) < most) { most = lambda(r); worst = r; }
      if (worst < 0) {
        out.method = Method::active_set;
        out.iterations = it;
        out.x = x.cwiseMax(0.0);
        out.multipliers = Eigen::VectorXd::Zero(k);
        for (Eigen::Index r = 0; r < w; ++r)
          if (work[static_cast<std::size_t>(r)] < k) out.multipliers(work[static_cast<std::size_t>(r)]) = std::max(0.0, lambda(r));
        out.value = objective(prog.weight, out.x, 2.0);
        out.lower_bound = dual_value(prog, out.multipliers);
        return true;
      }
      in_work[static_cast<std::size_t>(work[static_cast<std::size_t>(worst)])] = 0;
      work.erase(work.begin() + worst);
      continue;
    }
    double alpha = 1.0;
    Eigen::Index blocking = -1;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (in_work[static_cast<std::size_t>(j)]) continue;
      const Eigen::VectorXd cj = row(j);
      const double dir = cj.dot(step);
      if (dir < -1e-15) {
        const double a = std::max(0.0, (rhs(j) - cj.dot(x)) / dir);
        if (a < alpha) { alpha = a; blocking = j; }
      }
    }
    x += alpha * step;
    if (blocking >= 0) {
      if (blocking >= k) x(blocking - k) = 0.0;
      work.push_back(blocking);
      in_work[static_cast<std::size_t>(blocking)] = 1;
    }
  }
  return false;
}

// General p: log-barrier method in x with Newton centering. Multipliers
// 1/(t * slack) certify the gap through dual_value().
inline Solution barrier(const PowerProgram& prog, double rel_gap) {
  const Eigen::Index n = prog.rows.cols(), k = prog.rows.rows();
  const double p = prog.p;
  const auto& a = prog.rows;
  const auto& w = prog.weight;
  Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 2.0 * constant_feasible(a));

  auto phi = [&](const Eigen::VectorXd& y, double t, bool& ok) {
    ok = (y.array() > 0.0).all();
    if (!ok) return 0.0;
    const Eigen::VectorXd s = a * y - Eigen::VectorXd::Ones(k);
    ok = (s.array() > 0.0).all();
    if (!ok) return 0.0;
    return t * objective(w, y, p) - s.array().log().sum() - y.array().log().sum();
  };

  double t = static_cast<double>(k + n) / std::max(objective(w, x, p), 1e-300);
  Solution sol;
  sol.method = Method::barrier;
  sol.x = x;
  sol.value = objective(w, x, p);
  sol.lower_bound = -std::numeric_limits<double>::infinity();
  int total = 0;
  for (int outer = 0; outer < 80; ++outer) {
    for (int inner = 0; inner < 200; ++inner, ++total) {
      const Eigen::VectorXd s = a * x - Eigen::VectorXd::Ones(k);
      const Eigen::VectorXd inv_s = s.cwiseInverse();
      Eigen::VectorXd grad(n);
      Eigen::MatrixXd hess = a.transpose() * inv_s.cwiseAbs2().asDiagonal() * a;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double xi = x(i);
        grad(i) = t * p * w(i) * std::pow(xi, p - 1.0) - 1.0 / xi;
        hess(i, i) += t * p * (p - 1.0) * w(i) * std::pow(xi, p - 2.0) + 1.0 / (xi * xi);
      }
      grad -= a.transpose() * inv_s;
      const Eigen::VectorXd dx = -hess.ldlt().solve(grad);
      const double dec = -grad.dot(dx);
      if (!(dec > 1e-13)) break;
      bool ok = false;
      const double f0 = phi(x, t, ok);
      double alpha = 1.0;
      for (;;) {
        const Eigen::VectorXd y = x + alpha * dx;
        const double f1 = phi(y, t, ok);
        if (ok && f1 <= f0 - 0.25 * alpha * dec) { x = y; break; }
        alpha *= 0.5;
        if (alpha < 1e-16) break;
      }
      if (alpha < 1e-16) break;
    }
    const Eigen::VectorXd s = a * x - Eigen::VectorXd::Ones(k);
    const Eigen::VectorXd lambda = (t * s).cwiseInverse();
    const double lb = dual_value(prog, lambda);
    const double val = objective(w, x, p);
    if (val < sol.value || outer == 0) {
      sol.x = x;
      sol.value = val;
    }
    if (lb > sol.lower_bound) {
      sol.lower_bound = lb;
      sol.multipliers = lambda;
    }
    if (sol.value - sol.lower_bound <= rel_gap * std::max(sol.value, 1e-300)) break;
    t *= 8.0;
  }
  sol.iterations = total;
  return sol;
}

/// Rows of `a` (restricted to `cols`) from `cand`, in order, skipping any row
/// in the span of those already kept.
inline std::vector<Eigen::Index> independent_rows(const Eigen::MatrixXd& a, const std::vector<Eigen::Index>& cand,
                                                  const std::vector<Eigen::Index>& cols) {
  std::vector<Eigen::VectorXd> basis;
  std::vector<Eigen::Index> keep;
  for (auto j : cand) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) v(static_cast<Eigen::Index>(c)) = a(j, cols[c]);
    const double norm = v.norm();
    if (norm == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) v -= b.dot(v) * b;
    if (v.norm() <= 1e-9 * norm) continue;
    basis.push_back(v / v.norm());
    keep.push_back(j);
  }
  return keep;
}

inline double round_bits(double v, int bits) {
  if (v == 0.0 || !std::isfinite(v)) return v;
  int e = 0;
  const double m = std::frexp(v, &e);
  return std::ldexp(std::nearbyint(std::ldexp(m, bits)), e - bits);
}

/// Recomputes an optimum from its active rows alone, so that programs sharing
/// the same optimal active set return bit-identical solutions. Rows are
/// already in canonical (sorted) order. Returns false when the recomputed
/// point fails to verify; `sol` is then left untouched.
inline bool polish(const PowerProgram& prog, Solution& sol) {
  const auto& a = prog.rows;
  const auto& w = prog.weight;
  const double p = prog.p;
  const Eigen::Index n = a.cols(), k = a.rows();
  const double xmax = sol.x.maxCoeff();
  if (!(xmax > 0.0)) return false;
  const Eigen::VectorXd slack = a * sol.x - Eigen::VectorXd::Ones(k);
  std::vector<Eigen::Index> active, support, all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 0);
  for (Eigen::Index j = 0; j < k; ++j)
    if (slack(j) <= 1e-6) active.push_back(j);
  for (Eigen::Index i = 0; i < n; ++i)
    if (sol.x(i) > 1e-9 * xmax) support.push_back(i);

  auto feasible = [&](const Eigen::VectorXd& x) {
    if ((x.array() < 0.0).any() || !x.allFinite()) return false;
    return ((a * x).array() >= 1.0 - 1e-12).all() && objective(w, x, p) <= sol.value * (1.0 + 1e-8) + 1e-300;
  };

  if (p == 1.0) {
    const auto rows = independent_rows(a, active, support);
    if (rows.size() != support.size()) return false;
    const auto m = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd sq(m, m);
    for (Eigen::Index r = 0; r < m; ++r)
      for (Eigen::Index c = 0; c < m; ++c) sq(r, c) = a(rows[static_cast<std::size_t>(r)], support[static_cast<std::size_t>(c)]);
    const Eigen::VectorXd xs = sq.partialPivLu().solve(Eigen::VectorXd::Ones(m));
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    for (Eigen::Index c = 0; c < m; ++c) x(support[static_cast<std::size_t>(c)]) = xs(c);
    if (!feasible(x)) return false;
    sol.x = x;
    sol.value = objective(w, x, p);
    sol.lower_bound = std::min(sol.lower_bound, sol.value);
    return true;
  }

  // p > 1: x(lambda) = ((A_R^T lambda)_+ / (p w))^(1/(p-1)), Newton on A_R x(lambda) = 1.
  const double r = 1.0 / (p - 1.0);
  auto primal = [&](const Eigen::MatrixXd& ar, const Eigen::VectorXd& lam) {
    const Eigen::VectorXd sigma = ar.transpose() * lam;
    Eigen::VectorXd x(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double u = std::max(sigma(i), 0.0) / (p * w(i));
      x(i) = p == 2.0 ? u : std::pow(u, r);
    }
    return x;
  };
  auto newton = [&](const Eigen::MatrixXd& ar, Eigen::VectorXd& lam, int steps, bool guarded) {
    const Eigen::Index m = ar.rows();
    for (int it = 0; it < steps; ++it) {
      const Eigen::VectorXd sigma = ar.transpose() * lam;
      const Eigen::VectorXd x = primal(ar, lam);
      const Eigen::VectorXd res = ar * x - Eigen::VectorXd::Ones(m);
      Eigen::VectorXd dxds = Eigen::VectorXd::Zero(n);
      for (Eigen::Index i = 0; i < n; ++i)
        if (sigma(i) > 0.0) dxds(i) = r * x(i) / sigma(i);
      const Eigen::MatrixXd jac = ar * dxds.asDiagonal() * ar.transpose();
      const Eigen::VectorXd step = jac.ldlt().solve(res);
      if (!step.allFinite()) return false;
      if (!guarded) {
        lam -= step;
        continue;
      }
      double alpha = 1.0;
      const double r0 = res.lpNorm<Eigen::Infinity>();
      if (r0 <= 1e-15) return true;
      for (;;) {
        const Eigen::VectorXd trial = lam - alpha * step;
        if ((ar * primal(ar, trial) - Eigen::VectorXd::Ones(m)).lpNorm<Eigen::Infinity>() < r0) {
          lam = trial;
          break;
        }
        alpha *= 0.5;
        if (alpha < 1e-10) return r0 <= 1e-13;
      }
    }
    return true;
  };

  auto rows = independent_rows(a, active, all);
  for (int round = 0; round < 8 && !rows.empty(); ++round) {
    const auto m = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd ar(m, n);
    for (Eigen::Index j = 0; j < m; ++j) ar.row(j) = a.row(rows[static_cast<std::size_t>(j)]);
    // start from stationarity at the solver's point: A_R^T lambda = p w x^(p-1) on the support
    Eigen::VectorXd grad(n);
    for (Eigen::Index i = 0; i < n; ++i) grad(i) = p * w(i) * std::pow(sol.x(i), p - 1.0);
    Eigen::VectorXd lam = ar.transpose().colPivHouseholderQr().solve(grad);
    if (!newton(ar, lam, 60, true)) return false;
    const double big = lam.cwiseAbs().maxCoeff();
    std::vector<Eigen::Index> strong;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (lam(j) < -1e-9 * big) return false;
      if (lam(j) > 1e-12 * big) strong.push_back(rows[static_cast<std::size_t>(j)]);
    }
    if (strong.size() != rows.size()) {
      rows = std::move(strong);
      continue;
    }
    // canonical restart: converged runs agree to ~1e-13, far inside a 2^-30 rounding cell
    for (Eigen::Index j = 0; j < m; ++j) lam(j) = round_bits(lam(j), 30);
    if (!newton(ar, lam, 4, false)) return false;
    const Eigen::VectorXd x = primal(ar, lam);
    if (!feasible(x)) return false;
    sol.x = x;
    sol.value = objective(w, x, p);
    sol.multipliers = Eigen::VectorXd::Zero(k);
    for (Eigen::Index j = 0; j < m; ++j) sol.multipliers(rows[static_cast<std::size_t>(j)]) = std::max(lam(j), 0.0);
    sol.lower_bound = std::min(sol.value, dual_value(prog, sol.multipliers));
    return true;
  }
  return false;
}

inline Solution polished(const PowerProgram& prog, Solution sol) {
  polish(prog, sol);
  return sol;
}

}  // namespace detail

/// Solves the program. Duplicate rows are removed first (the optimum does
/// not depend on them); `Solution::multipliers` refers to the deduplicated
/// rows and is mainly diagnostic.
inline Solution solve(const PowerProgram& prog, Method method = Method::automatic, double rel_gap = 1e-10) {
  if (!(prog.p >= 1.0) || !std::isfinite(prog.p)) throw std::invalid_argument("power program: p must be a finite real >= 1");
  const Eigen::Index n = prog.weight.size();
  if (prog.rows.rows() > 0 && prog.rows.cols() != n) throw std::invalid_argument("power program: row length mismatch");
  if ((prog.weight.array() <= 0.0).any() || !prog.weight.allFinite()) throw std::invalid_argument("power program: weights must be positive");
  if (prog.rows.rows() == 0) {
    Solution sol;
    sol.x = Eigen::VectorXd::Zero(n);
    sol.method = method == Method::automatic ? Method::active_set : method;
    return sol;
  }
  if (!prog.rows.allFinite() || (prog.rows.array() < 0.0).any()) throw std::invalid_argument("power program: rows must be finite and nonnegative");
  if ((prog.rows.rowwise().sum().array() <= 0.0).any()) throw std::invalid_argument("power program: zero row (infeasible)");

  PowerProgram reduced{detail::unique_rows(prog.rows), prog.weight, prog.p};
  if (method == Method::automatic) method = prog.p == 1.0 ? Method::simplex : prog.p == 2.0 ? Method::active_set : Method::barrier;
  switch (method) {
    case Method::simplex:
      if (prog.p != 1.0) throw std::invalid_argument("simplex applies to p = 1 only");
      return detail::polished(reduced, detail::simplex(reduced));
    case Method::active_set: {
      if (prog.p != 2.0) throw std::invalid_argument("active-set applies to p = 2 only");
      Solution sol;
      if (detail::active_set(reduced, sol)) return detail::polished(reduced, sol);
      return detail::polished(reduced, detail::barrier(reduced, rel_gap));
    }
    default:
      return detail::polished(reduced, detail::barrier(reduced, rel_gap));
  }
}

}  // namespace tcurve::convex

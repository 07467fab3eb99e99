#pragma once

// Brute-force reference values used to cross-check the solvers.

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace oracle {

/// min sum_x m_x rho_x^p over rho >= 0 with rows * rho >= 1, for n = 2 or 3
/// points. The last coordinate is eliminated exactly (its smallest feasible
/// value); the others are searched on a grid of 1e-3 times the box side
/// over [0, B]^(n-1), B = max_x c (sum m / m_x)^(1/p) with c the constant
/// admissible density, then refined twice around the best cell. After the
/// elimination the objective is convex in the remaining coordinates.
inline double grid_modulus(const Eigen::MatrixXd& rows, const Eigen::VectorXd& m, double p) {
  const Eigen::Index n = m.size();
  if (rows.rows() == 0) return 0.0;
  const double c = 1.0 / rows.rowwise().sum().minCoeff();
  const double total = m.sum();
  Eigen::VectorXd box(n);
  for (Eigen::Index x = 0; x < n; ++x) box(x) = c * std::pow(total / m(x), 1.0 / p) * 1.0001;

  auto value = [&](const double* head) {
    double last = 0.0;
    for (Eigen::Index k = 0; k < rows.rows(); ++k) {
      double acc = 0.0;
      for (Eigen::Index x = 0; x + 1 < n; ++x) acc += rows(k, x) * head[x];
      const double a = rows(k, n - 1);
      if (a > 0.0) last = std::max(last, (1.0 - acc) / a);
      else if (acc < 1.0) return std::numeric_limits<double>::infinity();
    }
    double v = m(n - 1) * std::pow(last, p);
    for (Eigen::Index x = 0; x + 1 < n; ++x) v += m(x) * std::pow(head[x], p);
    return v;
  };

  double best = std::numeric_limits<double>::infinity();
  double at[2] = {0.0, 0.0};
  auto scan = [&](const double* lo, const double* hi, double step) {
    double cur[2] = {0.0, 0.0};
    for (cur[0] = lo[0]; cur[0] <= hi[0] + 1e-15; cur[0] += step) {
      if (n == 2) {
        const double v = value(cur);
        if (v < best) best = v, at[0] = cur[0];
        continue;
      }
      for (cur[1] = lo[1]; cur[1] <= hi[1] + 1e-15; cur[1] += step) {
        const double v = value(cur);
        if (v < best) best = v, at[0] = cur[0], at[1] = cur[1];
      }
    }
  };

  const double side = box.head(n - 1).maxCoeff();
  const double h = 1e-3 * side;
  double lo[2] = {0.0, 0.0}, hi[2] = {side, n == 3 ? side : 0.0};
  scan(lo, hi, h);
  for (double step : {h / 100, h / 10000}) {
    const double w = step * 200;
    for (int d = 0; d + 1 < n; ++d) {
      lo[d] = std::max(0.0, at[d] - w);
      hi[d] = at[d] + w;
    }
    scan(lo, hi, step);
  }
  return best;
}

}  // namespace oracle

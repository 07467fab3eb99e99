#pragma once

#include <random>
#include <vector>

#include "tcurve/tcurve.hpp"

namespace support {

using namespace tcurve;

inline Space two_points(double d = 1.0, double mx = 1.0, double my = 1.0) {
  Eigen::MatrixXd m(2, 2);
  m << 0, d, d, 0;
  return Space(m, Eigen::Vector2d(mx, my));
}

inline Space from_table(std::vector<std::vector<double>> rows, std::vector<double> w) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd d(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) d(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return Space(d, Eigen::Map<Eigen::VectorXd>(w.data(), n));
}

/// Step curve on [0,1] with `jumps` distinct dyadic jump times of depth `depth`.
inline TestCurve random_step_curve(std::mt19937_64& rng, std::size_t n, unsigned jumps, unsigned depth = 6) {
  const std::size_t cells = std::size_t{1} << depth;
  std::vector<std::size_t> ks;
  while (ks.size() < jumps) {
    const auto k = 1 + uniform_index(rng, cells - 1);
    if (std::find(ks.begin(), ks.end(), k) == ks.end()) ks.push_back(k);
  }
  std::sort(ks.begin(), ks.end());
  std::vector<double> starts{0.0};
  for (auto k : ks) starts.push_back(std::ldexp(static_cast<double>(k), -static_cast<int>(depth)));
  std::vector<std::size_t> pts{uniform_index(rng, n)};
  for (unsigned j = 0; j < jumps; ++j) {
    auto next = uniform_index(rng, n - 1);
    if (next >= pts.back()) ++next;
    pts.push_back(next);
  }
  return TestCurve::steps({0.0, 1.0}, starts, pts);
}

/// Continuous polyline on `dom` through `verts` random points of the unit square at dyadic times.
inline TestCurve random_polyline(std::mt19937_64& rng, std::size_t verts, Interval dom = {0.0, 1.0}, unsigned depth = 5) {
  const std::size_t cells = std::size_t{1} << depth;
  std::vector<std::size_t> ks{0, cells};
  while (ks.size() < verts) {
    const auto k = 1 + uniform_index(rng, cells - 1);
    if (std::find(ks.begin(), ks.end(), k) == ks.end()) ks.push_back(k);
  }
  std::sort(ks.begin(), ks.end());
  std::vector<double> times;
  std::vector<Eigen::VectorXd> vs;
  for (auto k : ks) {
    times.push_back(dom.lo + dom.length() * std::ldexp(static_cast<double>(k), -static_cast<int>(depth)));
    vs.push_back(Eigen::Vector2d(unit_uniform(rng), unit_uniform(rng)));
  }
  times.front() = dom.lo;
  times.back() = dom.hi;
  return TestCurve::polyline(dom, std::move(times), std::move(vs));
}

/// Embedded space of `k` random points (for polyline curves).
inline Space random_embedded(std::mt19937_64& rng, std::size_t k) { return random_space(rng, k); }

inline ScalarFunction random_table(std::mt19937_64& rng, std::size_t n, double lo = 0.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = uniform(rng, lo, hi);
  return ScalarFunction(std::move(v));
}

}  // namespace support

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>

#include "tcurve/extended.hpp"

namespace tcurve {

/// Finite metric measure space (X, d, m): a distance matrix, a positive
/// weight per point and an optional Euclidean embedding. Points are indices
/// 0..n-1. The constructor stores data as given; use validate_space() or
/// checked() to enforce the metric invariants.
class FiniteMetricMeasureSpace {
 public:
  FiniteMetricMeasureSpace(Eigen::MatrixXd dist, Eigen::VectorXd weight,
                           std::optional<Eigen::MatrixXd> coords = std::nullopt)
      : dist_(std::move(dist)), weight_(std::move(weight)), coords_(std::move(coords)) {}

  /// Space with Euclidean distances between the rows of `coords`.
  static FiniteMetricMeasureSpace from_points(const Eigen::MatrixXd& coords,
                                              Eigen::VectorXd weight) {
    const auto n = coords.rows();
    Eigen::MatrixXd d(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) d(i, j) = (coords.row(i) - coords.row(j)).norm();
    return {std::move(d), std::move(weight), coords};
  }

  std::size_t size() const { return static_cast<std::size_t>(weight_.size()); }
  double distance(std::size_t i, std::size_t j) const {
    return dist_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  double weight(std::size_t i) const { return weight_(static_cast<Eigen::Index>(i)); }
  const Eigen::MatrixXd& dist() const { return dist_; }
  const Eigen::VectorXd& weights() const { return weight_; }
  bool embedded() const { return coords_.has_value(); }
  const std::optional<Eigen::MatrixXd>& coords() const { return coords_; }
  std::size_t dimension() const { return coords_ ? static_cast<std::size_t>(coords_->cols()) : 0; }

  Eigen::VectorXd point(std::size_t i) const {
    if (!coords_) throw std::invalid_argument("space has no Euclidean embedding");
    return coords_->row(static_cast<Eigen::Index>(i)).transpose();
  }

  /// Same space with every distance multiplied by `factor` (coords scaled too).
  FiniteMetricMeasureSpace scaled(double factor) const {
    std::optional<Eigen::MatrixXd> c;
    if (coords_) c = *coords_ * factor;
    return {dist_ * factor, weight_, std::move(c)};
  }

 private:
  Eigen::MatrixXd dist_;
  Eigen::VectorXd weight_;
  std::optional<Eigen::MatrixXd> coords_;
};

using Space = FiniteMetricMeasureSpace;

/// Table of (extended) real values, one per point of a space.
class ScalarFunction {
 public:
  ScalarFunction() = default;
  explicit ScalarFunction(std::vector<double> values) : values_(std::move(values)) {}
  ScalarFunction(std::initializer_list<double> values) : values_(values) {}

  static ScalarFunction constant(std::size_t n, double v) { return ScalarFunction(std::vector<double>(n, v)); }

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const { return values_; }

  ScalarFunction scaled(double c) const {
    std::vector<double> out(values_.size());
    for (std::size_t i = 0; i < values_.size(); ++i) out[i] = mul0(c, values_[i]);
    return ScalarFunction(std::move(out));
  }

  bool nonnegative() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return v >= 0.0; });
  }
  bool finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
  }

  friend bool operator==(const ScalarFunction&, const ScalarFunction&) = default;

 private:
  std::vector<double> values_;
};

inline void require_same_size(const ScalarFunction& f, const Space& s, const char* what) {
  if (f.size() != s.size())
    throw InputError(std::string(what) + ": table length " + std::to_string(f.size()) +
                     " does not match space size " + std::to_string(s.size()));
}

// ---------------------------------------------------------------------------
// validation

struct SpaceViolation {
  std::string invariant;             ///< "shape", "diagonal", "symmetry", ...
  std::vector<std::size_t> indices;  ///< offending point indices
  std::string message;
};

/// ok() when every invariant holds; otherwise the first violation found.
struct SpaceReport {
  std::optional<SpaceViolation> violation;
  bool ok() const { return !violation.has_value(); }
};

enum class TriangleCheck {
  automatic,  ///< exact for bare distance tables, tolerant for embedded spaces
  exact,      ///< exact rational arithmetic on the stored binary values
  tolerant,   ///< float64 with 1e-12 relative slack
};

namespace detail {

using Rational = boost::multiprecision::cpp_rational;

/// Exact value of a finite double as a rational.
inline Rational exact_rational(double v) {
  int exp = 0;
  const double mant = std::frexp(v, &exp);
  // 53 significant bits fit in int64 after scaling.
  const auto scaled = static_cast<std::int64_t>(std::ldexp(mant, 53));
  exp -= 53;
  Rational r(scaled);
  boost::multiprecision::cpp_int pow2 = 1;
  pow2 <<= std::abs(exp);
  if (exp >= 0) return r * Rational(pow2);
  return r / Rational(pow2);
}

inline SpaceReport fail(std::string inv, std::vector<std::size_t> idx, std::string msg) {
  return SpaceReport{SpaceViolation{std::move(inv), std::move(idx), std::move(msg)}};
}

}  // namespace detail

inline SpaceReport validate_space(const Space& s, TriangleCheck mode = TriangleCheck::automatic) {
  const auto n = s.size();
  const auto& d = s.dist();
  if (n == 0) return detail::fail("shape", {}, "space has no points");
  if (static_cast<std::size_t>(d.rows()) != n || static_cast<std::size_t>(d.cols()) != n)
    return detail::fail("shape", {}, "distance matrix is not n x n");
  if (s.coords() && static_cast<std::size_t>(s.coords()->rows()) != n)
    return detail::fail("shape", {}, "coords must have one row per point");

  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(s.weight(i)) || s.weight(i) <= 0.0)
      return detail::fail("weight", {i}, "weight must be positive and finite");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (s.distance(i, i) != 0.0) return detail::fail("diagonal", {i, i}, "dist[i][i] must be 0");
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      if (s.distance(i, j) != s.distance(j, i))
        return detail::fail("symmetry", {i, j}, "dist is not symmetric");
    }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (!std::isfinite(s.distance(i, j)) || s.distance(i, j) <= 0.0)
        return detail::fail("positivity", {i, j}, "distinct points must be at positive finite distance");
    }

  const bool exact = mode == TriangleCheck::exact || (mode == TriangleCheck::automatic && !s.embedded());
  if (exact) {
    std::vector<detail::Rational> q(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) q[i * n + j] = detail::exact_rational(s.distance(i, j));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k)
          if (q[i * n + k] > q[i * n + j] + q[j * n + k])
            return detail::fail("triangle", {i, j, k}, "dist[i][k] > dist[i][j] + dist[j][k]");
  } else {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) {
          const double rhs = s.distance(i, j) + s.distance(j, k);
          if (s.distance(i, k) > rhs * (1.0 + 1e-12))
            return detail::fail("triangle", {i, j, k}, "dist[i][k] > dist[i][j] + dist[j][k]");
        }
  }

  if (s.coords()) {
    const auto& c = *s.coords();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double e = (c.row(static_cast<Eigen::Index>(i)) - c.row(static_cast<Eigen::Index>(j))).norm();
        if (std::fabs(e - s.distance(i, j)) > 1e-12 * std::max(1.0, e))
          return detail::fail("embedding", {i, j}, "dist disagrees with Euclidean distance of coords");
      }
  }
  return {};
}

inline std::string describe(const SpaceViolation& v) {
  std::ostringstream os;
  os << v.invariant << " violated at (";
  for (std::size_t i = 0; i < v.indices.size(); ++i) os << (i ? "," : "") << v.indices[i];
  os << "): " << v.message;
  return os.str();
}

/// Returns `s` unchanged, or throws InputError describing the first violation.
inline const Space& checked(const Space& s) {
  const auto r = validate_space(s);
  if (!r.ok()) throw InputError(describe(*r.violation));
  return s;
}

// ---------------------------------------------------------------------------

/// (sum_x m(x) |f(x)|^p)^(1/p); +inf entries propagate.
inline double lp_norm(const ScalarFunction& f, const Space& s, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must be >= 1");
  require_same_size(f, s, "lp_norm");
  double acc = 0.0;
  for (std::size_t x = 0; x < f.size(); ++x) {
    const double v = std::fabs(f[x]);
    if (std::isinf(v)) return kInf;
    acc += s.weight(x) * std::pow(v, p);
  }
  return std::pow(acc, 1.0 / p);
}

/// sum_x m(x) |f(x)|^p.
inline double lp_norm_pow(const ScalarFunction& f, const Space& s, double p) {
  const double n = lp_norm(f, s, p);
  return std::isinf(n) ? kInf : std::pow(n, p);
}

// ---------------------------------------------------------------------------
// random spaces

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit draw, so
/// sequences are identical across standard libraries.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * unit_uniform(rng); }

inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(unit_uniform(rng) * static_cast<double>(n)) % n;
}

/// k points uniform in the unit square, Euclidean distances, weights uniform in [0.5, 2].
inline Space random_space(std::mt19937_64& rng, std::size_t k) {
  for (;;) {
    Eigen::MatrixXd pts(static_cast<Eigen::Index>(k), 2);
    Eigen::VectorXd w(static_cast<Eigen::Index>(k));
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
      pts(i, 0) = unit_uniform(rng);
      pts(i, 1) = unit_uniform(rng);
      w(i) = uniform(rng, 0.5, 2.0);
    }
    Space s = Space::from_points(pts, w);
    if (validate_space(s).ok()) return s;  // redraw on coincident points
  }
}

}  // namespace tcurve

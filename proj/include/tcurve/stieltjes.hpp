#pragma once

#include <cmath>
#include <concepts>
#include <functional>
#include <span>
#include <stdexcept>
#include <type_traits>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>

#include "tcurve/curve.hpp"
#include "tcurve/extended.hpp"
#include "tcurve/space.hpp"

namespace tcurve {

/// Anything that can be evaluated at a curve value.
template <class F>
concept Integrand = std::is_invocable_r_v<double, const F&, const Location&>;

/// A ScalarFunction read at point indices. Off-grid locations (polyline
/// interiors) have no table value and raise.
class TableIntegrand {
 public:
  explicit TableIntegrand(const ScalarFunction& f) : f_(&f) {}
  double operator()(const Location& x) const {
    if (!x.on_grid()) throw std::invalid_argument("table function evaluated off the point set");
    return (*f_)[x.index];
  }

 private:
  const ScalarFunction* f_;
};

inline TableIntegrand table(const ScalarFunction& f) { return TableIntegrand(f); }

/// A function of ambient coordinates, evaluated at points via the embedding.
template <class Fn>
class CoordinateIntegrand {
 public:
  CoordinateIntegrand(const Space& s, Fn fn) : s_(&s), fn_(std::move(fn)) {}
  double operator()(const Location& x) const { return fn_(coordinates(*s_, x)); }

 private:
  const Space* s_;
  Fn fn_;
};

template <class Fn>
CoordinateIntegrand<Fn> coordinate(const Space& s, Fn fn) {
  return CoordinateIntegrand<Fn>(s, std::move(fn));
}

// ---------------------------------------------------------------------------
// quadrature

namespace detail {

inline constexpr double kQuadratureTolerance = 1e-12;

template <class G>
double gauss10(const G& g, double a, double b) {
  return boost::math::quadrature::gauss<double, 10>::integrate(g, a, b);
}

/// Adaptive composite Gauss-Legendre on [a,b]: bisect until the one-panel and
/// two-panel estimates agree to `tol`. Fixed bisection rule, so deterministic.
template <class G>
double adaptive_gauss(const G& g, double a, double b, double whole, double tol, int depth) {
  const double mid = 0.5 * (a + b);
  const double left = gauss10(g, a, mid);
  const double right = gauss10(g, mid, b);
  const double both = left + right;
  if (!std::isfinite(both)) return both;
  if (depth <= 0 || std::fabs(both - whole) <= tol) return both;
  return adaptive_gauss(g, a, mid, left, 0.5 * tol, depth - 1) + adaptive_gauss(g, mid, b, right, 0.5 * tol, depth - 1);
}

/// Integral of f over the segment from p0 to p1 with respect to arc length.
template <Integrand F>
double segment_integral(const F& f, const Eigen::VectorXd& p0, const Eigen::VectorXd& p1) {
  const double len = (p1 - p0).norm();
  if (len == 0.0) return 0.0;
  const Eigen::VectorXd dir = p1 - p0;
  auto g = [&](double u) { return f(Location::at(Eigen::VectorXd(p0 + u * dir))); };
  const double whole = gauss10(g, 0.0, 1.0);
  return len * adaptive_gauss(g, 0.0, 1.0, whole, kQuadratureTolerance / len, 30);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// the Lebesgue-Stieltjes measure of V_gamma

/// mu_gamma on [a,b]: atoms at jump times plus constant-speed density on
/// polyline segments.
struct CurveMeasure {
  struct Atom {
    double time;
    double mass;
  };
  struct Density {
    double from;
    double to;
    double speed;
  };

  Interval domain;
  std::vector<Atom> atoms;
  std::vector<Density> density;

  double total_mass() const {
    double m = 0.0;
    for (const auto& a : atoms) m += a.mass;
    for (const auto& d : density) m += d.speed * (d.to - d.from);
    return m;
  }

  /// mu((r, t]).
  double half_open(double r, double t) const {
    double m = 0.0;
    for (const auto& a : atoms)
      if (a.time > r && a.time <= t) m += a.mass;
    for (const auto& d : density) {
      const double lo = std::max(d.from, r), hi = std::min(d.to, t);
      if (hi > lo) m += d.speed * (hi - lo);
    }
    return m;
  }
};

inline CurveMeasure curve_measure(const Space& s, const TestCurve& c) {
  require_compatible(s, c);
  CurveMeasure mu{c.domain(), {}, {}};
  for (const auto& [t, size] : jumps(s, c)) mu.atoms.push_back({t, size});
  for (const auto& p : c.pieces()) {
    if (const auto* pl = std::get_if<PolylinePiece>(&p)) {
      for (std::size_t k = 1; k < pl->times.size(); ++k) {
        const double len = (pl->vertices[k] - pl->vertices[k - 1]).norm();
        if (len > 0.0) mu.density.push_back({pl->times[k - 1], pl->times[k], len / (pl->times[k] - pl->times[k - 1])});
      }
    }
  }
  return mu;
}

/// int_gamma f = int_[a,b] f(gamma) d mu_gamma. Atoms are summed exactly
/// (0 * inf = 0); polyline segments use adaptive Gauss-Legendre.
template <Integrand F>
double integrate(const Space& s, const TestCurve& c, const F& f) {
  require_compatible(s, c);
  double acc = 0.0;
  for (const auto& [t, size] : jumps(s, c)) acc += mul0(f(eval(c, t)), size);
  for (const auto& p : c.pieces()) {
    if (const auto* pl = std::get_if<PolylinePiece>(&p)) {
      for (std::size_t k = 1; k < pl->times.size(); ++k) acc += detail::segment_integral(f, pl->vertices[k - 1], pl->vertices[k]);
    }
  }
  return acc;
}

/// (int_gamma f + int_reverse(gamma) f) / 2.
template <Integrand F>
double sym_integrate(const Space& s, const TestCurve& c, const F& f) {
  return 0.5 * (integrate(s, c, f) + integrate(s, reverse(c), f));
}

inline double integrate(const Space& s, const TestCurve& c, const ScalarFunction& f) {
  require_same_size(f, s, "integrate");
  return integrate(s, c, table(f));
}

inline double sym_integrate(const Space& s, const TestCurve& c, const ScalarFunction& f) {
  require_same_size(f, s, "sym_integrate");
  return sym_integrate(s, c, table(f));
}

/// Symmetrized integral of a table along a step curve in exact rational
/// arithmetic on the stored binary values of d and f (f must be finite).
inline detail::Rational sym_integrate_exact(const Space& s, const TestCurve& c, const ScalarFunction& f) {
  require_compatible(s, c);
  require_same_size(f, s, "sym_integrate_exact");
  if (!c.is_step()) throw std::invalid_argument("sym_integrate_exact: step curves only");
  auto one_way = [&](const TestCurve& g) {
    detail::Rational acc = 0;
    for (double t : g.boundaries()) {
      const auto x = eval_left(g, t).index, y = eval(g, t).index;
      acc += detail::exact_rational(f[y]) * detail::exact_rational(s.distance(x, y));
    }
    return acc;
  };
  return (one_way(c) + one_way(reverse(c))) / 2;
}

// ---------------------------------------------------------------------------
// the symmetrized pushforward measure on X

/// Measure on the space: atoms on points, atoms at off-grid coordinates (from
/// jumps touching polyline endpoints) and arc-length measure on segments.
struct PointMeasure {
  struct CoordAtom {
    Eigen::VectorXd at;
    double mass;
  };
  struct LineMass {
    Eigen::VectorXd from;
    Eigen::VectorXd to;
    double mass;  ///< equals the segment length
  };

  std::vector<double> atoms;
  std::vector<CoordAtom> coord_atoms;
  std::vector<LineMass> lines;

  double total_mass() const {
    double m = 0.0;
    for (double a : atoms) m += a;
    for (const auto& a : coord_atoms) m += a.mass;
    for (const auto& l : lines) m += l.mass;
    return m;
  }

  bool atomic_only() const { return coord_atoms.empty() && lines.empty(); }

  template <Integrand F>
  double integrate(const F& g) const {
    double acc = 0.0;
    for (std::size_t x = 0; x < atoms.size(); ++x) acc += mul0(g(Location::at(x)), atoms[x]);
    for (const auto& a : coord_atoms) acc += mul0(g(Location::at(a.at)), a.mass);
    for (const auto& l : lines) acc += detail::segment_integral(g, l.from, l.to);
    return acc;
  }

  double integrate(const ScalarFunction& g) const {
    if (!(coord_atoms.empty() && lines.empty())) throw std::invalid_argument("table integral needs an atomic measure");
    return integrate(table(g));
  }
};

/// mu^S_gamma = (gamma_# mu_gamma + reverse(gamma)_# mu_reverse(gamma)) / 2.
/// Each jump puts half its size on gamma(t-) and half on gamma(t); polyline
/// segments carry their arc length.
inline PointMeasure sym_measure(const Space& s, const TestCurve& c) {
  require_compatible(s, c);
  PointMeasure mu;
  mu.atoms.assign(s.size(), 0.0);
  auto charge = [&](const Location& x, double m) {
    if (x.on_grid()) mu.atoms[x.index] += m;
    else mu.coord_atoms.push_back({x.coords, m});
  };
  for (const auto& [t, size] : jumps(s, c)) {
    charge(eval_left(c, t), 0.5 * size);
    charge(eval(c, t), 0.5 * size);
  }
  for (const auto& p : c.pieces()) {
    if (const auto* pl = std::get_if<PolylinePiece>(&p)) {
      for (std::size_t k = 1; k < pl->times.size(); ++k) {
        const double len = (pl->vertices[k] - pl->vertices[k - 1]).norm();
        if (len > 0.0) mu.lines.push_back({pl->vertices[k - 1], pl->vertices[k], len});
      }
    }
  }
  return mu;
}

// ---------------------------------------------------------------------------
// interval identities

struct Decomposition {
  double left = 0.0;    ///< over gamma|[a, t-]
  double bridge = 0.0;  ///< (f(gamma(t)) + f(gamma(t-))) / 2 * jump at t
  double right = 0.0;   ///< over gamma|[t, b]
  double total() const { return left + bridge + right; }
};

template <Integrand F>
Decomposition decompose_at(const Space& s, const TestCurve& c, double t, const F& f) {
  const auto d = c.domain();
  if (!(d.lo < t && t < d.hi)) throw std::invalid_argument("decompose_at: t must be interior");
  const Location before = eval_left(c, t), at = eval(c, t);
  Decomposition out;
  out.left = sym_integrate(s, left_adjusted_restrict(c, d.lo, t), f);
  out.bridge = 0.5 * mul0(f(at) + f(before), distance(s, before, at));
  out.right = sym_integrate(s, left_adjusted_restrict(c, t, d.hi), f);
  return out;
}

/// sum_i d(gamma(t_i), gamma(t_{i-1})) f(gamma(t_i)).
template <Integrand F>
double riemann_approx(const Space& s, const TestCurve& c, const F& f, const Partition& part) {
  if (part.lo() != c.domain().lo || part.hi() != c.domain().hi)
    throw std::invalid_argument("riemann_approx: partition does not span the curve domain");
  double acc = 0.0;
  Location prev = eval(c, part.times().front());
  for (std::size_t i = 1; i < part.times().size(); ++i) {
    Location cur = eval(c, part.times()[i]);
    acc += mul0(distance(s, prev, cur), f(cur));
    prev = std::move(cur);
  }
  return acc;
}

enum class Side { left, right };

struct TailResult {
  bool vanished = false;
  std::vector<double> values;
};

/// Along r_n -> t from `side`, evaluates the symmetrized integral over
/// gamma|[r_n, t-] (left) or over gamma|[t, r_n-] plus the jump term at r_n
/// (right). `vanished` iff the last value is below `threshold`.
template <Integrand F>
TailResult tail_vanishes(const Space& s, const TestCurve& c, const F& f, double t, Side side,
                         std::span<const double> r, double threshold = 1e-9) {
  const auto d = c.domain();
  if (r.empty()) throw std::invalid_argument("tail_vanishes: empty sequence");
  if (!std::isfinite(sym_integrate(s, c, f))) throw std::invalid_argument("tail_vanishes: integral along the curve is infinite");
  for (std::size_t i = 0; i < r.size(); ++i) {
    const bool toward = side == Side::left ? (r[i] < t && r[i] >= d.lo && (i == 0 || r[i] > r[i - 1]))
                                           : (r[i] > t && r[i] <= d.hi && (i == 0 || r[i] < r[i - 1]));
    if (!toward) throw std::invalid_argument("tail_vanishes: sequence is not strictly monotone toward t");
  }
  if (side == Side::left && !(d.lo < t && t <= d.hi)) throw std::invalid_argument("tail_vanishes: need t in (a,b]");
  if (side == Side::right && !(d.lo <= t && t < d.hi)) throw std::invalid_argument("tail_vanishes: need t in [a,b)");

  TailResult out;
  for (double rn : r) {
    double v = 0.0;
    if (side == Side::left) {
      v = sym_integrate(s, left_adjusted_restrict(c, rn, t), f);
    } else {
      const Location before = eval_left(c, rn), at = eval(c, rn);
      v = sym_integrate(s, left_adjusted_restrict(c, t, rn), f) + 0.5 * mul0(f(before) + f(at), distance(s, before, at));
    }
    out.values.push_back(v);
  }
  out.vanished = out.values.back() < threshold;
  return out;
}

}  // namespace tcurve

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "tcurve/extended.hpp"
#include "tcurve/space.hpp"

namespace tcurve {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  double length() const { return hi - lo; }
  bool contains(double t) const { return lo <= t && t <= hi; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// A value of a curve: either a point of the space (by index) or, for
/// polyline pieces, a coordinate vector in the ambient R^k.
struct Location {
  std::size_t index = kNoIndex;
  Eigen::VectorXd coords;

  static Location at(std::size_t i) { return Location{i, {}}; }
  static Location at(Eigen::VectorXd x) { return Location{kNoIndex, std::move(x)}; }

  bool on_grid() const { return index != kNoIndex; }

  friend bool operator==(const Location& a, const Location& b) {
    if (a.on_grid() || b.on_grid()) return a.index == b.index;
    return a.coords.size() == b.coords.size() && (a.coords.array() == b.coords.array()).all();
  }
};

inline Eigen::VectorXd coordinates(const Space& s, const Location& x) {
  return x.on_grid() ? s.point(x.index) : x.coords;
}

inline double distance(const Space& s, const Location& x, const Location& y) {
  if (x.on_grid() && y.on_grid()) return s.distance(x.index, y.index);
  return (coordinates(s, x) - coordinates(s, y)).norm();
}

/// Constant value on [start, next start).
struct StepPiece {
  double start = 0.0;
  std::size_t point = 0;

  friend bool operator==(const StepPiece&, const StepPiece&) = default;
};

/// Continuous piecewise-linear piece through `vertices` at strictly
/// increasing `times`; it spans [times.front(), times.back()].
struct PolylinePiece {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> vertices;

  double start() const { return times.front(); }
  double end() const { return times.back(); }

  Eigen::VectorXd at(double t) const {
    auto it = std::upper_bound(times.begin(), times.end(), t);
    if (it == times.begin()) return vertices.front();
    if (it == times.end()) return vertices.back();
    const auto j = static_cast<std::size_t>(it - times.begin());
    const double u = (t - times[j - 1]) / (times[j] - times[j - 1]);
    return vertices[j - 1] + u * (vertices[j] - vertices[j - 1]);
  }

  friend bool operator==(const PolylinePiece& a, const PolylinePiece& b) {
    if (a.times != b.times || a.vertices.size() != b.vertices.size()) return false;
    for (std::size_t i = 0; i < a.vertices.size(); ++i) {
      if (a.vertices[i].size() != b.vertices[i].size()) return false;
      if (!(a.vertices[i].array() == b.vertices[i].array()).all()) return false;
    }
    return true;
  }
};

using Piece = std::variant<StepPiece, PolylinePiece>;

inline double piece_start(const Piece& p) {
  return std::visit([](const auto& q) {
    if constexpr (std::is_same_v<std::decay_t<decltype(q)>, StepPiece>) return q.start;
    else return q.start();
  }, p);
}

/// Test curve: right-continuous, bounded variation, left limits everywhere,
/// left-continuous at the right endpoint. Stored as a finite list of pieces
/// in canonical form (equal adjacent steps merged, stationary interior
/// polyline vertices dropped), so equality of values is equality of curves.
class TestCurve {
 public:
  TestCurve(Interval domain, std::vector<Piece> pieces) : domain_(domain), pieces_(std::move(pieces)) {
    validate();
    canonicalize();
  }

  static TestCurve constant(Interval domain, std::size_t point) { return {domain, {StepPiece{domain.lo, point}}}; }

  /// Step curve taking points[i] on [starts[i], starts[i+1]).
  static TestCurve steps(Interval domain, const std::vector<double>& starts, const std::vector<std::size_t>& points) {
    if (starts.size() != points.size()) throw InputError("steps: starts and points differ in length");
    std::vector<Piece> pieces;
    for (std::size_t i = 0; i < starts.size(); ++i) pieces.emplace_back(StepPiece{starts[i], points[i]});
    return {domain, std::move(pieces)};
  }

  /// x on [lo, mid), y on [mid, hi].
  static TestCurve two_point(std::size_t x, std::size_t y, Interval domain = {0.0, 1.0}) {
    return steps(domain, {domain.lo, 0.5 * (domain.lo + domain.hi)}, {x, y});
  }

  static TestCurve polyline(Interval domain, std::vector<double> times, std::vector<Eigen::VectorXd> vertices) {
    return {domain, {PolylinePiece{std::move(times), std::move(vertices)}}};
  }

  const Interval& domain() const { return domain_; }
  const std::vector<Piece>& pieces() const { return pieces_; }
  std::size_t piece_count() const { return pieces_.size(); }

  double start(std::size_t i) const { return piece_start(pieces_[i]); }
  double span_end(std::size_t i) const { return i + 1 < pieces_.size() ? start(i + 1) : domain_.hi; }

  bool is_step() const {
    return std::all_of(pieces_.begin(), pieces_.end(), [](const Piece& p) { return std::holds_alternative<StepPiece>(p); });
  }

  /// Index of the piece whose span [start, next start) contains t.
  std::size_t piece_at(double t) const {
    std::size_t lo = 0, hi = pieces_.size();
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      if (start(mid) <= t) lo = mid;
      else hi = mid;
    }
    return lo;
  }

  /// Times in (lo, hi) where a new piece begins; the only candidates for jumps.
  std::vector<double> boundaries() const {
    std::vector<double> out;
    for (std::size_t i = 1; i < pieces_.size(); ++i) out.push_back(start(i));
    return out;
  }

  /// Point indices visited, in order (step curves only).
  std::vector<std::size_t> step_points() const {
    std::vector<std::size_t> out;
    for (const auto& p : pieces_) {
      const auto* st = std::get_if<StepPiece>(&p);
      if (!st) throw std::invalid_argument("step_points: curve has a polyline piece");
      out.push_back(st->point);
    }
    return out;
  }

  friend bool operator==(const TestCurve&, const TestCurve&) = default;

 private:
  void validate() const {
    if (!(std::isfinite(domain_.lo) && std::isfinite(domain_.hi) && domain_.lo < domain_.hi))
      throw InputError("curve domain must be a finite interval [a,b] with a < b");
    if (pieces_.empty()) throw InputError("curve needs at least one piece");
    if (start(0) != domain_.lo) throw InputError("first piece must start at the domain's left endpoint");
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      const double s = start(i);
      if (!(s < domain_.hi)) throw InputError("piece starts must lie in [a,b)");
      if (i > 0 && !(start(i - 1) < s)) throw InputError("piece starts must be strictly increasing");
      if (const auto* pl = std::get_if<PolylinePiece>(&pieces_[i])) {
        if (pl->times.size() < 2 || pl->times.size() != pl->vertices.size())
          throw InputError("polyline needs >= 2 vertices with one time each");
        for (std::size_t j = 1; j < pl->times.size(); ++j)
          if (!(pl->times[j - 1] < pl->times[j])) throw InputError("polyline times must be strictly increasing");
        for (const auto& v : pl->vertices)
          if (v.size() != pl->vertices.front().size() || v.size() == 0)
            throw InputError("polyline vertices must share a positive dimension");
        if (pl->end() != span_end(i))
          throw InputError("polyline must end where the next piece starts (or at b)");
      }
    }
  }

  void canonicalize() {
    std::vector<Piece> out;
    for (auto& p : pieces_) {
      if (auto* pl = std::get_if<PolylinePiece>(&p)) {
        PolylinePiece q;
        const auto m = pl->times.size();
        for (std::size_t j = 0; j < m; ++j) {
          const bool interior = j > 0 && j + 1 < m;
          if (interior && (pl->vertices[j].array() == q.vertices.back().array()).all() &&
              (pl->vertices[j].array() == pl->vertices[j + 1].array()).all())
            continue;
          q.times.push_back(pl->times[j]);
          q.vertices.push_back(std::move(pl->vertices[j]));
        }
        out.emplace_back(std::move(q));
        continue;
      }
      const auto& st = std::get<StepPiece>(p);
      if (!out.empty()) {
        if (const auto* prev = std::get_if<StepPiece>(&out.back()); prev && prev->point == st.point) continue;
      }
      out.emplace_back(st);
    }
    pieces_ = std::move(out);
  }

  Interval domain_;
  std::vector<Piece> pieces_;
};

inline void require_compatible(const Space& s, const TestCurve& c) {
  for (const auto& p : c.pieces()) {
    if (const auto* st = std::get_if<StepPiece>(&p)) {
      if (st->point >= s.size()) throw InputError("curve references point " + std::to_string(st->point) + " outside the space");
    } else {
      const auto& pl = std::get<PolylinePiece>(p);
      if (!s.embedded()) throw InputError("polyline curves need a space with a Euclidean embedding");
      if (static_cast<std::size_t>(pl.vertices.front().size()) != s.dimension())
        throw InputError("polyline dimension differs from the space embedding");
    }
  }
}

// ---------------------------------------------------------------------------
// evaluation

namespace detail {

inline Location piece_value(const Piece& p, double t) {
  if (const auto* st = std::get_if<StepPiece>(&p)) return Location::at(st->point);
  return Location::at(std::get<PolylinePiece>(p).at(t));
}

inline Location piece_first(const Piece& p) {
  if (const auto* st = std::get_if<StepPiece>(&p)) return Location::at(st->point);
  return Location::at(std::get<PolylinePiece>(p).vertices.front());
}

inline Location piece_last(const Piece& p) {
  if (const auto* st = std::get_if<StepPiece>(&p)) return Location::at(st->point);
  return Location::at(std::get<PolylinePiece>(p).vertices.back());
}

}  // namespace detail

/// gamma(t), t in [a,b].
inline Location eval(const TestCurve& c, double t) {
  if (!c.domain().contains(t)) throw std::out_of_range("eval: time outside the curve domain");
  const auto i = c.piece_at(t);
  return detail::piece_value(c.pieces()[i], t);
}

/// gamma(t-), t in (a,b].
inline Location eval_left(const TestCurve& c, double t) {
  if (!(c.domain().lo < t && t <= c.domain().hi)) throw std::out_of_range("eval_left: time outside (a,b]");
  const auto i = c.piece_at(t);
  if (i > 0 && c.start(i) == t) return detail::piece_last(c.pieces()[i - 1]);
  return detail::piece_value(c.pieces()[i], t);
}

/// d(gamma(t-), gamma(t)) for t in (a,b]; zero off piece boundaries.
inline double jump(const Space& s, const TestCurve& c, double t) {
  return distance(s, eval_left(c, t), eval(c, t));
}

/// Jump times with positive jump size, in increasing order.
inline std::vector<std::pair<double, double>> jumps(const Space& s, const TestCurve& c) {
  std::vector<std::pair<double, double>> out;
  for (double t : c.boundaries()) {
    const double j = jump(s, c, t);
    if (j > 0.0) out.emplace_back(t, j);
  }
  return out;
}

inline bool is_continuous(const Space& s, const TestCurve& c) { return jumps(s, c).empty(); }

// ---------------------------------------------------------------------------
// partitions and variation

/// a = t_0 < ... < t_n = b.
class Partition {
 public:
  explicit Partition(std::vector<double> times) : times_(std::move(times)) {
    if (times_.size() < 2) throw std::invalid_argument("partition needs at least two points");
    for (std::size_t i = 1; i < times_.size(); ++i)
      if (!(times_[i - 1] < times_[i])) throw std::invalid_argument("partition times must be strictly increasing");
  }

  const std::vector<double>& times() const { return times_; }
  double lo() const { return times_.front(); }
  double hi() const { return times_.back(); }

  double diameter() const {
    double d = 0.0;
    for (std::size_t i = 1; i < times_.size(); ++i) d = std::max(d, times_[i] - times_[i - 1]);
    return d;
  }

  /// Union of both partitions' points (same endpoints required).
  Partition refine(const Partition& other) const {
    std::vector<double> t;
    std::set_union(times_.begin(), times_.end(), other.times_.begin(), other.times_.end(), std::back_inserter(t));
    return Partition(std::move(t));
  }

 private:
  std::vector<double> times_;
};

/// 2^k equal cells; the endpoints are pinned exactly.
inline Partition dyadic_partition(Interval d, unsigned k) {
  const std::size_t cells = std::size_t{1} << k;
  std::vector<double> t(cells + 1);
  for (std::size_t i = 0; i <= cells; ++i) t[i] = d.lo + d.length() * std::ldexp(static_cast<double>(i), -static_cast<int>(k));
  t.front() = d.lo;
  t.back() = d.hi;
  return Partition(std::move(t));
}

/// sum_i d(gamma(t_i), gamma(t_{i-1})).
inline double delta_variation(const Space& s, const TestCurve& c, const Partition& part) {
  if (part.lo() != c.domain().lo || part.hi() != c.domain().hi)
    throw std::invalid_argument("delta_variation: partition does not span the curve domain");
  double acc = 0.0;
  Location prev = eval(c, part.times().front());
  for (std::size_t i = 1; i < part.times().size(); ++i) {
    Location cur = eval(c, part.times()[i]);
    acc += distance(s, prev, cur);
    prev = std::move(cur);
  }
  return acc;
}

/// V_gamma(t) = V(gamma|[a,t]) as a piecewise-linear nondecreasing function
/// with jumps. Knots carry the left limit and the (right-continuous) value;
/// between consecutive knots V is linear.
class VariationFunction {
 public:
  struct Knot {
    double time;
    double left;   ///< V(t-)
    double value;  ///< V(t)
  };

  VariationFunction(const Space& s, const TestCurve& c) : domain_(c.domain()) {
    require_compatible(s, c);
    double acc = 0.0;
    const auto& pcs = c.pieces();
    for (std::size_t i = 0; i < pcs.size(); ++i) {
      if (i == 0) {
        push(c.start(0), 0.0, 0.0);
      } else {
        const double j = distance(s, detail::piece_last(pcs[i - 1]), detail::piece_first(pcs[i]));
        push(c.start(i), acc, acc + j);
        acc += j;
      }
      if (const auto* pl = std::get_if<PolylinePiece>(&pcs[i])) {
        for (std::size_t k = 1; k < pl->times.size(); ++k) {
          acc += (pl->vertices[k] - pl->vertices[k - 1]).norm();
          push(pl->times[k], acc, acc);
        }
      }
    }
    if (knots_.back().time < domain_.hi) push(domain_.hi, acc, acc);
  }

  double operator()(double t) const { return evaluate(t, false); }
  double left_limit(double t) const { return evaluate(t, true); }
  double total() const { return knots_.back().value; }
  const Interval& domain() const { return domain_; }
  const std::vector<Knot>& knots() const { return knots_; }

  /// (time, size) of every discontinuity.
  std::vector<std::pair<double, double>> jumps() const {
    std::vector<std::pair<double, double>> out;
    for (const auto& k : knots_)
      if (k.value > k.left) out.emplace_back(k.time, k.value - k.left);
    return out;
  }

 private:
  void push(double t, double left, double value) {
    if (!knots_.empty() && knots_.back().time == t) {
      knots_.back().value = value;
      return;
    }
    knots_.push_back({t, left, value});
  }

  double evaluate(double t, bool left) const {
    if (!domain_.contains(t)) throw std::out_of_range("variation function: time outside the domain");
    auto it = std::upper_bound(knots_.begin(), knots_.end(), t, [](double v, const Knot& k) { return v < k.time; });
    const auto& k0 = *(it - 1);
    if (k0.time == t) return left && t > domain_.lo ? k0.left : k0.value;
    const auto& k1 = *it;
    const double u = (t - k0.time) / (k1.time - k0.time);
    return k0.value + u * (k1.left - k0.value);
  }

  Interval domain_;
  std::vector<Knot> knots_;
};

inline VariationFunction variation_function(const Space& s, const TestCurve& c) { return {s, c}; }

/// Exact V(gamma): step-jump distances plus polyline segment lengths.
inline double variation(const Space& s, const TestCurve& c) { return variation_function(s, c).total(); }

/// Largest distance between any two values of the curve.
inline double image_diameter(const Space& s, const TestCurve& c) {
  std::vector<Location> keys;
  for (const auto& p : c.pieces()) {
    if (const auto* st = std::get_if<StepPiece>(&p)) keys.push_back(Location::at(st->point));
    else for (const auto& v : std::get<PolylinePiece>(p).vertices) keys.push_back(Location::at(v));
  }
  double d = 0.0;
  for (std::size_t i = 0; i < keys.size(); ++i)
    for (std::size_t j = i + 1; j < keys.size(); ++j) d = std::max(d, distance(s, keys[i], keys[j]));
  return d;
}

// ---------------------------------------------------------------------------
// reversal, restriction, reparametrization

namespace detail {

/// a + b - t with both endpoints mapped exactly.
inline double reflect(Interval d, double t) {
  if (t == d.lo) return d.hi;
  if (t == d.hi) return d.lo;
  return d.lo + (d.hi - t);
}

}  // namespace detail

/// t -> gamma((a+b-t)-), with gamma(a-) = gamma(a).
inline TestCurve reverse(const TestCurve& c) {
  const auto d = c.domain();
  std::vector<Piece> out;
  const auto& pcs = c.pieces();
  for (std::size_t r = pcs.size(); r-- > 0;) {
    const double start = detail::reflect(d, c.span_end(r));
    if (const auto* st = std::get_if<StepPiece>(&pcs[r])) {
      out.emplace_back(StepPiece{start, st->point});
    } else {
      const auto& pl = std::get<PolylinePiece>(pcs[r]);
      PolylinePiece q;
      for (std::size_t k = pl.times.size(); k-- > 0;) {
        q.times.push_back(detail::reflect(d, pl.times[k]));
        q.vertices.push_back(pl.vertices[k]);
      }
      out.emplace_back(std::move(q));
    }
  }
  return {d, std::move(out)};
}

/// gamma|[r, t-]: the restriction to [r,t] whose value at t is gamma(t-).
inline TestCurve left_adjusted_restrict(const TestCurve& c, double r, double t) {
  const auto d = c.domain();
  if (!(d.lo <= r && r < t && t <= d.hi)) throw std::invalid_argument("restrict: need a <= r < t <= b");
  std::vector<Piece> out;
  const auto& pcs = c.pieces();
  for (std::size_t i = 0; i < pcs.size(); ++i) {
    const double s0 = c.start(i), s1 = c.span_end(i);
    if (s1 <= r || s0 >= t) continue;
    const double from = std::max(s0, r), to = std::min(s1, t);
    if (const auto* st = std::get_if<StepPiece>(&pcs[i])) {
      out.emplace_back(StepPiece{from, st->point});
      continue;
    }
    const auto& pl = std::get<PolylinePiece>(pcs[i]);
    PolylinePiece q;
    q.times.push_back(from);
    q.vertices.push_back(pl.at(from));
    for (std::size_t k = 0; k < pl.times.size(); ++k) {
      if (pl.times[k] > from && pl.times[k] < to) {
        q.times.push_back(pl.times[k]);
        q.vertices.push_back(pl.vertices[k]);
      }
    }
    q.times.push_back(to);
    q.vertices.push_back(to == pl.end() ? pl.vertices.back() : pl.at(to));
    out.emplace_back(std::move(q));
  }
  return {Interval{r, t}, std::move(out)};
}

/// gamma|[r,t]; t must be b or a continuity point so the result stays a test curve.
inline TestCurve restrict(const Space& s, const TestCurve& c, double r, double t) {
  if (!(c.domain().lo <= r && r < t && t <= c.domain().hi)) throw std::invalid_argument("restrict: need a <= r < t <= b");
  if (t < c.domain().hi && jump(s, c, t) > 0.0)
    throw std::invalid_argument("restrict: right endpoint is a discontinuity; use left_adjusted_restrict");
  return left_adjusted_restrict(c, r, t);
}

/// Affine pushforward onto `target`: the result at psi^{-1}(t) equals gamma(t).
inline TestCurve reparametrize(const TestCurve& c, Interval target) {
  if (!(std::isfinite(target.lo) && std::isfinite(target.hi) && target.lo < target.hi))
    throw std::invalid_argument("reparametrize: degenerate target interval");
  const auto d = c.domain();
  if (d == target) return c;
  auto map = [&](double t) {
    if (t == d.lo) return target.lo;
    if (t == d.hi) return target.hi;
    return target.lo + (t - d.lo) * (target.length() / d.length());
  };
  std::vector<Piece> out;
  for (const auto& p : c.pieces()) {
    if (const auto* st = std::get_if<StepPiece>(&p)) {
      out.emplace_back(StepPiece{map(st->start), st->point});
    } else {
      auto q = std::get<PolylinePiece>(p);
      for (auto& t : q.times) t = map(t);
      out.emplace_back(std::move(q));
    }
  }
  return {target, std::move(out)};
}

/// Unit-speed reparametrization on [0, V(gamma)] of a continuous polyline curve.
inline TestCurve arc_length_parametrize(const Space& s, const TestCurve& c) {
  require_compatible(s, c);
  if (c.is_step() || !std::all_of(c.pieces().begin(), c.pieces().end(),
                                  [](const Piece& p) { return std::holds_alternative<PolylinePiece>(p); }))
    throw std::invalid_argument("arc_length_parametrize: curve must consist of polyline pieces");
  if (!is_continuous(s, c)) throw std::invalid_argument("arc_length_parametrize: curve is discontinuous");
  std::vector<Eigen::VectorXd> verts;
  for (const auto& p : c.pieces()) {
    const auto& pl = std::get<PolylinePiece>(p);
    for (std::size_t k = verts.empty() ? 0 : 1; k < pl.vertices.size(); ++k) verts.push_back(pl.vertices[k]);
  }
  std::vector<double> times{0.0};
  std::vector<Eigen::VectorXd> kept{verts.front()};
  double acc = 0.0;
  for (std::size_t k = 1; k < verts.size(); ++k) {
    const double len = (verts[k] - kept.back()).norm();
    if (len == 0.0) continue;
    acc += len;
    times.push_back(acc);
    kept.push_back(verts[k]);
  }
  if (acc == 0.0) throw std::invalid_argument("arc_length_parametrize: curve has zero variation");
  return TestCurve::polyline(Interval{0.0, acc}, std::move(times), std::move(kept));
}

/// Structural equality with times and coordinates compared to `tol`.
inline bool approx_equal(const TestCurve& a, const TestCurve& b, double tol) {
  auto close = [tol](double x, double y) { return std::fabs(x - y) <= tol; };
  if (!close(a.domain().lo, b.domain().lo) || !close(a.domain().hi, b.domain().hi)) return false;
  if (a.piece_count() != b.piece_count()) return false;
  for (std::size_t i = 0; i < a.piece_count(); ++i) {
    const auto& p = a.pieces()[i];
    const auto& q = b.pieces()[i];
    if (p.index() != q.index()) return false;
    if (const auto* sp = std::get_if<StepPiece>(&p)) {
      const auto& sq = std::get<StepPiece>(q);
      if (sp->point != sq.point || !close(sp->start, sq.start)) return false;
    } else {
      const auto& lp = std::get<PolylinePiece>(p);
      const auto& lq = std::get<PolylinePiece>(q);
      if (lp.times.size() != lq.times.size()) return false;
      for (std::size_t k = 0; k < lp.times.size(); ++k) {
        if (!close(lp.times[k], lq.times[k])) return false;
        if ((lp.vertices[k] - lq.vertices[k]).lpNorm<Eigen::Infinity>() > tol) return false;
      }
    }
  }
  return true;
}

}  // namespace tcurve

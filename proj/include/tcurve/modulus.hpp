#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tcurve/convex.hpp"
#include "tcurve/curve.hpp"
#include "tcurve/space.hpp"
#include "tcurve/stieltjes.hpp"

namespace tcurve {

/// A finite family of nontrivial test curves over a fixed space. For step
/// curves the atomic constraint row a[x] = mu^S({x}) is cached.
class CurveFamily {
 public:
  CurveFamily() = default;

  CurveFamily(const Space& s, std::vector<TestCurve> curves) : n_(s.size()), curves_(std::move(curves)) {
    rows_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(curves_.size()), static_cast<Eigen::Index>(n_));
    for (std::size_t i = 0; i < curves_.size(); ++i) {
      const auto& c = curves_[i];
      require_compatible(s, c);
      if (!(variation(s, c) > 0.0)) throw InputError("curve family member " + std::to_string(i) + " is trivial (zero variation)");
      if (!c.is_step()) {
        all_step_ = false;
        continue;
      }
      const auto mu = sym_measure(s, c);
      for (std::size_t x = 0; x < n_; ++x) rows_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(x)) = mu.atoms[x];
    }
  }

  std::size_t size() const { return curves_.size(); }
  bool empty() const { return curves_.empty(); }
  const std::vector<TestCurve>& curves() const { return curves_; }
  const TestCurve& operator[](std::size_t i) const { return curves_[i]; }

  /// True when every member is a step curve (constraint rows available).
  bool has_rows() const { return all_step_; }

  const Eigen::MatrixXd& rows() const {
    if (!all_step_) throw std::invalid_argument("curve family contains polyline curves; no atomic constraint rows");
    return rows_;
  }

  /// Members at `idx` (in that order).
  CurveFamily subset(const Space& s, std::span<const std::size_t> idx) const {
    std::vector<TestCurve> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(curves_.at(i));
    return CurveFamily(s, std::move(out));
  }

  /// Concatenation (duplicates kept; they do not change the modulus).
  CurveFamily join(const Space& s, const CurveFamily& other) const {
    auto all = curves_;
    all.insert(all.end(), other.curves_.begin(), other.curves_.end());
    return CurveFamily(s, std::move(all));
  }

 private:
  std::size_t n_ = 0;
  std::vector<TestCurve> curves_;
  Eigen::MatrixXd rows_;
  bool all_step_ = true;
};

struct ModulusResult {
  double value = 0.0;             ///< Mod^p
  ScalarFunction density;          ///< the minimizing admissible rho
  std::vector<double> slacks;      ///< sym_integrate(gamma, rho) - 1 per member
  double lower_bound = 0.0;        ///< certified dual bound
  convex::Method method = convex::Method::automatic;
  bool tie = false;                ///< p = 1: minimizer possibly not unique
};

struct AdmissibleResult {
  bool admissible = true;
  double worst_slack = kInf;  ///< min over members of sym_integrate - 1
};

/// rho is admissible iff every member has symmetrized integral >= 1 (up to 1e-12).
inline AdmissibleResult admissible(const ScalarFunction& rho, const CurveFamily& fam, const Space& s) {
  require_same_size(rho, s, "admissible");
  if (!rho.nonnegative()) throw std::invalid_argument("admissible: density has a negative entry");
  AdmissibleResult r;
  for (const auto& c : fam.curves()) r.worst_slack = std::min(r.worst_slack, sym_integrate(s, c, rho) - 1.0);
  r.admissible = fam.empty() || r.worst_slack >= -1e-12;
  return r;
}

namespace detail {

inline ModulusResult modulus_from_rows(const Eigen::MatrixXd& rows, const Space& s, double p, convex::Method method) {
  if (!(p >= 1.0)) throw std::invalid_argument("modulus: p must be >= 1");
  const auto sol = convex::solve(convex::PowerProgram{rows, s.weights(), p}, method);
  ModulusResult r;
  r.value = sol.value;
  r.lower_bound = sol.lower_bound;
  r.method = sol.method;
  r.tie = sol.tie;
  r.density = ScalarFunction(std::vector<double>(sol.x.data(), sol.x.data() + sol.x.size()));
  return r;
}

}  // namespace detail

/// Mod^p(fam) = min sum_x m(x) rho(x)^p over admissible rho.
inline ModulusResult modulus(const CurveFamily& fam, double p, const Space& s,
                             convex::Method method = convex::Method::automatic) {
  if (!(p >= 1.0)) throw std::invalid_argument("modulus: p must be >= 1");
  if (fam.empty()) {
    ModulusResult r;
    r.density = ScalarFunction::constant(s.size(), 0.0);
    r.method = method;
    return r;
  }
  auto r = detail::modulus_from_rows(fam.rows(), s, p, method);
  for (const auto& c : fam.curves()) r.slacks.push_back(sym_integrate(s, c, r.density) - 1.0);
  return r;
}

struct NullFamilyResult {
  bool null = false;
  double value = 0.0;
  /// Present when null. For the empty family this is rho = 0. With positive
  /// weights no nonempty family has modulus exactly 0; a numerically null
  /// family returns its (tiny-norm, admissible) minimizer and `exact` = false.
  std::optional<ScalarFunction> witness;
  bool exact = true;
};

inline NullFamilyResult is_null_family(const CurveFamily& fam, double p, const Space& s, double threshold = 1e-10) {
  NullFamilyResult out;
  if (fam.empty()) {
    out.null = true;
    out.witness = ScalarFunction::constant(s.size(), 0.0);
    return out;
  }
  const auto m = modulus(fam, p, s);
  out.value = m.value;
  if (m.value < threshold) {
    out.null = true;
    out.witness = m.density;
    out.exact = false;
  }
  return out;
}

// ---------------------------------------------------------------------------
// test plans

struct WeightedCurve {
  TestCurve curve;
  double weight;
};

/// Finite positive combination of test curves (a discrete measure on curves).
class TestPlan {
 public:
  TestPlan() = default;
  explicit TestPlan(std::vector<WeightedCurve> items) : items_(std::move(items)) {
    for (const auto& it : items_)
      if (!(it.weight > 0.0) || !std::isfinite(it.weight)) throw InputError("test plan weights must be positive and finite");
  }

  static TestPlan dirac(TestCurve c) { return TestPlan({WeightedCurve{std::move(c), 1.0}}); }

  const std::vector<WeightedCurve>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }

  double total_weight() const {
    double w = 0.0;
    for (const auto& it : items_) w += it.weight;
    return w;
  }

  TestPlan normalized() const {
    auto out = items_;
    const double w = total_weight();
    for (auto& it : out) it.weight /= w;
    return TestPlan(std::move(out));
  }

  /// sum_i w_i V(gamma_i).
  double expected_variation(const Space& s) const {
    double v = 0.0;
    for (const auto& it : items_) v += it.weight * variation(s, it.curve);
    return v;
  }

 private:
  std::vector<WeightedCurve> items_;
};

/// sum_i w_i mu^S_{gamma_i} as a row over the points (step curves only).
inline Eigen::VectorXd plan_row(const TestPlan& plan, const Space& s) {
  Eigen::VectorXd row = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.size()));
  for (const auto& it : plan.items()) {
    require_compatible(s, it.curve);
    if (!it.curve.is_step()) throw std::invalid_argument("plan rows need step curves");
    if (!(variation(s, it.curve) > 0.0)) throw InputError("test plan charges a trivial curve");
    const auto mu = sym_measure(s, it.curve);
    for (std::size_t x = 0; x < s.size(); ++x) row(static_cast<Eigen::Index>(x)) += it.weight * mu.atoms[x];
  }
  return row;
}

/// Modulus over test plans: rho admissible iff sum_i w_i sym_integrate(gamma_i, rho) >= 1 per plan.
inline ModulusResult generalized_modulus(std::span<const TestPlan> plans, double p, const Space& s,
                                         convex::Method method = convex::Method::automatic) {
  if (!(p >= 1.0)) throw std::invalid_argument("generalized_modulus: p must be >= 1");
  std::vector<const TestPlan*> live;
  for (const auto& pl : plans)
    if (!pl.empty()) live.push_back(&pl);
  if (live.empty()) {
    ModulusResult r;
    r.density = ScalarFunction::constant(s.size(), 0.0);
    return r;
  }
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(live.size()), static_cast<Eigen::Index>(s.size()));
  for (std::size_t i = 0; i < live.size(); ++i) rows.row(static_cast<Eigen::Index>(i)) = plan_row(*live[i], s).transpose();
  auto r = detail::modulus_from_rows(rows, s, p, method);
  for (const auto* pl : live) {
    double v = 0.0;
    for (const auto& it : pl->items()) v += it.weight * sym_integrate(s, it.curve, r.density);
    r.slacks.push_back(v - 1.0);
  }
  return r;
}

/// max over t and x of (e_t)_# plan({x}) / m(x). Step curves are constant
/// between piece starts, so the maximum is attained on the set of starts.
inline double marginal_constant(const TestPlan& plan, const Space& s) {
  if (plan.empty()) return 0.0;
  const auto dom = plan.items().front().curve.domain();
  std::vector<double> grid;
  for (const auto& it : plan.items()) {
    require_compatible(s, it.curve);
    if (!(it.curve.domain() == dom)) throw std::invalid_argument("marginal_constant: plan curves must share a domain");
    if (!it.curve.is_step()) throw std::invalid_argument("marginal_constant: step curves only");
    for (std::size_t i = 0; i < it.curve.piece_count(); ++i) grid.push_back(it.curve.start(i));
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  double c = 0.0;
  std::vector<double> mass(s.size());
  for (double t : grid) {
    std::fill(mass.begin(), mass.end(), 0.0);
    for (const auto& it : plan.items()) mass[eval(it.curve, t).index] += it.weight;
    for (std::size_t x = 0; x < s.size(); ++x) c = std::max(c, mass[x] / s.weight(x));
  }
  return c;
}

/// mu_{x,r} (x) mu_{y,r} pushed to two-point curves gamma_w^z, where the
/// ball measures are normalized restrictions of m to open balls of radius r.
inline TestPlan product_plan(const Space& s, std::size_t x, std::size_t y, double r) {
  if (x == y || x >= s.size() || y >= s.size()) throw std::invalid_argument("product_plan: need two distinct points");
  if (!(r > 0.0 && r < 0.5 * s.distance(x, y))) throw std::invalid_argument("product_plan: need 0 < r < d(x,y)/2");
  auto ball = [&](std::size_t c) {
    std::vector<std::size_t> b;
    for (std::size_t z = 0; z < s.size(); ++z)
      if (s.distance(c, z) < r) b.push_back(z);
    return b;
  };
  const auto bx = ball(x), by = ball(y);
  double mx = 0.0, my = 0.0;
  for (auto z : bx) mx += s.weight(z);
  for (auto z : by) my += s.weight(z);
  std::vector<WeightedCurve> items;
  for (auto w : bx)
    for (auto z : by) items.push_back({TestCurve::two_point(w, z), (s.weight(w) / mx) * (s.weight(z) / my)});
  return TestPlan(std::move(items));
}

// ---------------------------------------------------------------------------
// curve arenas

/// Every step curve on `domain` with 1..max_jumps jumps at times on the
/// dyadic grid {k / 2^max_jumps} (scaled to the domain) and consecutive
/// values distinct. Constant curves are excluded (trivial).
inline std::vector<TestCurve> enumerate_step_curves(const Space& s, unsigned max_jumps, Interval domain = {0.0, 1.0}) {
  std::vector<TestCurve> out;
  if (max_jumps == 0 || s.size() < 2) return out;
  const std::size_t cells = std::size_t{1} << max_jumps;
  std::vector<double> grid;
  for (std::size_t k = 1; k < cells; ++k)
    grid.push_back(domain.lo + domain.length() * std::ldexp(static_cast<double>(k), -static_cast<int>(max_jumps)));

  const std::size_t n = s.size();
  for (unsigned j = 1; j <= max_jumps && j <= grid.size(); ++j) {
    // jump-time combinations in lexicographic order
    std::vector<std::size_t> comb(j);
    for (unsigned i = 0; i < j; ++i) comb[i] = i;
    for (;;) {
      std::vector<double> starts{domain.lo};
      for (auto c : comb) starts.push_back(grid[c]);
      // value sequences with distinct neighbours, odometer order
      std::vector<std::size_t> seq(j + 1, 0);
      for (;;) {
        bool valid = true;
        for (unsigned i = 1; i <= j; ++i) valid = valid && seq[i] != seq[i - 1];
        if (valid) out.push_back(TestCurve::steps(domain, starts, seq));
        bool done = true;
        for (std::size_t pos = j + 1; pos-- > 0;) {
          if (++seq[pos] < n) { done = false; break; }
          seq[pos] = 0;
        }
        if (done) break;
      }
      // next combination
      int i = static_cast<int>(j) - 1;
      while (i >= 0 && comb[static_cast<std::size_t>(i)] == grid.size() - j + static_cast<std::size_t>(i)) --i;
      if (i < 0) break;
      ++comb[static_cast<std::size_t>(i)];
      for (auto k = static_cast<std::size_t>(i) + 1; k < j; ++k) comb[k] = comb[k - 1] + 1;
    }
  }
  return out;
}

/// x on [0, 1/2), y on [1/2, 1] for every ordered pair x != y.
inline std::vector<TestCurve> two_point_curves(const Space& s) {
  std::vector<TestCurve> out;
  for (std::size_t x = 0; x < s.size(); ++x)
    for (std::size_t y = 0; y < s.size(); ++y)
      if (x != y) out.push_back(TestCurve::two_point(x, y));
  return out;
}

inline CurveFamily two_point_arena(const Space& s) { return CurveFamily(s, two_point_curves(s)); }

inline CurveFamily step_arena(const Space& s, unsigned max_jumps) { return CurveFamily(s, enumerate_step_curves(s, max_jumps)); }

}  // namespace tcurve

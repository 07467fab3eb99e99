#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tcurve/convex.hpp"
#include "tcurve/curve.hpp"
#include "tcurve/modulus.hpp"
#include "tcurve/space.hpp"
#include "tcurve/stieltjes.hpp"

namespace tcurve {

/// One failed inequality. `points` holds the pair for pair checks; `curve`
/// the arena index for curve checks.
struct Witness {
  std::string item;
  double lhs = 0.0;
  double rhs = 0.0;
  double deficit = 0.0;
  std::vector<std::size_t> points;
  std::size_t curve = kNoIndex;
};

struct ViolationReport {
  std::vector<Witness> witnesses;
  std::optional<double> modulus;  ///< Mod^p of the violating family, when computed
  std::size_t checked = 0;

  bool ok() const { return witnesses.empty(); }

  void check(bool holds, std::string item, double lhs, double rhs, std::vector<std::size_t> pts = {},
             std::size_t curve = kNoIndex) {
    ++checked;
    if (!holds) witnesses.push_back({std::move(item), lhs, rhs, lhs - rhs, std::move(pts), curve});
  }

  void absorb(const ViolationReport& other, const std::string& prefix) {
    checked += other.checked;
    for (auto w : other.witnesses) {
      w.item = prefix + w.item;
      witnesses.push_back(std::move(w));
    }
  }
};

namespace detail {

inline std::string pair_label(std::size_t x, std::size_t y) { return std::to_string(x) + "," + std::to_string(y); }
inline std::string curve_label(std::size_t i) { return "curve " + std::to_string(i); }

inline double endpoint_gap(const ScalarFunction& f, const TestCurve& c) {
  const auto x = eval(c, c.domain().lo), y = eval(c, c.domain().hi);
  return abs_diff(f[y.index], f[x.index]);
}

inline void require_step_family(const CurveFamily& fam) {
  if (!fam.has_rows()) throw std::invalid_argument("gradient checks need a step-curve arena");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Hajlasz gradients

/// |f(x) - f(y)| <= (g(x) + g(y)) d(x,y) for all pairs outside `except`.
inline ViolationReport hajlasz_check(const ScalarFunction& f, const ScalarFunction& g, const Space& s,
                                     std::span<const std::size_t> except = {}, double tol = kDefaultTolerance) {
  require_same_size(f, s, "hajlasz_check f");
  require_same_size(g, s, "hajlasz_check g");
  std::vector<char> skip(s.size(), 0);
  for (auto e : except) skip.at(e) = 1;
  ViolationReport r;
  for (std::size_t x = 0; x < s.size(); ++x)
    for (std::size_t y = x + 1; y < s.size(); ++y) {
      if (skip[x] || skip[y]) continue;
      const double lhs = abs_diff(f[x], f[y]);
      const double rhs = mul0(g[x] + g[y], s.distance(x, y));
      r.check(leq(lhs, rhs, tol), detail::pair_label(x, y), lhs, rhs, {x, y});
    }
  return r;
}

struct HajlaszMinimum {
  ScalarFunction g;
  double norm = 0.0;  ///< ||g||_p
  convex::Solution solution;
};

/// Minimal-norm Hajlasz gradient: min sum m g^p s.t. g(x) + g(y) >= |f(x)-f(y)| / d(x,y).
inline HajlaszMinimum minimal_hajlasz(const ScalarFunction& f, const Space& s, double p,
                                      convex::Method method = convex::Method::automatic) {
  if (!(p >= 1.0)) throw std::invalid_argument("minimal_hajlasz: p must be >= 1");
  require_same_size(f, s, "minimal_hajlasz");
  if (!f.finite()) throw std::invalid_argument("minimal_hajlasz: f must be finite");
  const auto n = static_cast<Eigen::Index>(s.size());
  std::vector<Eigen::VectorXd> rows;
  for (std::size_t x = 0; x < s.size(); ++x)
    for (std::size_t y = x + 1; y < s.size(); ++y) {
      const double c = std::fabs(f[x] - f[y]) / s.distance(x, y);
      if (c <= 0.0) continue;
      Eigen::VectorXd row = Eigen::VectorXd::Zero(n);
      row(static_cast<Eigen::Index>(x)) = 1.0 / c;
      row(static_cast<Eigen::Index>(y)) = 1.0 / c;
      rows.push_back(std::move(row));
    }
  Eigen::MatrixXd a(static_cast<Eigen::Index>(rows.size()), n);
  for (std::size_t i = 0; i < rows.size(); ++i) a.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  HajlaszMinimum out;
  out.solution = convex::solve(convex::PowerProgram{a, s.weights(), p}, method);
  out.g = ScalarFunction(std::vector<double>(out.solution.x.data(), out.solution.x.data() + n));
  out.norm = std::pow(out.solution.value, 1.0 / p);
  return out;
}

// ---------------------------------------------------------------------------
// upper S-gradients

/// |f(gamma(b)) - f(gamma(a))| <= sym_integrate(gamma, g) for every member.
inline ViolationReport upper_s_check(const ScalarFunction& f, const ScalarFunction& g, const CurveFamily& fam,
                                     const Space& s, double tol = kDefaultTolerance) {
  require_same_size(f, s, "upper_s_check f");
  require_same_size(g, s, "upper_s_check g");
  ViolationReport r;
  for (std::size_t i = 0; i < fam.size(); ++i) {
    const double lhs = detail::endpoint_gap(f, fam[i]);
    const double rhs = sym_integrate(s, fam[i], g);
    r.check(leq(lhs, rhs, tol), detail::curve_label(i), lhs, rhs, {}, i);
  }
  return r;
}

/// Members of `fam` as a subfamily.
inline CurveFamily members(const CurveFamily& fam, const Space& s, const std::vector<std::size_t>& idx) {
  return fam.subset(s, idx);
}

struct WeakCheckResult {
  ViolationReport violators;  ///< with modulus of the violating family
  std::vector<std::size_t> gamma1, gamma2, gamma3;
  double gamma1_modulus = 0.0, gamma2_modulus = 0.0, gamma3_modulus = 0.0;
  double threshold = 1e-10;

  bool ok() const { return violators.modulus.value_or(0.0) < threshold; }
};

/// p-weak upper S-gradient check over a step-curve arena: the violating
/// subfamily must have modulus below 1e-10. Also reports the three
/// exceptional families: infinite integral (Gamma1), a violation between an
/// interior value and a left limit (Gamma2), and a violation across a single
/// jump (Gamma3).
inline WeakCheckResult weak_upper_s_check(const ScalarFunction& f, const ScalarFunction& g, const CurveFamily& fam,
                                          double p, const Space& s, double tol = kDefaultTolerance) {
  detail::require_step_family(fam);
  WeakCheckResult out;
  out.violators = upper_s_check(f, g, fam, s, tol);
  std::vector<std::size_t> bad;
  for (const auto& w : out.violators.witnesses) bad.push_back(w.curve);
  out.violators.modulus = modulus(members(fam, s, bad), p, s).value;

  for (std::size_t i = 0; i < fam.size(); ++i) {
    const auto& c = fam[i];
    if (std::isinf(sym_integrate(s, c, g))) out.gamma1.push_back(i);

    bool in2 = false;
    for (std::size_t a = 0; a < c.piece_count() && !in2; ++a)
      for (std::size_t b = a + 1; b < c.piece_count() && !in2; ++b) {
        const double r = c.start(a), t = c.span_end(b);
        const auto xs = eval(c, r).index, xt = eval_left(c, t).index;
        if (xs == xt) continue;
        const double lhs = abs_diff(f[xs], f[xt]);
        in2 = !leq(lhs, sym_integrate(s, left_adjusted_restrict(c, r, t), g), tol);
      }
    if (in2) out.gamma2.push_back(i);

    for (const auto& [t, size] : jumps(s, c)) {
      const auto xl = eval_left(c, t).index, xr = eval(c, t).index;
      if (!leq(abs_diff(f[xl], f[xr]), 0.5 * mul0(g[xl] + g[xr], size), tol)) {
        out.gamma3.push_back(i);
        break;
      }
    }
  }
  out.gamma1_modulus = modulus(members(fam, s, out.gamma1), p, s).value;
  out.gamma2_modulus = modulus(members(fam, s, out.gamma2), p, s).value;
  out.gamma3_modulus = modulus(members(fam, s, out.gamma3), p, s).value;
  return out;
}

// ---------------------------------------------------------------------------
// m-upper S-gradients over test plans

/// sum_i w_i |f(gamma_i(1)) - f(gamma_i(0))| <= sum_i w_i sym_integrate(gamma_i, g) per plan.
inline ViolationReport plan_check(const ScalarFunction& f, const ScalarFunction& g, std::span<const TestPlan> plans,
                                  const Space& s, double tol = kDefaultTolerance) {
  require_same_size(f, s, "plan_check f");
  require_same_size(g, s, "plan_check g");
  ViolationReport r;
  for (std::size_t i = 0; i < plans.size(); ++i) {
    double lhs = 0.0, rhs = 0.0;
    for (const auto& it : plans[i].items()) {
      lhs += mul0(it.weight, detail::endpoint_gap(f, it.curve));
      rhs += mul0(it.weight, sym_integrate(s, it.curve, g));
    }
    r.check(leq(lhs, rhs, tol), "plan " + std::to_string(i), lhs, rhs, {}, i);
  }
  return r;
}

// ---------------------------------------------------------------------------
// McShane extension

using PartialFunction = std::vector<std::optional<double>>;

/// x -> min_{y in E} f(y) + L d(x,y), where E is where `f` is defined.
/// Throws if E is empty or f is not L-Lipschitz on E.
inline ScalarFunction mcshane_extend(const PartialFunction& f, double lipschitz, const Space& s,
                                     double tol = kDefaultTolerance) {
  if (f.size() != s.size()) throw InputError("mcshane_extend: table length does not match the space");
  if (!(lipschitz >= 0.0) || !std::isfinite(lipschitz)) throw std::invalid_argument("mcshane_extend: L must be finite and >= 0");
  std::vector<std::size_t> e;
  for (std::size_t x = 0; x < f.size(); ++x)
    if (f[x]) {
      if (!std::isfinite(*f[x])) throw std::invalid_argument("mcshane_extend: values on E must be finite");
      e.push_back(x);
    }
  if (e.empty()) throw std::invalid_argument("mcshane_extend: E is empty");
  for (auto y : e)
    for (auto z : e)
      if (!leq(std::fabs(*f[y] - *f[z]), lipschitz * s.distance(y, z), tol))
        throw std::invalid_argument("mcshane_extend: f is not L-Lipschitz on E at " + detail::pair_label(y, z));
  std::vector<double> out(s.size(), kInf);
  for (std::size_t x = 0; x < s.size(); ++x)
    for (auto y : e) out[x] = std::min(out[x], *f[y] + lipschitz * s.distance(x, y));
  return ScalarFunction(std::move(out));
}

// ---------------------------------------------------------------------------
// verification pipelines

struct PipelineReport {
  std::string statement;
  bool precondition_ok = true;
  std::string precondition;  ///< why the precondition failed
  ViolationReport violations;
  double max_ratio = 0.0;    ///< max lhs / sym_integrate(g) over curves with positive integral
  std::size_t levels = 0;    ///< truncation levels visited (76 pipeline)

  bool ok() const { return precondition_ok && violations.ok(); }
};

/// If g passes the weak upper S-gradient check on the two-point arena, g/2
/// must be a Hajlasz gradient of f. The two-point curves x on [0,1/2), y on
/// [1/2,1] are built explicitly and compared pair by pair.
inline PipelineReport pipeline_uno(const ScalarFunction& f, const ScalarFunction& g, double p, const Space& s,
                                   double tol = kDefaultTolerance) {
  PipelineReport out;
  out.statement = "p-weak upper S-gradient g => g/2 is a Hajlasz gradient";
  const auto arena = two_point_arena(s);
  const auto pre = weak_upper_s_check(f, g, arena, p, s, tol);
  if (!pre.ok()) {
    out.precondition_ok = false;
    out.precondition = "g is not a p-weak upper S-gradient on the two-point arena";
    return out;
  }
  const auto half = g.scaled(0.5);
  for (std::size_t i = 0; i < arena.size(); ++i) {
    const auto& c = arena[i];
    const auto x = eval(c, 0.0).index, y = eval(c, 1.0).index;
    if (x > y) continue;
    const double lhs = abs_diff(f[y], f[x]);
    const double rhs = mul0(half[x] + half[y], s.distance(x, y));
    out.violations.check(leq(lhs, rhs, tol), detail::pair_label(x, y), lhs, rhs, {x, y}, i);
  }
  return out;
}

namespace detail {

/// Everywhere-Hajlasz precondition shared by the bounded and 76 pipelines.
inline bool hajlasz_precondition(const ScalarFunction& f, const ScalarFunction& g, const Space& s, double tol,
                                 PipelineReport& out) {
  require_same_size(f, s, "pipeline f");
  require_same_size(g, s, "pipeline g");
  if (!f.finite() || !g.finite() || !g.nonnegative()) {
    out.precondition_ok = false;
    out.precondition = "f and g must be finite with g >= 0";
    return false;
  }
  if (!hajlasz_check(f, g, s, {}, tol).ok()) {
    out.precondition_ok = false;
    out.precondition = "g is not an everywhere Hajlasz gradient of f";
    return false;
  }
  return true;
}

}  // namespace detail

/// For bounded Hajlasz g: |f(gamma(0)) - f(gamma(1))| <= sym_integrate(gamma, 18 g) over the arena.
/// Also, for every sub-interval [a, b] between piece boundaries whose interior
/// jumps are all <= M (M from `bounds`, plus the tightest admissible M):
///   |f(gamma(a)) - f(gamma(b-))| <= 8M g(gamma(a)) + 16 sym_integrate(gamma|[a,b-], g) + 8M g(gamma(b-)).
inline PipelineReport pipeline_bounded_lemma(const ScalarFunction& f, const ScalarFunction& g, const Space& s,
                                             const CurveFamily& arena, std::span<const double> bounds = {},
                                             double tol = kDefaultTolerance) {
  PipelineReport out;
  out.statement = "bounded Hajlasz g => |f(gamma(0)) - f(gamma(1))| <= sym_integrate(gamma, 18 g)";
  if (!detail::hajlasz_precondition(f, g, s, tol, out)) return out;
  detail::require_step_family(arena);
  const auto g18 = g.scaled(18.0);
  for (std::size_t i = 0; i < arena.size(); ++i) {
    const auto& c = arena[i];
    const double lhs = detail::endpoint_gap(f, c);
    const double base = sym_integrate(s, c, g);
    if (base > 0.0) out.max_ratio = std::max(out.max_ratio, lhs / base);
    out.violations.check(leq(lhs, sym_integrate(s, c, g18), tol), "18g " + detail::curve_label(i), lhs,
                         sym_integrate(s, c, g18), {}, i);

    for (std::size_t a = 0; a < c.piece_count(); ++a)
      for (std::size_t b = a + 1; b < c.piece_count(); ++b) {
        const double ta = c.start(a), tb = c.span_end(b);
        double tight = 0.0;
        for (std::size_t k = a + 1; k <= b; ++k) tight = std::max(tight, jump(s, c, c.start(k)));
        std::vector<double> ms{tight};
        for (double m : bounds)
          if (m >= tight && m > 0.0) ms.push_back(m);
        const auto xa = eval(c, ta).index, xb = eval_left(c, tb).index;
        const double gap = abs_diff(f[xa], f[xb]);
        const double inner = sym_integrate(s, left_adjusted_restrict(c, ta, tb), g);
        for (double m : ms) {
          const double rhs = 8.0 * m * g[xa] + 16.0 * inner + 8.0 * m * g[xb];
          out.violations.check(leq(gap, rhs, tol),
                               "8M/16/8M " + detail::curve_label(i) + " [" + std::to_string(a) + "," + std::to_string(b) + "]",
                               gap, rhs, {}, i);
        }
      }
  }
  return out;
}

/// Truncation levels k used by the 76 pipeline: from the first level where
/// E_k = {g <= 2^k} is nonempty up to the first where E_k = X.
inline std::pair<int, int> truncation_levels(const ScalarFunction& g) {
  const double gmax = *std::max_element(g.values().begin(), g.values().end());
  double gmin = kInf;
  for (double v : g.values())
    if (v > 0.0) gmin = std::min(gmin, v);
  auto ceil_log2 = [](double v) {
    int k = static_cast<int>(std::ceil(std::log2(v)));
    while (std::ldexp(1.0, k) < v) ++k;
    while (std::ldexp(1.0, k - 1) >= v) --k;
    return k;
  };
  const int hi = gmax > 0.0 ? ceil_log2(gmax) : 0;
  const bool has_zero = std::any_of(g.values().begin(), g.values().end(), [](double v) { return v == 0.0; });
  int lo = std::isfinite(gmin) ? ceil_log2(gmin) : hi;
  if (has_zero) lo -= 2;  // E_k is nonempty at every level; include a few below the smallest positive value
  lo = std::max(lo, hi - 60);
  return {std::min(lo, hi), hi};
}

/// Hajlasz g => 76 g is an upper S-gradient. Builds E_k = {g <= 2^k}, the
/// 2^(k+1)-Lipschitz McShane extensions f'_k of f|E_k and
/// g'_k = g on E_k, 2^(k+1) off E_k, then verifies per level: agreement on
/// E_k, the Lipschitz bound, the pairwise inequality
/// |f'_k(x) - f'_k(z)| <= (g'_k(x) + g'_k(z)) d(x,z), g'_k <= 2g, and the
/// curve bound with 18 g'_k <= 36 g. Finally checks 76 g against f over the arena.
inline PipelineReport pipeline_76(const ScalarFunction& f, const ScalarFunction& g, double p, const Space& s,
                                  const CurveFamily& arena, double tol = kDefaultTolerance) {
  (void)p;
  PipelineReport out;
  out.statement = "Hajlasz g => 76 g is an upper S-gradient";
  if (!detail::hajlasz_precondition(f, g, s, tol, out)) return out;
  detail::require_step_family(arena);
  const auto n = s.size();
  const auto [klo, khi] = truncation_levels(g);
  ScalarFunction ftilde;
  for (int k = klo; k <= khi; ++k) {
    const double cap = std::ldexp(1.0, k);
    const double lip = std::ldexp(1.0, k + 1);
    PartialFunction restricted(n);
    std::vector<double> gk(n);
    bool nonempty = false;
    for (std::size_t x = 0; x < n; ++x) {
      const bool in = g[x] <= cap;
      if (in) { restricted[x] = f[x]; nonempty = true; }
      gk[x] = in ? g[x] : lip;
    }
    if (!nonempty) continue;
    ++out.levels;
    const std::string lvl = "k=" + std::to_string(k) + " ";
    const auto fk = mcshane_extend(restricted, lip, s, tol);
    const ScalarFunction gprime(gk);

    for (std::size_t x = 0; x < n; ++x) {
      if (restricted[x]) out.violations.check(std::fabs(fk[x] - f[x]) <= tol * std::max(1.0, std::fabs(f[x])),
                                              lvl + "agree " + std::to_string(x), fk[x], f[x], {x});
      out.violations.check(leq(gprime[x], 2.0 * g[x], tol), lvl + "g'<=2g " + std::to_string(x), gprime[x], 2.0 * g[x], {x});
      for (std::size_t z = x + 1; z < n; ++z) {
        const double diff = std::fabs(fk[x] - fk[z]);
        out.violations.check(leq(diff, lip * s.distance(x, z), tol), lvl + "lipschitz " + detail::pair_label(x, z), diff,
                             lip * s.distance(x, z), {x, z});
        const double rhs = (gprime[x] + gprime[z]) * s.distance(x, z);
        out.violations.check(leq(diff, rhs, tol), lvl + "pairwise " + detail::pair_label(x, z), diff, rhs, {x, z});
      }
    }
    const auto g18 = gprime.scaled(18.0);
    const auto g36 = g.scaled(36.0);
    for (std::size_t i = 0; i < arena.size(); ++i) {
      const auto& c = arena[i];
      const double lhs = detail::endpoint_gap(fk, c);
      const double r18 = sym_integrate(s, c, g18);
      const double r36 = sym_integrate(s, c, g36);
      out.violations.check(leq(lhs, r18, tol), lvl + "18g'_k " + detail::curve_label(i), lhs, r18, {}, i);
      out.violations.check(leq(r18, r36, tol), lvl + "18g'_k<=36g " + detail::curve_label(i), r18, r36, {}, i);
    }
    ftilde = fk;
  }

  // liminf f'_k: every level >= khi has E_k = X, so f'_k = f there.
  for (std::size_t x = 0; x < n; ++x)
    out.violations.check(std::fabs(ftilde[x] - f[x]) <= tol * std::max(1.0, std::fabs(f[x])),
                         "stabilized " + std::to_string(x), ftilde[x], f[x], {x});
  const auto g76 = g.scaled(76.0);
  for (std::size_t i = 0; i < arena.size(); ++i) {
    const auto& c = arena[i];
    const double lhs = detail::endpoint_gap(ftilde, c);
    const double base = sym_integrate(s, c, g);
    if (base > 0.0) out.max_ratio = std::max(out.max_ratio, lhs / base);
    const double rhs = sym_integrate(s, c, g76);
    out.violations.check(leq(lhs, rhs, tol), "76g " + detail::curve_label(i), lhs, rhs, {}, i);
  }
  return out;
}

// ---------------------------------------------------------------------------
// norms

struct NormReport {
  double f_norm = 0.0;          ///< ||f||_p
  double hajlasz_inf = 0.0;     ///< inf ||g||_p over Hajlasz gradients
  double arena_inf = 0.0;       ///< inf ||g||_p over upper S-gradients on the arena
  double m_norm = 0.0;          ///< ||f||_p + hajlasz_inf
  double n_tc_lower = 0.0;      ///< ||f||_p + arena_inf; a lower bound for the full N_TC norm
  bool spec_interval = false;   ///< hajlasz_inf in [arena_inf / 2, 76 arena_inf]
  bool theorem_interval = false;  ///< hajlasz_inf in [arena_inf / 76, arena_inf / 2]
  std::string caveat;
};

/// Minimal ||g||_p subject to |f(gamma(1)) - f(gamma(0))| <= sym_integrate(gamma, g) on the arena.
inline HajlaszMinimum minimal_arena_gradient(const ScalarFunction& f, const Space& s, double p, const CurveFamily& arena) {
  require_same_size(f, s, "minimal_arena_gradient");
  detail::require_step_family(arena);
  const auto& rows = arena.rows();
  std::vector<Eigen::Index> live;
  std::vector<double> scale;
  for (std::size_t i = 0; i < arena.size(); ++i) {
    const double gap = detail::endpoint_gap(f, arena[i]);
    if (gap > 0.0) {
      live.push_back(static_cast<Eigen::Index>(i));
      scale.push_back(gap);
    }
  }
  Eigen::MatrixXd a(static_cast<Eigen::Index>(live.size()), rows.cols());
  for (std::size_t r = 0; r < live.size(); ++r) a.row(static_cast<Eigen::Index>(r)) = rows.row(live[r]) / scale[r];
  HajlaszMinimum out;
  out.solution = convex::solve(convex::PowerProgram{a, s.weights(), p});
  out.g = ScalarFunction(std::vector<double>(out.solution.x.data(), out.solution.x.data() + out.solution.x.size()));
  out.norm = std::pow(out.solution.value, 1.0 / p);
  return out;
}

inline NormReport norms(const ScalarFunction& f, const Space& s, double p, const CurveFamily& arena, double rel_tol = 1e-7) {
  if (!f.finite()) throw std::invalid_argument("norms: f must be finite");
  NormReport r;
  r.f_norm = lp_norm(f, s, p);
  r.hajlasz_inf = minimal_hajlasz(f, s, p).norm;
  r.arena_inf = minimal_arena_gradient(f, s, p, arena).norm;
  r.m_norm = r.f_norm + r.hajlasz_inf;
  r.n_tc_lower = r.f_norm + r.arena_inf;
  const double slack = rel_tol * std::max({1.0, r.hajlasz_inf, r.arena_inf});
  const double m = r.hajlasz_inf, a = r.arena_inf;
  r.spec_interval = m >= 0.5 * a - slack && m <= 76.0 * a + slack;
  r.theorem_interval = m >= a / 76.0 - slack && m <= 0.5 * a + slack;
  r.caveat = "arena-restricted N_TC infimum: only the enumerated curves constrain g, so it bounds the true infimum from below";
  return r;
}

}  // namespace tcurve

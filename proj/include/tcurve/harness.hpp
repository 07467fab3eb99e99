#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "tcurve/gradients.hpp"
#include "tcurve/io.hpp"
#include "tcurve/modulus.hpp"
#include "tcurve/space.hpp"

namespace tcurve::harness {

struct Config {
  std::size_t spaces = 5;
  std::uint64_t seed = 7;
  unsigned max_jumps = 2;
  double p = 2.0;
  double tol = kDefaultTolerance;
};

struct Row {
  std::size_t space_id = 0;
  std::string item;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  ///< rhs - lhs
};

struct SuiteReport {
  std::string suite;
  std::string anchor;
  std::size_t checked = 0;
  std::size_t instances = 0;
  std::vector<Row> violations;
  io::Json details = io::Json::object();

  bool ok() const { return violations.empty(); }
};

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"uno", "bounded18", "seventysix", "plans", "fuglede"};
  return names;
}

inline std::string anchor(const std::string& suite) {
  if (suite == "uno") return "Theorem: g/2 is a Hajlasz gradient of f";
  if (suite == "bounded18") return "Lemma: |f(gamma(0)) - f(gamma(1))| <= int^S_gamma 18g";
  if (suite == "seventysix") return "Theorem: 76 g~ upper S-gradient of f~";
  if (suite == "plans") return "Theorem: product plan mu_{x,r} x mu_{y,r} reduces to the Hajlasz inequality";
  if (suite == "fuglede") return "Lemma (Fuglede): Mod^p{gamma : int^S |f_k - f| >= 2^-k} <= 2^-k";
  throw std::invalid_argument("unknown suite: " + suite);
}

// ---------------------------------------------------------------------------
// generators

inline ScalarFunction random_function(std::mt19937_64& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = uniform(rng, lo, hi);
  return ScalarFunction(std::move(v));
}

/// x -> max_y |f(x) - f(y)| / d(x,y).
inline ScalarFunction local_lipschitz(const ScalarFunction& f, const Space& s) {
  std::vector<double> out(s.size(), 0.0);
  for (std::size_t x = 0; x < s.size(); ++x)
    for (std::size_t y = 0; y < s.size(); ++y)
      if (x != y) out[x] = std::max(out[x], std::fabs(f[x] - f[y]) / s.distance(x, y));
  return ScalarFunction(std::move(out));
}

/// Raises g until every pair satisfies the Hajlasz inequality exactly in floating point.
inline ScalarFunction repair_hajlasz(const ScalarFunction& f, ScalarFunction g, const Space& s) {
  auto v = g.values();
  for (auto& x : v) x = std::max(x, 0.0);
  for (int sweep = 0; sweep < 8; ++sweep) {
    bool clean = true;
    for (std::size_t x = 0; x < s.size(); ++x)
      for (std::size_t y = x + 1; y < s.size(); ++y) {
        const double need = std::fabs(f[x] - f[y]);
        const double have = (v[x] + v[y]) * s.distance(x, y);
        if (have < need) {
          const double bump = 0.5 * (need - have) / s.distance(x, y) * (1.0 + 1e-12) + 1e-300;
          v[x] += bump;
          v[y] += bump;
          clean = false;
        }
      }
    if (clean) break;
  }
  return ScalarFunction(std::move(v));
}

/// Random everywhere-Hajlasz pair. Alternates between the minimal-norm
/// gradient (tight) and a random multiple in [1/2, 1] of the local Lipschitz
/// constant.
inline std::pair<ScalarFunction, ScalarFunction> random_hajlasz_pair(std::mt19937_64& rng, const Space& s, double p,
                                                                     std::size_t variant) {
  auto f = random_function(rng, s.size());
  if (variant % 2 == 0) return {f, repair_hajlasz(f, minimal_hajlasz(f, s, p).g, s)};
  const auto lip = local_lipschitz(f, s);
  std::vector<double> g(s.size());
  for (std::size_t x = 0; x < s.size(); ++x) g[x] = lip[x] * uniform(rng, 0.5, 1.0);
  return {f, repair_hajlasz(f, ScalarFunction(std::move(g)), s)};
}

inline std::size_t space_points(std::size_t i) { return 3 + i % 3; }

// ---------------------------------------------------------------------------
// suites

namespace detail {

inline void record(SuiteReport& out, std::size_t space_id, const ViolationReport& r) {
  out.checked += r.checked;
  for (const auto& w : r.witnesses) out.violations.push_back({space_id, w.item, w.lhs, w.rhs, w.rhs - w.lhs});
}

inline std::vector<std::pair<std::size_t, std::size_t>> pair_set(const ViolationReport& r) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& w : r.witnesses) {
    if (w.points.size() != 2) continue;
    out.emplace_back(std::min(w.points[0], w.points[1]), std::max(w.points[0], w.points[1]));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline std::string pair_list(const std::vector<std::pair<std::size_t, std::size_t>>& v) {
  std::string s;
  for (const auto& [x, y] : v) s += (s.empty() ? "" : ";") + std::to_string(x) + "," + std::to_string(y);
  return s.empty() ? "-" : s;
}

/// Pairs (x, y) whose two-point curve violates the upper S-gradient check.
inline std::vector<std::pair<std::size_t, std::size_t>> two_point_violations(const ScalarFunction& f, const ScalarFunction& g,
                                                                             const Space& s, double tol) {
  const auto arena = two_point_arena(s);
  const auto r = upper_s_check(f, g, arena, s, tol);
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& w : r.witnesses) {
    const auto x = eval(arena[w.curve], 0.0).index, y = eval(arena[w.curve], 1.0).index;
    out.emplace_back(std::min(x, y), std::max(x, y));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline void suite_uno(const Config& cfg, std::mt19937_64& rng, SuiteReport& out) {
  std::size_t mismatches = 0, passed_pre = 0;
  for (std::size_t i = 0; i < cfg.spaces; ++i) {
    const auto s = random_space(rng, space_points(i));
    // an upper S-gradient by construction: twice a Hajlasz gradient, perturbed upward
    auto [f, h] = random_hajlasz_pair(rng, s, cfg.p, i);
    std::vector<double> g(s.size());
    for (std::size_t x = 0; x < s.size(); ++x) g[x] = 2.0 * h[x] + uniform(rng, 0.0, 0.1);
    const auto rep = pipeline_uno(f, ScalarFunction(g), cfg.p, s, cfg.tol);
    if (rep.precondition_ok) ++passed_pre;
    else out.violations.push_back({i, "precondition: " + rep.precondition, 0.0, 0.0, 0.0});
    record(out, i, rep.violations);

    // two-point reduction: violation pair sets agree for an arbitrary g
    const auto g2 = random_function(rng, s.size(), 0.0, 1.0);
    const auto lhs = two_point_violations(f, g2, s, cfg.tol);
    const auto rhs = pair_set(hajlasz_check(f, g2.scaled(0.5), s, {}, cfg.tol));
    ++out.checked;
    if (lhs != rhs) {
      ++mismatches;
      out.violations.push_back({i, "two-point reduction " + pair_list(lhs) + " vs " + pair_list(rhs), 0.0, 0.0, 0.0});
    }
    ++out.instances;
  }
  out.details["two_point_mismatches"] = mismatches;
  out.details["precondition_passed"] = passed_pre;
}

inline void suite_bounded18(const Config& cfg, std::mt19937_64& rng, SuiteReport& out) {
  double max_ratio = 0.0;
  for (std::size_t i = 0; i < cfg.spaces; ++i) {
    const auto s = random_space(rng, space_points(i));
    const auto arena = step_arena(s, cfg.max_jumps);
    const auto [f, g] = random_hajlasz_pair(rng, s, cfg.p, i);
    const double diam = s.dist().maxCoeff();
    const std::vector<double> bounds{0.5 * diam, diam};
    const auto rep = pipeline_bounded_lemma(f, g, s, arena, bounds, cfg.tol);
    if (!rep.precondition_ok) out.violations.push_back({i, "precondition: " + rep.precondition, 0.0, 0.0, 0.0});
    record(out, i, rep.violations);
    max_ratio = std::max(max_ratio, rep.max_ratio);
    ++out.instances;
  }
  out.details["max_ratio"] = max_ratio;
  out.details["constant"] = 18.0;
}

inline void suite_seventysix(const Config& cfg, std::mt19937_64& rng, SuiteReport& out) {
  double max_ratio = 0.0;
  std::size_t levels = 0;
  for (std::size_t i = 0; i < cfg.spaces; ++i) {
    const auto s = random_space(rng, space_points(i));
    const auto arena = step_arena(s, cfg.max_jumps);
    auto [f, g] = random_hajlasz_pair(rng, s, cfg.p, i);
    // plant one large value so several truncation levels are visited
    auto v = g.values();
    v[uniform_index(rng, s.size())] = std::ldexp(1.0, 6 + static_cast<int>(uniform_index(rng, 10)));
    const ScalarFunction planted(std::move(v));
    const auto rep = pipeline_76(f, planted, cfg.p, s, arena, cfg.tol);
    if (!rep.precondition_ok) out.violations.push_back({i, "precondition: " + rep.precondition, 0.0, 0.0, 0.0});
    record(out, i, rep.violations);
    max_ratio = std::max(max_ratio, rep.max_ratio);
    levels += rep.levels;
    ++out.instances;
  }
  out.details["max_ratio"] = max_ratio;
  out.details["constant"] = 76.0;
  out.details["levels"] = levels;
}

inline void suite_plans(const Config& cfg, std::mt19937_64& rng, SuiteReport& out) {
  for (std::size_t i = 0; i < cfg.spaces; ++i) {
    const auto s = random_space(rng, space_points(i));
    const auto f = random_function(rng, s.size());
    const auto g = random_function(rng, s.size(), 0.0, 2.0);
    double dmin = kInf;
    for (std::size_t x = 0; x < s.size(); ++x)
      for (std::size_t y = x + 1; y < s.size(); ++y) dmin = std::min(dmin, s.distance(x, y));
    std::vector<TestPlan> plans;
    std::vector<std::pair<std::size_t, std::size_t>> owner;
    for (std::size_t x = 0; x < s.size(); ++x)
      for (std::size_t y = x + 1; y < s.size(); ++y) {
        plans.push_back(product_plan(s, x, y, 0.25 * dmin));
        owner.emplace_back(x, y);
      }
    const auto pr = plan_check(f, g, plans, s, cfg.tol);
    std::vector<std::pair<std::size_t, std::size_t>> lhs;
    for (const auto& w : pr.witnesses) lhs.push_back(owner[w.curve]);
    std::sort(lhs.begin(), lhs.end());
    const auto rhs = pair_set(hajlasz_check(f, g.scaled(0.5), s, {}, cfg.tol));
    out.checked += pr.checked;
    if (lhs != rhs) out.violations.push_back({i, "plan reduction " + pair_list(lhs) + " vs " + pair_list(rhs), 0.0, 0.0, 0.0});
    for (const auto& pl : plans) {
      const double c = marginal_constant(pl, s);
      ++out.checked;
      if (!std::isfinite(c)) out.violations.push_back({i, "marginal constant", c, kInf, -kInf});
    }
    ++out.instances;
  }
}

inline void suite_fuglede(const Config& cfg, std::mt19937_64& rng, SuiteReport& out) {
  const int kmax = 8;
  for (std::size_t i = 0; i < cfg.spaces; ++i) {
    const auto s = random_space(rng, space_points(i));
    const auto arena = step_arena(s, cfg.max_jumps);
    const auto f = random_function(rng, s.size());
    for (int k = 1; k <= kmax; ++k) {
      // f_k = f + h with ||h||_p^p = 2^(-k(p+1))
      auto h = random_function(rng, s.size());
      const double scale = std::pow(std::ldexp(1.0, -k) , (cfg.p + 1.0) / cfg.p) / lp_norm(h, s, cfg.p);
      h = h.scaled(scale);
      std::vector<double> absdiff(s.size());
      for (std::size_t x = 0; x < s.size(); ++x) absdiff[x] = std::fabs(h[x]);
      const ScalarFunction diff(std::move(absdiff));
      const double level = std::ldexp(1.0, -k);
      std::vector<std::size_t> members;
      for (std::size_t c = 0; c < arena.size(); ++c)
        if (sym_integrate(s, arena[c], diff) >= level) members.push_back(c);
      const double mod = modulus(arena.subset(s, members), cfg.p, s).value;
      ++out.checked;
      if (!leq(mod, level, cfg.tol))
        out.violations.push_back({i, "k=" + std::to_string(k) + " (" + std::to_string(members.size()) + " curves)", mod, level,
                                  level - mod});
    }
    ++out.instances;
  }
  out.details["levels"] = kmax;
}

}  // namespace detail

inline SuiteReport run_suite(const std::string& suite, const Config& cfg) {
  if (!(cfg.p >= 1.0)) throw std::invalid_argument("p must be >= 1");
  SuiteReport out;
  out.suite = suite;
  out.anchor = anchor(suite);
  std::mt19937_64 rng(cfg.seed);
  if (suite == "uno") detail::suite_uno(cfg, rng, out);
  else if (suite == "bounded18") detail::suite_bounded18(cfg, rng, out);
  else if (suite == "seventysix") detail::suite_seventysix(cfg, rng, out);
  else if (suite == "plans") detail::suite_plans(cfg, rng, out);
  else if (suite == "fuglede") detail::suite_fuglede(cfg, rng, out);
  return out;
}

inline std::vector<SuiteReport> run(const std::string& suite, const Config& cfg) {
  std::vector<SuiteReport> out;
  if (suite == "all")
    for (const auto& name : suite_names()) out.push_back(run_suite(name, cfg));
  else
    out.push_back(run_suite(suite, cfg));
  return out;
}

inline io::Json to_json(const SuiteReport& r) {
  io::Json v = io::Json::array();
  for (const auto& row : r.violations)
    v.push_back({{"space_id", row.space_id}, {"item", row.item}, {"lhs", row.lhs}, {"rhs", row.rhs}, {"slack", row.slack}});
  return {{"suite", r.suite}, {"anchor", r.anchor}, {"ok", r.ok()}, {"checked", r.checked}, {"instances", r.instances},
          {"violations", v}, {"details", r.details}};
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

inline std::string to_csv(const std::vector<SuiteReport>& reports) {
  std::string out = "suite,space_id,item,lhs,rhs,slack\n";
  char buf[128];
  for (const auto& r : reports)
    for (const auto& row : r.violations) {
      std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g\n", row.lhs, row.rhs, row.slack);
      out += r.suite + "," + std::to_string(row.space_id) + "," + csv_field(row.item) + buf;
    }
  return out;
}

}  // namespace tcurve::harness

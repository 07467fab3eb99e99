#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "tcurve/tcurve.hpp"

namespace {

using tcurve::io::Json;

struct Options {
  std::string space, curve, curves, function, out, format = "json", suite = "all", method = "automatic";
  double p = 2.0;
  double tol = tcurve::kDefaultTolerance;
  unsigned max_jumps = 2;
  std::size_t spaces = 5;
  std::uint64_t seed = 7;
};

constexpr int kOk = 0, kViolation = 1, kInput = 2;

tcurve::Space load_space(const std::string& path) {
  auto s = tcurve::io::read_space(tcurve::io::load(path), path);
  tcurve::checked(s);
  return s;
}

tcurve::convex::Method parse_method(const std::string& m) {
  using tcurve::convex::Method;
  if (m == "automatic") return Method::automatic;
  if (m == "simplex") return Method::simplex;
  if (m == "active_set") return Method::active_set;
  if (m == "barrier") return Method::barrier;
  throw tcurve::InputError("unknown method: " + m);
}

void emit(const Options& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text << '\n';
    return;
  }
  std::ofstream f(o.out);
  if (!f) throw tcurve::InputError(o.out + ": cannot write");
  f << text << '\n';
}

// flat key/value CSV for non-verify commands
std::string flat_csv(const Json& j) {
  std::string out = "key,value\n";
  for (const auto& [k, v] : j.items()) out += k + "," + tcurve::harness::csv_field(tcurve::io::dump(v)) + "\n";
  return out;
}

void emit_json(const Options& o, const Json& j) { emit(o, o.format == "csv" ? flat_csv(j) : tcurve::io::dump(j)); }

int cmd_validate(const Options& o) {
  const auto s = tcurve::io::read_space(tcurve::io::load(o.space), o.space);
  const auto r = tcurve::validate_space(s);
  Json j{{"ok", r.ok()}, {"n", s.size()}};
  if (!r.ok())
    j["violation"] = {{"invariant", r.violation->invariant}, {"indices", r.violation->indices}, {"message", tcurve::describe(*r.violation)}};
  emit_json(o, j);
  return r.ok() ? kOk : kInput;
}

int cmd_curve(const Options& o) {
  const auto s = load_space(o.space);
  const auto c = tcurve::io::read_curve(tcurve::io::load(o.curve), o.curve);
  tcurve::require_compatible(s, c);
  const auto vf = tcurve::variation_function(s, c);
  Json jumps = Json::array();
  for (const auto& [t, size] : tcurve::jumps(s, c)) jumps.push_back({{"time", t}, {"size", size}});
  Json knots = Json::array();
  for (const auto& k : vf.knots()) knots.push_back({{"time", k.time}, {"left", k.left}, {"value", k.value}});
  emit_json(o, {{"variation", vf.total()}, {"jumps", jumps}, {"variation_function", knots}, {"continuous", jumps.empty()},
                {"curve", tcurve::io::to_json(c)}, {"reversed", tcurve::io::to_json(tcurve::reverse(c))}});
  return kOk;
}

int cmd_integrate(const Options& o) {
  const auto s = load_space(o.space);
  const auto c = tcurve::io::read_curve(tcurve::io::load(o.curve), o.curve);
  tcurve::require_compatible(s, c);
  const auto f = tcurve::io::read_function(tcurve::io::load(o.function), o.function);
  tcurve::require_same_size(f, s, "function");
  emit_json(o, {{"integral", tcurve::io::detail::number_json(tcurve::integrate(s, c, f))},
                {"sym_integral", tcurve::io::detail::number_json(tcurve::sym_integrate(s, c, f))},
                {"variation", tcurve::variation(s, c)}});
  return kOk;
}

int cmd_modulus(const Options& o) {
  const auto s = load_space(o.space);
  const auto fam = tcurve::io::read_family(tcurve::io::load(o.curves), s, o.curves);
  if (!fam.has_rows()) throw tcurve::InputError(o.curves + ": modulus needs step curves");
  const auto r = tcurve::modulus(fam, o.p, s, parse_method(o.method));
  emit_json(o, {{"value", r.value}, {"density", tcurve::io::to_json(r.density)["values"]}, {"slacks", r.slacks},
                {"lower_bound", r.lower_bound}, {"method", tcurve::convex::to_string(r.method)}, {"tie", r.tie},
                {"curves", fam.size()}, {"p", o.p}});
  return kOk;
}

int cmd_hajlasz_min(const Options& o) {
  const auto s = load_space(o.space);
  const auto f = tcurve::io::read_function(tcurve::io::load(o.function), o.function);
  tcurve::require_same_size(f, s, "function");
  if (!f.finite()) throw tcurve::InputError(o.function + ": f must be finite");
  const auto r = tcurve::minimal_hajlasz(f, s, o.p, parse_method(o.method));
  emit_json(o, {{"g", tcurve::io::to_json(r.g)["values"]}, {"norm", r.norm}, {"norm_p", r.solution.value}, {"p", o.p},
                {"method", tcurve::convex::to_string(r.solution.method)}});
  return kOk;
}

int cmd_norms(const Options& o) {
  const auto s = load_space(o.space);
  const auto f = tcurve::io::read_function(tcurve::io::load(o.function), o.function);
  tcurve::require_same_size(f, s, "function");
  if (!f.finite()) throw tcurve::InputError(o.function + ": f must be finite");
  const auto arena = tcurve::step_arena(s, o.max_jumps);
  const auto r = tcurve::norms(f, s, o.p, arena);
  emit_json(o, {{"f_norm", r.f_norm}, {"hajlasz_inf", r.hajlasz_inf}, {"m_norm", r.m_norm}, {"arena_inf", r.arena_inf},
                {"n_tc_norm_lower", r.n_tc_lower}, {"sandwich_half_76", r.spec_interval},
                {"sandwich_76_half", r.theorem_interval}, {"caveat", r.caveat}, {"arena_curves", arena.size()},
                {"max_jumps", o.max_jumps}, {"p", o.p}});
  return r.spec_interval ? kOk : kViolation;
}

int cmd_verify(const Options& o) {
  tcurve::harness::Config cfg{o.spaces, o.seed, o.max_jumps, o.p, o.tol};
  const auto reports = tcurve::harness::run(o.suite, cfg);
  bool ok = true;
  for (const auto& r : reports) ok = ok && r.ok();
  if (o.format == "csv") {
    emit(o, tcurve::harness::to_csv(reports));
  } else {
    Json suites = Json::array();
    for (const auto& r : reports) suites.push_back(tcurve::harness::to_json(r));
    emit(o, tcurve::io::dump({{"ok", ok}, {"seed", o.seed}, {"spaces", o.spaces}, {"max_jumps", o.max_jumps}, {"p", o.p},
                              {"tolerance", o.tol}, {"suites", suites}}));
  }
  for (const auto& r : reports)
    std::cerr << r.suite << ": " << (r.ok() ? "ok" : "VIOLATIONS") << " (" << r.checked << " checks, "
              << r.violations.size() << " violations)\n";
  return ok ? kOk : kViolation;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  if (const char* env = std::getenv("MS_TOLERANCE")) {
    try {
      o.tol = std::stod(env);
    } catch (const std::exception&) {
      std::cerr << "error: MS_TOLERANCE is not a number\n";
      return kInput;
    }
  }

  CLI::App app{"Test-curve calculus on finite metric measure spaces"};
  app.require_subcommand(1);
  auto common = [&](CLI::App* sub) {
    sub->add_option("--out,-o", o.out, "Write the report here instead of stdout");
    sub->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--tolerance", o.tol, "Inequality slack (default 1e-9 or MS_TOLERANCE)");
  };
  auto exponent = [&](CLI::App* sub) { sub->add_option("--p", o.p, "Exponent p >= 1")->check(CLI::Range(1.0, 1e6)); };
  auto method = [&](CLI::App* sub) {
    sub->add_option("--method", o.method, "Solver")->check(CLI::IsMember({"automatic", "simplex", "active_set", "barrier"}));
  };

  auto* validate = app.add_subcommand("validate", "Check the metric measure space invariants");
  validate->add_option("--space", o.space)->required()->check(CLI::ExistingFile);
  common(validate);

  auto* curve = app.add_subcommand("curve", "Variation, jumps and reversal of a curve");
  curve->add_option("--space", o.space)->required()->check(CLI::ExistingFile);
  curve->add_option("--curve", o.curve)->required()->check(CLI::ExistingFile);
  common(curve);

  auto* integrate = app.add_subcommand("integrate", "Curve and symmetrized integrals of a function");
  integrate->add_option("--space", o.space)->required()->check(CLI::ExistingFile);
  integrate->add_option("--curve", o.curve)->required()->check(CLI::ExistingFile);
  integrate->add_option("--function", o.function)->required()->check(CLI::ExistingFile);
  common(integrate);

  auto* mod = app.add_subcommand("modulus", "p-modulus of a step-curve family");
  mod->add_option("--space", o.space)->required()->check(CLI::ExistingFile);
  mod->add_option("--curves", o.curves)->required()->check(CLI::ExistingFile);
  exponent(mod);
  method(mod);
  common(mod);

  auto* hmin = app.add_subcommand("hajlasz-min", "Minimal-norm Hajlasz gradient");
  hmin->add_option("--space", o.space)->required()->check(CLI::ExistingFile);
  hmin->add_option("--function", o.function)->required()->check(CLI::ExistingFile);
  exponent(hmin);
  method(hmin);
  common(hmin);

  auto* verify = app.add_subcommand("verify", "Run verification suites on random spaces");
  verify->add_option("--suite", o.suite)->check(CLI::IsMember({"uno", "bounded18", "seventysix", "plans", "fuglede", "all"}));
  verify->add_option("--spaces", o.spaces)->check(CLI::Range(1, 1000));
  verify->add_option("--seed", o.seed);
  verify->add_option("--max-jumps", o.max_jumps)->check(CLI::Range(1, 4));
  exponent(verify);
  common(verify);

  auto* norms = app.add_subcommand("norms", "Hajlasz and arena-restricted test-curve Sobolev norms");
  norms->add_option("--space", o.space)->required()->check(CLI::ExistingFile);
  norms->add_option("--function", o.function)->required()->check(CLI::ExistingFile);
  norms->add_option("--max-jumps", o.max_jumps)->check(CLI::Range(1, 4));
  exponent(norms);
  common(norms);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInput;
  }

  try {
    if (*validate) return cmd_validate(o);
    if (*curve) return cmd_curve(o);
    if (*integrate) return cmd_integrate(o);
    if (*mod) return cmd_modulus(o);
    if (*hmin) return cmd_hajlasz_min(o);
    if (*verify) return cmd_verify(o);
    if (*norms) return cmd_norms(o);
  } catch (const tcurve::InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInput;
  }
  return kInput;
}

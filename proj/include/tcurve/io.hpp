#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "tcurve/curve.hpp"
#include "tcurve/modulus.hpp"
#include "tcurve/space.hpp"

namespace tcurve::io {

using Json = nlohmann::json;

namespace detail {

inline std::size_t line_of(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

[[noreturn]] inline void fail(const std::string& where, const std::string& what) {
  throw InputError(where + ": " + what);
}

inline const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(where, std::string("missing field \"") + key + "\"");
  return *it;
}

inline double number(const Json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
  }
  fail(where, "expected a number or \"inf\"");
}

inline double finite_number(const Json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a finite number");
  return j.get<double>();
}

inline std::size_t index(const Json& j, const std::string& where) {
  if (!j.is_number_unsigned()) fail(where, "expected a point index");
  return j.get<std::size_t>();
}

inline std::vector<double> numbers(const Json& j, const std::string& where, bool allow_inf) {
  if (!j.is_array()) fail(where, "expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto w = where + "[" + std::to_string(i) + "]";
    out.push_back(allow_inf ? number(j[i], w) : finite_number(j[i], w));
  }
  return out;
}

inline Eigen::MatrixXd matrix(const Json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array of rows");
  const auto rows = j.size();
  std::size_t cols = 0;
  std::vector<std::vector<double>> data;
  for (std::size_t i = 0; i < rows; ++i) {
    data.push_back(numbers(j[i], where + "[" + std::to_string(i) + "]", false));
    if (i == 0) cols = data.back().size();
    else if (data.back().size() != cols) fail(where + "[" + std::to_string(i) + "]", "ragged row");
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t k = 0; k < cols; ++k) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = data[i][k];
  return m;
}

inline Eigen::VectorXd vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline Json number_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  return v;
}

inline void dump(const Json& j, std::string& out) {
  switch (j.type()) {
    case Json::value_t::object: {
      out += '{';
      bool first = true;
      for (const auto& [k, v] : j.items()) {  // std::map keeps keys sorted
        if (!first) out += ',';
        first = false;
        out += Json(k).dump();
        out += ':';
        dump(v, out);
      }
      out += '}';
      break;
    }
    case Json::value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ',';
        dump(j[i], out);
      }
      out += ']';
      break;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += number_json(v).dump();
        break;
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out += buf;
      break;
    }
    default:
      out += j.dump();
  }
}

}  // namespace detail

/// Parses JSON text; syntax errors become InputError with the line number.
inline Json parse(const std::string& text, const std::string& source = "input") {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InputError(source + ": malformed JSON at line " + std::to_string(detail::line_of(text, e.byte)) + ": " + e.what());
  }
}

inline Json load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path + ": cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

/// Keys sorted, floats with 17 significant digits, infinities as "inf".
inline std::string dump(const Json& j) {
  std::string out;
  detail::dump(j, out);
  return out;
}

// ---------------------------------------------------------------------------
// readers

/// `{ "n":..., "dist":[[...]], "weight":[...], "coords":[[...]]? }`. Shape
/// is checked here; metric invariants are left to validate_space.
inline Space read_space(const Json& j, const std::string& where = "space") {
  const auto dist = detail::matrix(detail::field(j, "dist", where), where + ".dist");
  const auto weight = detail::numbers(detail::field(j, "weight", where), where + ".weight", false);
  if (j.contains("n")) {
    const auto n = detail::index(j["n"], where + ".n");
    if (n != weight.size()) detail::fail(where + ".n", "does not match the weight length");
    if (static_cast<std::size_t>(dist.rows()) != n) detail::fail(where + ".dist", "does not have n rows");
  }
  std::optional<Eigen::MatrixXd> coords;
  if (j.contains("coords") && !j["coords"].is_null()) {
    coords = detail::matrix(j["coords"], where + ".coords");
    if (static_cast<std::size_t>(coords->rows()) != weight.size()) detail::fail(where + ".coords", "does not have n rows");
  }
  return Space(dist, detail::vector(weight), std::move(coords));
}

/// `{ "values":[...] }`, or a bare array; "inf" is the sentinel for +infinity.
inline ScalarFunction read_function(const Json& j, const std::string& where = "function") {
  const Json& v = j.is_array() ? j : detail::field(j, "values", where);
  return ScalarFunction(detail::numbers(v, where + ".values", true));
}

inline TestCurve read_curve(const Json& j, const std::string& where = "curve") {
  const auto dom = detail::numbers(detail::field(j, "domain", where), where + ".domain", false);
  if (dom.size() != 2) detail::fail(where + ".domain", "expected [a, b]");
  const auto& pieces = detail::field(j, "pieces", where);
  if (!pieces.is_array()) detail::fail(where + ".pieces", "expected an array");
  std::vector<Piece> out;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const auto w = where + ".pieces[" + std::to_string(i) + "]";
    const auto& p = pieces[i];
    const auto& type = detail::field(p, "type", w);
    if (type == "step") {
      out.emplace_back(StepPiece{detail::finite_number(detail::field(p, "start", w), w + ".start"),
                                 detail::index(detail::field(p, "point", w), w + ".point")});
    } else if (type == "polyline") {
      PolylinePiece poly;
      poly.times = detail::numbers(detail::field(p, "times", w), w + ".times", false);
      const auto verts = detail::matrix(detail::field(p, "vertices", w), w + ".vertices");
      for (Eigen::Index r = 0; r < verts.rows(); ++r) poly.vertices.emplace_back(verts.row(r).transpose());
      if (poly.times.empty()) detail::fail(w + ".times", "empty");
      if (p.contains("start") && detail::finite_number(p["start"], w + ".start") != poly.times.front())
        detail::fail(w + ".start", "does not match times[0]");
      if (p.contains("end") && detail::finite_number(p["end"], w + ".end") != poly.times.back())
        detail::fail(w + ".end", "does not match the last time");
      out.emplace_back(std::move(poly));
    } else {
      detail::fail(w + ".type", "expected \"step\" or \"polyline\"");
    }
  }
  try {
    return TestCurve({dom[0], dom[1]}, std::move(out));
  } catch (const std::invalid_argument& e) {
    detail::fail(where, e.what());
  }
}

/// A list of curves, `{ "curves":[...] }`, or `{ "enumerate": {"max_jumps": J} }`.
inline CurveFamily read_family(const Json& j, const Space& s, const std::string& where = "family") {
  if (j.is_object() && j.contains("enumerate")) {
    const auto& e = j["enumerate"];
    const auto jumps = detail::index(detail::field(e, "max_jumps", where + ".enumerate"), where + ".enumerate.max_jumps");
    if (jumps > 12) detail::fail(where + ".enumerate.max_jumps", "too large");
    return step_arena(s, static_cast<unsigned>(jumps));
  }
  const Json& list = j.is_array() ? j : detail::field(j, "curves", where);
  if (!list.is_array()) detail::fail(where, "expected a list of curves");
  std::vector<TestCurve> curves;
  for (std::size_t i = 0; i < list.size(); ++i) curves.push_back(read_curve(list[i], where + "[" + std::to_string(i) + "]"));
  return CurveFamily(s, std::move(curves));
}

// ---------------------------------------------------------------------------
// writers

inline Json to_json(const Space& s) {
  Json j;
  j["n"] = s.size();
  j["dist"] = Json::array();
  for (Eigen::Index i = 0; i < s.dist().rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < s.dist().cols(); ++k) row.push_back(s.dist()(i, k));
    j["dist"].push_back(row);
  }
  j["weight"] = Json::array();
  for (Eigen::Index i = 0; i < s.weights().size(); ++i) j["weight"].push_back(s.weights()(i));
  if (s.coords()) {
    j["coords"] = Json::array();
    for (Eigen::Index i = 0; i < s.coords()->rows(); ++i) {
      Json row = Json::array();
      for (Eigen::Index k = 0; k < s.coords()->cols(); ++k) row.push_back((*s.coords())(i, k));
      j["coords"].push_back(row);
    }
  }
  return j;
}

inline Json to_json(const ScalarFunction& f) {
  Json v = Json::array();
  for (double x : f.values()) v.push_back(detail::number_json(x));
  return Json{{"values", v}};
}

inline Json to_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(detail::number_json(v(i)));
  return out;
}

inline Json to_json(const TestCurve& c) {
  Json pieces = Json::array();
  for (const auto& p : c.pieces()) {
    if (const auto* st = std::get_if<StepPiece>(&p)) {
      pieces.push_back({{"type", "step"}, {"start", st->start}, {"point", st->point}});
    } else {
      const auto& poly = std::get<PolylinePiece>(p);
      Json verts = Json::array();
      for (const auto& v : poly.vertices) verts.push_back(to_json(v));
      pieces.push_back({{"type", "polyline"}, {"start", poly.start()}, {"end", poly.end()}, {"times", poly.times}, {"vertices", verts}});
    }
  }
  return Json{{"domain", {c.domain().lo, c.domain().hi}}, {"pieces", pieces}};
}

}  // namespace tcurve::io

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "support.hpp"

using namespace tcurve;
using namespace support;
using io::Json;

TEST_CASE("space files") {
  const auto s = io::read_space(io::parse(R"({"n": 2, "dist": [[0, 1], [1, 0]], "weight": [1, 2]})"));
  CHECK(s.size() == 2);
  CHECK(s.weight(1) == 2.0);
  CHECK_FALSE(s.embedded());
  const auto e = io::read_space(io::parse(R"({"dist": [[0, 5], [5, 0]], "weight": [1, 1], "coords": [[0, 0], [3, 4]]})"));
  CHECK(e.embedded());
  CHECK(validate_space(e).ok());
  CHECK_THROWS_AS(io::read_space(io::parse(R"({"n": 3, "dist": [[0, 1], [1, 0]], "weight": [1, 1]})")), InputError);
  CHECK_THROWS_AS(io::read_space(io::parse(R"({"dist": [[0, 1], [1]], "weight": [1, 1]})")), InputError);
  CHECK_THROWS_AS(io::read_space(io::parse(R"({"dist": [[0, 1], [1, 0]]})")), InputError);
  CHECK_THROWS_AS(io::read_space(io::parse(R"({"dist": [[0, "x"], [1, 0]], "weight": [1, 1]})")), InputError);
}

TEST_CASE("malformed JSON reports the line") {
  try {
    io::parse("{\n  \"a\": 1\n  \"b\": 2\n}", "f.json");
    FAIL("expected an error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("f.json: malformed JSON at line 3") != std::string::npos);
  }
  CHECK_THROWS_AS(io::load("/nonexistent/space.json"), InputError);
}

TEST_CASE("field errors name the field") {
  try {
    io::read_curve(io::parse(R"({"domain": [0, 1], "pieces": [{"type": "step", "start": 0}]})"));
    FAIL("expected an error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("curve.pieces[0]") != std::string::npos);
    CHECK(std::string(e.what()).find("point") != std::string::npos);
  }
}

TEST_CASE("function files accept the inf sentinel") {
  const auto f = io::read_function(io::parse(R"({"values": [1, "inf", -2.5]})"));
  CHECK(f[0] == 1.0);
  CHECK(std::isinf(f[1]));
  CHECK(f[2] == -2.5);
  CHECK(io::read_function(io::parse("[0, 1]")).size() == 2);
  CHECK_THROWS_AS(io::read_function(io::parse(R"({"values": ["many"]})")), InputError);
  CHECK(io::dump(io::to_json(f)) == R"({"values":[1,"inf",-2.5]})");
}

TEST_CASE("curves round-trip") {
  std::mt19937_64 rng(71);
  for (int i = 0; i < 30; ++i) {
    const TestCurve c = i % 2 ? random_step_curve(rng, 5, 3) : random_polyline(rng, 4);
    CHECK(io::read_curve(io::parse(io::dump(io::to_json(c)))) == c);
  }
  const auto mixed = io::read_curve(io::load(std::string(TCURVE_FIXTURES) + "/square_polyline.json"));
  CHECK(mixed.piece_count() == 2);
  const auto sq = io::read_space(io::load(std::string(TCURVE_FIXTURES) + "/square.json"));
  CHECK(variation(sq, mixed) == 2.0 + 1.0);
}

TEST_CASE("polyline start and end must match the times") {
  CHECK_THROWS_AS(io::read_curve(io::parse(R"({"domain": [0, 1], "pieces": [
      {"type": "polyline", "start": 0.5, "end": 1, "times": [0, 1], "vertices": [[0, 0], [1, 0]]}]})")),
                  InputError);
  CHECK_THROWS_AS(io::read_curve(io::parse(R"({"domain": [0, 1], "pieces": [{"type": "spline", "start": 0}]})")), InputError);
  CHECK_THROWS_AS(io::read_curve(io::parse(R"({"domain": [1, 0], "pieces": [{"type": "step", "start": 1, "point": 0}]})")),
                  InputError);
}

TEST_CASE("family files") {
  const auto s = two_points();
  const auto list = io::read_family(io::load(std::string(TCURVE_FIXTURES) + "/two_point_curve.json"), s);
  CHECK(list.size() == 1);
  const auto wrapped = io::read_family(io::parse(R"({"curves": [{"domain": [0, 1], "pieces": [
      {"type": "step", "start": 0, "point": 1}, {"type": "step", "start": 0.5, "point": 0}]}]})"), s);
  CHECK(wrapped[0] == TestCurve::two_point(1, 0));
  const auto en = io::read_family(io::parse(R"({"enumerate": {"max_jumps": 2}})"), s);
  CHECK(en.size() == enumerate_step_curves(s, 2).size());
  CHECK_THROWS_AS(io::read_family(io::parse(R"({"enumerate": {"max_jumps": -1}})"), s), InputError);
  CHECK_THROWS_AS(io::read_family(io::parse(R"([{"domain": [0, 1], "pieces": [{"type": "step", "start": 0, "point": 1}]}])"), s),
                  InputError);
}

TEST_CASE("deterministic dump: sorted keys, 17 significant digits") {
  Json j;
  j["zeta"] = 0.1;
  j["alpha"] = {1, 2.5};
  j["mid"] = {{"b", 1.0 / 3.0}, {"a", true}};
  CHECK(io::dump(j) == R"({"alpha":[1,2.5],"mid":{"a":true,"b":0.33333333333333331},"zeta":0.10000000000000001})");
  CHECK(io::dump(Json(std::numeric_limits<double>::infinity())) == R"("inf")");
}

TEST_CASE("space writer round-trips") {
  std::mt19937_64 rng(72);
  const auto s = random_space(rng, 4);
  const auto back = io::read_space(io::parse(io::dump(io::to_json(s))));
  CHECK(back.dist() == s.dist());
  CHECK(back.weights() == s.weights());
  CHECK(*back.coords() == *s.coords());
}

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "tcurve/space.hpp"

using namespace tcurve;
using Catch::Approx;

namespace {

Space table(std::initializer_list<std::initializer_list<double>> rows, std::vector<double> w) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd d(n, n);
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) d(i, j++) = v;
    ++i;
  }
  return Space(d, Eigen::Map<Eigen::VectorXd>(w.data(), n));
}

}  // namespace

TEST_CASE("validate_space accepts the one- and two-point spaces") {
  CHECK(validate_space(table({{0}}, {1})).ok());
  CHECK(validate_space(table({{0, 1}, {1, 0}}, {1, 1})).ok());
}

TEST_CASE("validate_space reports asymmetry with indices") {
  const auto r = validate_space(table({{0, 1}, {2, 0}}, {1, 1}));
  REQUIRE_FALSE(r.ok());
  CHECK(r.violation->invariant == "symmetry");
  CHECK(r.violation->indices == std::vector<std::size_t>{0, 1});
  CHECK_THROWS_AS(checked(table({{0, 1}, {2, 0}}, {1, 1})), InputError);
}

TEST_CASE("validate_space reports each invariant") {
  CHECK(validate_space(table({{0, 1}, {1, 0}}, {1, 0})).violation->invariant == "weight");
  CHECK(validate_space(table({{0, 1}, {1, 0}}, {1, -2})).violation->invariant == "weight");
  CHECK(validate_space(table({{1, 1}, {1, 0}}, {1, 1})).violation->invariant == "diagonal");
  CHECK(validate_space(table({{0, 0}, {0, 0}}, {1, 1})).violation->invariant == "positivity");
  const auto tri = validate_space(table({{0, 1, 3}, {1, 0, 1}, {3, 1, 0}}, {1, 1, 1}));
  REQUIRE_FALSE(tri.ok());
  CHECK(tri.violation->invariant == "triangle");
  CHECK(tri.violation->indices == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("exact triangle check accepts degenerate triangles and rejects one ulp over") {
  CHECK(validate_space(table({{0, 1, 2}, {1, 0, 1}, {2, 1, 0}}, {1, 1, 1})).ok());
  // 0.1 + 0.2 rounds above 0.3; exact comparison on stored values must accept
  CHECK(validate_space(table({{0, 0.1, 0.3}, {0.1, 0, 0.2}, {0.3, 0.2, 0}}, {1, 1, 1})).ok());
  const double over = std::nextafter(2.0, 3.0);
  CHECK_FALSE(validate_space(table({{0, 1, over}, {1, 0, 1}, {over, 1, 0}}, {1, 1, 1})).ok());
}

TEST_CASE("embedded spaces must match their coordinates") {
  Eigen::MatrixXd c(2, 2);
  c << 0, 0, 3, 4;
  auto s = Space::from_points(c, Eigen::Vector2d(1, 1));
  CHECK(s.distance(0, 1) == 5.0);
  CHECK(validate_space(s).ok());
  Eigen::MatrixXd d(2, 2);
  d << 0, 5.1, 5.1, 0;
  CHECK(validate_space(Space(d, Eigen::Vector2d(1, 1), c)).violation->invariant == "embedding");
}

TEST_CASE("random spaces always validate") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 300; ++i) {
    const auto s = random_space(rng, 2 + static_cast<std::size_t>(i % 6));
    REQUIRE(validate_space(s).ok());
    for (std::size_t x = 0; x < s.size(); ++x) {
      CHECK(s.weight(x) >= 0.5);
      CHECK(s.weight(x) <= 2.0);
    }
  }
}

TEST_CASE("random spaces are reproducible from the seed") {
  std::mt19937_64 a(5), b(5);
  CHECK(random_space(a, 4).dist() == random_space(b, 4).dist());
}

TEST_CASE("lp_norm examples") {
  const auto s = table({{0, 1}, {1, 0}}, {1, 1});
  CHECK(lp_norm(ScalarFunction({0.0, 0.0}), s, 2.0) == 0.0);
  CHECK(lp_norm(ScalarFunction({1.0, 1.0}), s, 2.0) == Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(std::isinf(lp_norm(ScalarFunction({kInf, 0.0}), s, 2.0)));
  CHECK(lp_norm(ScalarFunction({-3.0, 4.0}), s, 1.0) == 7.0);
  CHECK_THROWS_AS(lp_norm(ScalarFunction({1.0, 1.0}), s, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(lp_norm(ScalarFunction({1.0}), s, 2.0), InputError);
}

TEST_CASE("lp_norm is absolutely homogeneous") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const auto s = random_space(rng, 4);
    std::vector<double> v(4);
    for (auto& x : v) x = uniform(rng, -2, 2);
    const ScalarFunction f(v);
    const double c = uniform(rng, 0, 5), p = uniform(rng, 1, 4);
    CHECK(lp_norm(f.scaled(c), s, p) == Approx(c * lp_norm(f, s, p)).epsilon(1e-12).margin(1e-300));
  }
}

TEST_CASE("scaled functions keep 0 * inf = 0") {
  const ScalarFunction g({kInf, 1.0});
  CHECK(std::isinf(g.scaled(2.0)[0]));
  CHECK(g.scaled(0.0)[0] == 0.0);
}

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include <boost/multiprecision/cpp_int.hpp>

#include "support.hpp"

using namespace tcurve;
using namespace support;
using Catch::Approx;
using boost::multiprecision::cpp_rational;

TEST_CASE("two-point curve integrals") {
  const auto s = two_points(2.0);
  const auto c = TestCurve::two_point(0, 1);
  const ScalarFunction f({3.0, 5.0});
  CHECK(integrate(s, c, f) == 10.0);  // the atom sits at the landing point
  CHECK(integrate(s, reverse(c), f) == 6.0);
  CHECK(sym_integrate(s, c, f) == 8.0);
  CHECK(sym_integrate_exact(s, c, f) == cpp_rational(8));
}

TEST_CASE("symmetrized two-point identity in exact arithmetic") {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 50; ++i) {
    const auto s = random_space(rng, 4);
    const auto f = random_table(rng, 4, -1, 1);
    for (std::size_t x = 0; x < 4; ++x)
      for (std::size_t y = 0; y < 4; ++y) {
        if (x == y) continue;
        const auto expect = (cpp_rational(f[x]) + cpp_rational(f[y])) * cpp_rational(s.distance(x, y)) / 2;
        CHECK(sym_integrate_exact(s, TestCurve::two_point(x, y), f) == expect);
      }
  }
}

TEST_CASE("curve measure and symmetrized measure carry mass V") {
  std::mt19937_64 rng(32);
  for (int i = 0; i < 100; ++i) {
    const auto s = random_space(rng, 5);
    const TestCurve c = i % 2 ? random_step_curve(rng, 5, 4) : random_polyline(rng, 6);
    const double v = variation(s, c);
    CHECK(curve_measure(s, c).total_mass() == Approx(v).epsilon(1e-13));
    CHECK(sym_measure(s, c).total_mass() == Approx(v).epsilon(1e-13));
    if (c.is_step()) CHECK(integrate(s, c, ScalarFunction::constant(5, 1.0)) == Approx(v).epsilon(1e-13));
  }
}

TEST_CASE("integrating the constant 1 along a polyline gives its length") {
  std::mt19937_64 rng(33);
  const auto s = random_space(rng, 3);
  const auto c = random_polyline(rng, 5);
  const auto one = coordinate(s, [](const Eigen::VectorXd&) { return 1.0; });
  CHECK(integrate(s, c, one) == Approx(variation(s, c)).epsilon(1e-13));
  CHECK(sym_integrate(s, c, one) == Approx(variation(s, c)).epsilon(1e-13));
}

TEST_CASE("coordinate integrals along segments") {
  Eigen::MatrixXd pts(2, 2);
  pts << 0, 0, 1, 1;
  const auto s = Space::from_points(pts, Eigen::Vector2d(1, 1));
  const auto c = TestCurve::polyline({0, 1}, {0, 1}, {Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1)});
  // |x|^2 = u^2 at arc length u along the diagonal
  const auto sq = coordinate(s, [](const Eigen::VectorXd& x) { return x.squaredNorm(); });
  CHECK(integrate(s, c, sq) == Approx(std::pow(std::sqrt(2.0), 3) / 3).epsilon(1e-14));
  const auto first = coordinate(s, [](const Eigen::VectorXd& x) { return x(0); });
  CHECK(integrate(s, c, first) == Approx(std::sqrt(2.0) / 2).epsilon(1e-14));
  const auto wiggle = coordinate(s, [](const Eigen::VectorXd& x) { return std::sin(10 * x(0)); });
  CHECK(integrate(s, c, wiggle) == Approx(std::sqrt(2.0) * (1 - std::cos(10.0)) / 10).epsilon(1e-12));
}

TEST_CASE("symmetrized and plain integrals agree on continuous curves") {
  std::mt19937_64 rng(34);
  for (int i = 0; i < 30; ++i) {
    const auto s = random_space(rng, 3);
    const auto c = random_polyline(rng, 5);
    const auto f = coordinate(s, [](const Eigen::VectorXd& x) { return std::exp(x(0)) + x(1) * x(1); });
    CHECK(sym_integrate(s, c, f) == Approx(integrate(s, c, f)).epsilon(1e-12));
  }
}

TEST_CASE("symmetrized integral is reversal invariant and matches mu^S") {
  std::mt19937_64 rng(35);
  for (int i = 0; i < 200; ++i) {
    const auto s = random_space(rng, 5);
    const auto c = random_step_curve(rng, 5, 1 + static_cast<unsigned>(i % 4));
    const auto f = random_table(rng, 5);
    CHECK(sym_integrate(s, reverse(c), f) == Approx(sym_integrate(s, c, f)).epsilon(1e-14));
    CHECK(sym_measure(s, c).integrate(f) == Approx(sym_integrate(s, c, f)).epsilon(1e-14));
    // jump-by-jump oracle: half of each jump on each side
    double oracle = 0.0;
    for (double t : c.boundaries()) {
      const auto x = eval_left(c, t).index, y = eval(c, t).index;
      oracle += 0.5 * (f[x] + f[y]) * s.distance(x, y);
    }
    CHECK(sym_integrate(s, c, f) == Approx(oracle).epsilon(1e-14));
  }
}

TEST_CASE("infinite integrands") {
  const auto s = from_table({{0, 1, 1}, {1, 0, 1}, {1, 1, 0}}, {1, 1, 1});
  const auto c = TestCurve::two_point(0, 1);
  CHECK(sym_integrate(s, c, ScalarFunction({0.0, 0.0, kInf})) == 0.0);
  CHECK(std::isinf(sym_integrate(s, c, ScalarFunction({kInf, 0.0, 0.0}))));
}

TEST_CASE("table functions cannot be read off the point set") {
  std::mt19937_64 rng(36);
  const auto s = random_space(rng, 3);
  CHECK_THROWS_AS(integrate(s, random_polyline(rng, 3), ScalarFunction::constant(3, 1.0)), std::invalid_argument);
}

TEST_CASE("interval decomposition reconstructs the integral") {
  std::mt19937_64 rng(37);
  for (int i = 0; i < 50; ++i) {
    const auto s = random_space(rng, 5);
    const auto c = random_step_curve(rng, 5, 4);
    const auto f = random_table(rng, 5);
    const double whole = sym_integrate(s, c, f);
    for (double t : c.boundaries()) {
      const auto d = decompose_at(s, c, t, table(f));
      CHECK(d.bridge > 0.0);
      CHECK(d.total() == Approx(whole).epsilon(1e-13));
    }
    for (int k = 1; k < 64; k += 7) {
      const double t = k / 64.0 + 1.0 / 1024;
      const auto d = decompose_at(s, c, t, table(f));
      CHECK(d.bridge == 0.0);
      CHECK(d.total() == Approx(whole).epsilon(1e-13));
    }
  }
  CHECK_THROWS_AS(decompose_at(two_points(), TestCurve::two_point(0, 1), 0.0, table(ScalarFunction({1.0, 1.0}))),
                  std::invalid_argument);
}

TEST_CASE("decomposition of a polyline followed by a jump") {
  Eigen::MatrixXd pts(3, 2);
  pts << 0, 0, 1, 0, 0, 2;
  const auto s = Space::from_points(pts, Eigen::Vector3d(1, 1, 1));
  const TestCurve c({0, 1}, {PolylinePiece{{0, 0.5}, {Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0)}}, StepPiece{0.5, 2}});
  const auto f = coordinate(s, [](const Eigen::VectorXd& x) { return 1 + x(0) + x(1); });
  const auto d = decompose_at(s, c, 0.5, f);
  CHECK(d.left == Approx(1.5).epsilon(1e-14));
  CHECK(d.bridge == Approx(0.5 * (2.0 + 3.0) * std::sqrt(5.0)).epsilon(1e-14));
  CHECK(d.right == 0.0);
  CHECK(d.total() == Approx(sym_integrate(s, c, f)).epsilon(1e-13));
}

TEST_CASE("Riemann sums converge at first order") {
  std::mt19937_64 rng(38);
  for (int i = 0; i < 10; ++i) {
    const auto s = random_space(rng, 3);
    const auto c = random_polyline(rng, 6);
    const auto f = coordinate(s, [](const Eigen::VectorXd& x) { return std::cos(3 * x(0)) + x(1); });
    const double exact = integrate(s, c, f);
    double prev_ratio = 0.0;
    for (unsigned k = 8; k <= 16; k += 4) {
      const auto part = dyadic_partition(c.domain(), k);
      const double err = std::fabs(riemann_approx(s, c, f, part) - exact);
      const double ratio = err / part.diameter();
      CHECK(std::isfinite(ratio));
      if (prev_ratio > 0.0) CHECK(ratio <= 2 * prev_ratio + 1e-6);
      prev_ratio = ratio;
    }
  }
}

TEST_CASE("Riemann sums on step curves are exact once the partition contains the jumps") {
  std::mt19937_64 rng(39);
  const auto s = random_space(rng, 4);
  const auto c = random_step_curve(rng, 4, 3, 4);
  const auto f = random_table(rng, 4);
  CHECK(riemann_approx(s, c, table(f), dyadic_partition(c.domain(), 4)) == Approx(integrate(s, c, f)).epsilon(1e-14));
}

TEST_CASE("tails vanish from both sides") {
  std::mt19937_64 rng(40);
  const auto s = random_space(rng, 4);
  const auto c = random_step_curve(rng, 4, 4, 3);
  const auto f = random_table(rng, 4);
  const double t = c.boundaries()[1];
  std::vector<double> left, right;
  for (int n = 1; n <= 30; ++n) {
    left.push_back(t - std::ldexp(1.0, -n - 3));
    right.push_back(t + std::ldexp(1.0, -n - 3));
  }
  const auto l = tail_vanishes(s, c, table(f), t, Side::left, left);
  const auto r = tail_vanishes(s, c, table(f), t, Side::right, right);
  CHECK(l.vanished);
  CHECK(r.vanished);
  CHECK(l.values.back() == 0.0);
  CHECK(l.values.front() >= l.values.back());

  Eigen::MatrixXd pts(2, 2);
  pts << 0, 0, 1, 0;
  const auto e = Space::from_points(pts, Eigen::Vector2d(1, 1));
  const auto seg = TestCurve::polyline({0, 1}, {0, 1}, {Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0)});
  const auto one = coordinate(e, [](const Eigen::VectorXd&) { return 1.0; });
  std::vector<double> toward_half;
  for (int n = 1; n <= 30; ++n) toward_half.push_back(0.5 - std::ldexp(1.0, -n - 3));
  const auto lt = tail_vanishes(e, seg, one, 0.5, Side::left, toward_half);
  CHECK(lt.vanished);
  CHECK(lt.values.back() == Approx(std::ldexp(1.0, -33)).epsilon(1e-9));
  CHECK_THROWS_AS(tail_vanishes(e, seg, one, 0.5, Side::right, toward_half), std::invalid_argument);
}

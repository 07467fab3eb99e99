#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "tcurve/convex.hpp"
#include "tcurve/space.hpp"

using namespace tcurve;
using namespace tcurve::convex;
using Catch::Approx;

namespace {

/// Holder's inequality: min sum m x^p s.t. a.x >= 1 has value (sum a^q m^(1-q))^(1-p), q = p/(p-1).
double single_row_value(const Eigen::VectorXd& a, const Eigen::VectorXd& m, double p) {
  if (p == 1.0) return (m.array() / a.array()).minCoeff();
  const double q = p / (p - 1.0);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) acc += std::pow(a(i), q) * std::pow(m(i), 1.0 - q);
  return std::pow(acc, 1.0 - p);
}

PowerProgram random_program(std::mt19937_64& rng, Eigen::Index k, Eigen::Index n, double p) {
  PowerProgram prog{Eigen::MatrixXd(k, n), Eigen::VectorXd(n), p};
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < n; ++j) prog.rows(i, j) = unit_uniform(rng) < 0.4 ? 0.0 : uniform(rng, 0.1, 2.0);
  for (Eigen::Index i = 0; i < k; ++i)
    if (prog.rows.row(i).sum() == 0.0) prog.rows(i, i % n) = 1.0;
  for (Eigen::Index j = 0; j < n; ++j) prog.weight(j) = uniform(rng, 0.5, 2.0);
  return prog;
}

void check_feasible(const PowerProgram& prog, const Solution& sol, double tol) {
  CHECK((sol.x.array() >= 0.0).all());
  CHECK(((prog.rows * sol.x).array() >= 1.0 - tol).all());
}

}  // namespace

TEST_CASE("single-row programs match the closed form for every method") {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 60; ++i) {
    const Eigen::Index n = 2 + i % 4;
    Eigen::VectorXd a(n), m(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      a(j) = uniform(rng, 0.1, 2.0);
      m(j) = uniform(rng, 0.5, 2.0);
    }
    for (double p : {1.0, 1.5, 2.0, 3.0}) {
      const PowerProgram prog{a.transpose(), m, p};
      const double expect = single_row_value(a, m, p);
      const auto sol = solve(prog);
      CHECK(sol.value == Approx(expect).epsilon(1e-8));
      CHECK(sol.lower_bound <= sol.value * (1 + 1e-12));
      check_feasible(prog, sol, 1e-9);
      if (p == 2.0) CHECK(solve(prog, Method::barrier).value == Approx(expect).epsilon(1e-8));
      if (p == 1.0) CHECK(solve(prog, Method::barrier).value == Approx(expect).epsilon(1e-7));
    }
  }
}

TEST_CASE("methods agree on random multi-row programs") {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 80; ++i) {
    const auto p2 = random_program(rng, 1 + i % 12, 2 + i % 5, 2.0);
    const auto as = solve(p2, Method::active_set), br = solve(p2, Method::barrier);
    CHECK(as.value == Approx(br.value).epsilon(1e-8));
    check_feasible(p2, as, 1e-9);
    CHECK(as.lower_bound == Approx(as.value).epsilon(1e-8));

    auto p1 = p2;
    p1.p = 1.0;
    const auto sx = solve(p1, Method::simplex), b1 = solve(p1, Method::barrier);
    CHECK(sx.value == Approx(b1.value).epsilon(1e-7));
    check_feasible(p1, sx, 1e-9);
    CHECK(sx.lower_bound == Approx(sx.value).epsilon(1e-9));
  }
}

TEST_CASE("general p: barrier gap certificate") {
  std::mt19937_64 rng(43);
  for (int i = 0; i < 40; ++i) {
    const double p = uniform(rng, 1.1, 4.0);
    const auto prog = random_program(rng, 1 + i % 8, 2 + i % 4, p);
    const auto sol = solve(prog);
    check_feasible(prog, sol, 1e-9);
    CHECK(sol.lower_bound <= sol.value * (1 + 1e-12));
    CHECK(sol.lower_bound >= sol.value * (1 - 1e-8));
  }
}

TEST_CASE("duplicate rows do not change the optimum") {
  std::mt19937_64 rng(44);
  auto prog = random_program(rng, 4, 3, 2.0);
  auto doubled = prog;
  doubled.rows = Eigen::MatrixXd(8, 3);
  doubled.rows << prog.rows, prog.rows;
  CHECK(solve(doubled).value == solve(prog).value);
}

TEST_CASE("p = 1 ties are flagged") {
  const PowerProgram prog{Eigen::RowVector2d(1, 1), Eigen::Vector2d(1, 1), 1.0};
  const auto sol = solve(prog);
  CHECK(sol.value == 1.0);
  CHECK(sol.tie);
  const PowerProgram strict{Eigen::RowVector2d(1, 2), Eigen::Vector2d(1, 1), 1.0};
  CHECK_FALSE(solve(strict).tie);
  CHECK(solve(strict).value == 0.5);
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(solve({Eigen::RowVector2d(1, 1), Eigen::Vector2d(1, 1), 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(solve({Eigen::RowVector2d(0, 0), Eigen::Vector2d(1, 1), 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(solve({Eigen::RowVector2d(-1, 2), Eigen::Vector2d(1, 1), 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(solve({Eigen::RowVector2d(1, 1), Eigen::Vector2d(0, 1), 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(solve({Eigen::RowVector2d(1, 1), Eigen::Vector2d(1, 1), 2.0}, Method::simplex), std::invalid_argument);
  const auto empty = solve({Eigen::MatrixXd(0, 3), Eigen::Vector3d(1, 1, 1), 2.0});
  CHECK(empty.value == 0.0);
  CHECK(empty.x.isZero());
}

TEST_CASE("solutions are deterministic") {
  std::mt19937_64 rng(45);
  const auto prog = random_program(rng, 9, 5, 2.5);
  const auto a = solve(prog), b = solve(prog);
  CHECK(a.value == b.value);
  CHECK(a.x == b.x);
}

TEST_CASE("polishing keeps feasibility and never raises the value") {
  std::mt19937_64 rng(46);
  int polished = 0;
  for (int i = 0; i < 120; ++i) {
    const double p = std::vector<double>{1.0, 1.5, 2.0, 3.0}[static_cast<std::size_t>(i % 4)];
    auto prog = random_program(rng, 1 + static_cast<Eigen::Index>(uniform_index(rng, 8)), 2 + static_cast<Eigen::Index>(i % 4), p);
    prog.rows = convex::detail::unique_rows(prog.rows);
    auto sol = p == 1.0 ? convex::detail::simplex(prog) : convex::detail::barrier(prog, 1e-10);
    const double before = sol.value;
    if (!convex::detail::polish(prog, sol)) continue;
    ++polished;
    check_feasible(prog, sol, 1e-12);
    CHECK(sol.value <= before * (1 + 1e-8));
    CHECK(sol.lower_bound <= sol.value);
  }
  CHECK(polished >= 100);
}

TEST_CASE("an inactive extra row leaves the optimum bit-identical") {
  std::mt19937_64 rng(47);
  int compared = 0;
  for (int i = 0; i < 60; ++i) {
    const double p = std::vector<double>{1.0, 2.0, 3.0}[static_cast<std::size_t>(i % 3)];
    const auto base = random_program(rng, 4, 3, p);
    const auto sol = solve(base);
    // a row that is strictly satisfied at the optimum
    PowerProgram more = base;
    more.rows.conservativeResize(base.rows.rows() + 1, Eigen::NoChange);
    more.rows.row(base.rows.rows()) = Eigen::RowVectorXd::Constant(3, 4.0 / sol.x.sum());
    if ((more.rows.row(base.rows.rows()) * sol.x)(0) < 2.0) continue;
    ++compared;
    const auto other = solve(more);
    CHECK(other.value == sol.value);
    CHECK(other.x == sol.x);
  }
  CHECK(compared > 40);
}

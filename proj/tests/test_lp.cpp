#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "nnrange/lp.hpp"
#include "test_support.hpp"

using namespace nnrange;
using testing::vec;

namespace {

// Checks y >= 0, y^T A = 0 and y^T b < 0 for a system written as A x <= b
// with free variables: >= rows are negated first.
bool farkas_holds(const LinearProgram& lp, const Vector& y) {
  const auto n = static_cast<Eigen::Index>(lp.num_vars());
  Vector combo = Vector::Zero(n);
  double rhs = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < lp.num_rows(); ++i) {
    const auto& row = lp.rows[i];
    double yi = y(static_cast<Eigen::Index>(i));
    double sign = 1.0;
    if (row.relation == Relation::GreaterEqual) sign = -1.0;
    yi *= sign;
    if (row.relation != Relation::Equal && yi < -1e-12) return false;
    combo += yi * sign * row.coeffs;
    rhs += yi * sign * row.rhs;
    scale = std::max(scale, std::abs(yi));
  }
  if (scale == 0.0) return false;
  return combo.cwiseAbs().maxCoeff() <= 1e-9 * scale && rhs < -1e-9 * scale;
}

LinearProgram one_var(double obj, ObjectiveSense sense) {
  LinearProgram lp(1);
  lp.objective(0) = obj;
  lp.sense = sense;
  return lp;
}

}  // namespace

TEST_CASE("single bound maximum") {
  LinearProgram lp = one_var(1.0, ObjectiveSense::Maximize);
  lp.add_row(vec({1}), Relation::LessEqual, 3);
  lp.add_row(vec({1}), Relation::GreaterEqual, 0);
  const LpOutcome out = solve(lp);
  REQUIRE(out.optimal());
  CHECK(out.point(0) == doctest::Approx(3));
  CHECK(out.objective_value == doctest::Approx(3));
}

TEST_CASE("face optimum") {
  LinearProgram lp(2);
  lp.objective = vec({1, 1});
  lp.sense = ObjectiveSense::Maximize;
  lp.add_row(vec({1, 1}), Relation::LessEqual, 1);
  lp.set_bounds(0, 0, kInfinity);
  lp.set_bounds(1, 0, kInfinity);
  const LpOutcome out = solve(lp);
  REQUIRE(out.optimal());
  CHECK(out.objective_value == doctest::Approx(1).epsilon(1e-12));
}

TEST_CASE("contradictory rows are infeasible with a checked certificate") {
  LinearProgram lp(1);
  lp.add_row(vec({1}), Relation::LessEqual, 0);
  lp.add_row(vec({1}), Relation::GreaterEqual, 1);
  const LpOutcome out = solve(lp);
  REQUIRE(out.status == LpStatus::Infeasible);
  CHECK(farkas_holds(lp, out.farkas));
  CHECK(verify_farkas(lp, out.farkas));
  CHECK(feasible_point(lp).status == LpStatus::Infeasible);
}

TEST_CASE("open ray is unbounded") {
  LinearProgram lp = one_var(1.0, ObjectiveSense::Maximize);
  lp.add_row(vec({1}), Relation::GreaterEqual, 0);
  CHECK(solve(lp).status == LpStatus::Unbounded);
}

TEST_CASE("equality rows and bounds") {
  // min x + 2y + 3z, x + y + z = 1, all >= 0 -> x = 1.
  LinearProgram lp(3);
  lp.objective = vec({1, 2, 3});
  lp.add_row(vec({1, 1, 1}), Relation::Equal, 1);
  for (std::size_t j = 0; j < 3; ++j) lp.set_bounds(j, 0, kInfinity);
  const LpOutcome out = solve(lp);
  REQUIRE(out.optimal());
  CHECK(out.objective_value == doctest::Approx(1).epsilon(1e-12));
  CHECK(max_violation(lp, out.point) <= 1e-9);

  LinearProgram boxed = one_var(-1.0, ObjectiveSense::Minimize);
  boxed.set_bounds(0, -2, 5);
  CHECK(solve(boxed).objective_value == doctest::Approx(-5));
  boxed.set_bounds(0, 1, 0);
  CHECK(solve(boxed).status == LpStatus::Infeasible);
}

TEST_CASE("unit box feasibility point lies in the box") {
  const Polyhedron box = testing::box_poly(3, -1, 1);
  const LpOutcome out = feasible_point(box.as_lp());
  REQUIRE(out.optimal());
  CHECK(box.contains(out.point, 1e-9));
}

TEST_CASE("random systems built around a known point are feasible") {
  std::mt19937_64 gen(34);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 5;
    Vector x0(n);
    for (int j = 0; j < n; ++j) x0(j) = normal(gen);
    LinearProgram lp(static_cast<std::size_t>(n));
    for (int i = 0; i < 3 * n; ++i) {
      Vector row(n);
      for (int j = 0; j < n; ++j) row(j) = normal(gen);
      const double slack = std::abs(normal(gen));
      if (i % 3 == 0)
        lp.add_row(row, Relation::GreaterEqual, row.dot(x0) - slack);
      else
        lp.add_row(row, Relation::LessEqual, row.dot(x0) + slack);
    }
    const LpOutcome out = feasible_point(lp);
    REQUIRE(out.optimal());
    CHECK(max_violation(lp, out.point) <= 1e-7);
  }
}

TEST_CASE("unit simplex and box optima are exact") {
  for (int n = 1; n <= 6; ++n) {
    LinearProgram lp(static_cast<std::size_t>(n));
    lp.sense = ObjectiveSense::Maximize;
    for (int j = 0; j < n; ++j) {
      lp.objective(j) = j + 1;
      lp.set_bounds(static_cast<std::size_t>(j), 0, kInfinity);
    }
    lp.add_row(Vector::Ones(n), Relation::LessEqual, 1);
    CHECK(std::abs(solve(lp).objective_value - n) <= 1e-9);

    LinearProgram box(static_cast<std::size_t>(n));
    box.objective = Vector::LinSpaced(n, -1.0, 1.0);
    for (int j = 0; j < n; ++j) box.set_bounds(static_cast<std::size_t>(j), -1, 1);
    CHECK(std::abs(solve(box).objective_value - (-box.objective.cwiseAbs().sum())) <= 1e-9);
  }
}

TEST_CASE("optima match vertex enumeration on random bounded polytopes") {
  std::mt19937_64 gen(99);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + trial % 2;
    const int m = 2 * n + 4;
    Matrix a(m, n);
    Vector b(m);
    for (int i = 0; i < 2 * n; ++i) {
      a.row(i).setZero();
      a(i, i / 2) = i % 2 == 0 ? 1.0 : -1.0;
      b(i) = 2.0;
    }
    for (int i = 2 * n; i < m; ++i) {
      for (int j = 0; j < n; ++j) a(i, j) = normal(gen);
      b(i) = std::abs(normal(gen)) + 0.1;
    }
    const Polyhedron p(a, b);
    const Vector c = testing::uniform_point(gen, Vector::Constant(n, -1), Vector::Constant(n, 1));
    double best = -kInfinity;
    for (const Vector& v : testing::vertices(a, b)) best = std::max(best, c.dot(v));

    LinearProgram lp = p.as_lp();
    lp.objective = c;
    lp.sense = ObjectiveSense::Maximize;
    const LpOutcome out = solve(lp);
    REQUIRE(out.optimal());
    CHECK(out.objective_value == doctest::Approx(best).epsilon(1e-9));

    // Row order must not change the optimum.
    std::vector<std::size_t> order(lp.rows.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), gen);
    LinearProgram shuffled = lp;
    for (std::size_t i = 0; i < order.size(); ++i) shuffled.rows[i] = lp.rows[order[i]];
    CHECK(std::abs(solve(shuffled).objective_value - out.objective_value) <= 1e-6);
  }
}

TEST_CASE("random infeasible systems carry valid certificates") {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + trial % 4;
    LinearProgram lp(static_cast<std::size_t>(n));
    // Rows a.x <= -1 and a.x >= 1 in disguise: a second row scaled by a positive factor.
    Vector a(n);
    for (int j = 0; j < n; ++j) a(j) = normal(gen);
    for (int i = 0; i < n; ++i) {
      Vector row(n);
      for (int j = 0; j < n; ++j) row(j) = normal(gen);
      lp.add_row(row, Relation::LessEqual, 5.0);
    }
    lp.add_row(a, Relation::LessEqual, -1.0);
    lp.add_row(2.5 * a, Relation::GreaterEqual, 2.5);
    const LpOutcome out = solve(lp);
    REQUIRE(out.status == LpStatus::Infeasible);
    CHECK(farkas_holds(lp, out.farkas));
    CHECK(verify_farkas(lp, out.farkas));
  }
}

TEST_CASE("degenerate Klee-Minty cube terminates at the optimum") {
  // max sum 2^(n-j) x_j s.t. 2 sum_{k<j} 2^(j-k) x_k + x_j <= 5^j.
  const int n = 7;
  LinearProgram lp(n);
  lp.sense = ObjectiveSense::Maximize;
  for (int j = 0; j < n; ++j) {
    lp.objective(j) = std::pow(2.0, n - 1 - j);
    lp.set_bounds(static_cast<std::size_t>(j), 0, kInfinity);
    Vector row = Vector::Zero(n);
    for (int k = 0; k < j; ++k) row(k) = std::pow(2.0, j - k + 1);
    row(j) = 1.0;
    lp.add_row(row, Relation::LessEqual, std::pow(5.0, j + 1));
  }
  const LpOutcome out = solve(lp);
  REQUIRE(out.optimal());
  CHECK(out.objective_value == doctest::Approx(std::pow(5.0, n)));

  // Highly degenerate: many redundant rows through the optimal vertex.
  LinearProgram deg(3);
  deg.objective = vec({1, 1, 1});
  deg.sense = ObjectiveSense::Maximize;
  for (int i = 1; i <= 30; ++i) deg.add_row(vec({1.0, 1.0 / i, 1.0 / (i * i)}), Relation::LessEqual, 1.0 + 1.0 / i + 1.0 / (i * i));
  for (std::size_t j = 0; j < 3; ++j) deg.set_bounds(j, 0, 1);
  const LpOutcome d = solve(deg);
  REQUIRE(d.optimal());
  CHECK(d.objective_value == doctest::Approx(3.0));
}

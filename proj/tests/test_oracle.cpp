#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "nnrange/error.hpp"
#include "nnrange/oracle.hpp"
#include "test_support.hpp"

using namespace nnrange;
using testing::mat;
using testing::vec;

TEST_CASE("worked example has four cells with the expected maps") {
  const std::vector<PatternCell> cells = enumerate_cells(testing::sr_network(), testing::unit_square());
  REQUIRE(cells.size() == 4);
  bool saw_both_on = false;
  for (const PatternCell& c : cells) {
    CHECK(c.feasible);
    if (c.pattern.layers == std::vector<std::vector<bool>>{{true, true}}) {
      saw_both_on = true;
      CHECK(c.map.coeffs(0) == doctest::Approx(0.5));
      CHECK(c.map.coeffs(1) == doctest::Approx(0.1));
      CHECK(c.map.offset == doctest::Approx(-0.3));
    }
  }
  CHECK(saw_both_on);

  const ExactRange r = exact_range(testing::sr_network(), testing::unit_square());
  CHECK(r.upper == doctest::Approx(0.3));
  CHECK(r.arg_upper(0) == doctest::Approx(1.0));
  CHECK(r.arg_upper(1) == doctest::Approx(1.0));
  CHECK(r.lower == doctest::Approx(0.0));
}

TEST_CASE("forced-active network has a single cell equal to P") {
  std::mt19937_64 gen(6);
  auto layers = testing::random_network(gen, 2, {3, 2}).layers();
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) layers[l].bias.setConstant(50.0);
  const Network net(2, layers);
  const Polyhedron box = testing::box_poly(2, -1, 1);
  const std::vector<PatternCell> cells = enumerate_cells(net, box);
  REQUIRE(cells.size() == 1);
  for (int i = 0; i < 200; ++i) {
    const Vector x = testing::uniform_point(gen, Vector::Constant(2, -1.5), Vector::Constant(2, 1.5));
    CHECK(cells[0].region.contains(x) == box.contains(x));
  }

  // One cell: the range is the LP optimum of its affine map.
  const AffineMap& map = cells[0].map;
  const ExactRange r = exact_range(net, box);
  CHECK(r.upper == doctest::Approx(map.coeffs.cwiseAbs().sum() + map.offset));
  CHECK(r.lower == doctest::Approx(-map.coeffs.cwiseAbs().sum() + map.offset));
}

TEST_CASE("cell maps agree with forward at their Chebyshev centres") {
  std::mt19937_64 gen(31);
  for (int trial = 0; trial < 20; ++trial) {
    const Network net = testing::random_network(gen, 2, {3});
    for (const PatternCell& c : enumerate_cells(net, testing::box_poly(2, -1, 1))) {
      Vector centre;
      try {
        centre = interior_sample(c.region.closure());
      } catch (const DegenerateSet&) {
        continue;
      }
      CHECK(std::abs(c.map(centre) - evaluate(net, centre)) <= 1e-9);
    }
  }
}

TEST_CASE("property: every point of P lies in exactly one cell with its own pattern") {
  std::mt19937_64 gen(52);
  for (int trial = 0; trial < 5; ++trial) {
    const Network net = testing::random_network(gen, 2, {4, 3});
    const std::vector<PatternCell> cells = enumerate_cells(net, testing::box_poly(2, -1, 1));
    CHECK(cells.size() <= (std::size_t{1} << 7));
    for (int i = 0; i < 2000; ++i) {
      const Vector x = testing::uniform_point(gen, Vector::Constant(2, -1), Vector::Constant(2, 1));
      int hits = 0;
      for (const PatternCell& c : cells) {
        if (!c.region.contains(x)) continue;
        ++hits;
        CHECK(c.pattern == activation_pattern(net, x));
        CHECK(std::abs(c.map(x) - evaluate(net, x)) <= 1e-9);
      }
      CHECK(hits == 1);
    }
  }
}

TEST_CASE("property: exact range agrees with vertex brute force and brackets samples") {
  std::mt19937_64 gen(73);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 1 + trial % 3;
    const Network net = testing::random_network(gen, n, {3, 2});
    const Polyhedron box = testing::box_poly(n, -1, 1);
    const ExactRange r = exact_range(net, box);
    const testing::BruteRange brute = testing::brute_range(net, box);
    CHECK(r.upper == doctest::Approx(brute.upper).epsilon(1e-9));
    CHECK(r.lower == doctest::Approx(brute.lower).epsilon(1e-9));
    for (int i = 0; i < 1000; ++i) {
      const double v =
          evaluate(net, testing::uniform_point(gen, Vector::Constant(static_cast<Eigen::Index>(n), -1), Vector::Constant(static_cast<Eigen::Index>(n), 1)));
      CHECK(v <= r.upper + 1e-9);
      CHECK(v >= r.lower - 1e-9);
    }
  }
}

TEST_CASE("continuity: neighbouring cells agree on shared boundaries") {
  const Network net = testing::sr_network();
  const std::vector<PatternCell> cells = enumerate_cells(net, testing::unit_square());
  // Along x = y the first neuron switches; along x + y = 1 the second.
  for (double s = 0.0; s <= 1.0; s += 0.05) {
    const Vector diag = vec({s, s});
    const Vector anti = vec({s, 1 - s});
    for (const PatternCell& c : cells) {
      if (c.region.closure().contains(diag, 1e-12)) CHECK(std::abs(c.map(diag) - evaluate(net, diag)) <= 1e-9);
      if (c.region.closure().contains(anti, 1e-12)) CHECK(std::abs(c.map(anti) - evaluate(net, anti)) <= 1e-9);
    }
  }
}

TEST_CASE("grid range is an inner approximation") {
  const GridRange g = grid_range(testing::sr_network(), testing::unit_square(), 101);
  CHECK(g.upper <= 0.3 + 1e-12);
  CHECK(g.upper >= 0.3 - 0.01);
  CHECK(g.samples == 101 * 101);

  const Network constant(2, {Layer{Matrix::Zero(2, 2), vec({0, 0}), true}, Layer{Matrix::Zero(1, 2), vec({4}), false}});
  const GridRange c = grid_range(constant, testing::box_poly(2, -1, 1), 11);
  CHECK(c.lower == 4.0);
  CHECK(c.upper == 4.0);

  std::mt19937_64 gen(14);
  for (int trial = 0; trial < 10; ++trial) {
    const Network net = testing::random_network(gen, 2, {4, 3});
    const Polyhedron box = testing::box_poly(2, -1, 1);
    const ExactRange e = exact_range(net, box);
    const GridRange gr = grid_range(net, box, 41);
    CHECK(gr.lower >= e.lower - 1e-9);
    CHECK(gr.upper <= e.upper + 1e-9);
  }

  // |x| + |y| <= 1 misses all four corners of its bounding box.
  const Polyhedron diamond(mat({{1, 1}, {1, -1}, {-1, 1}, {-1, -1}}), vec({1, 1, 1, 1}));
  CHECK_THROWS_AS(grid_range(testing::sr_network(), diamond, 2), EmptyGrid);
  CHECK(grid_range(testing::sr_network(), diamond, 3).samples == 5);
  CHECK_THROWS_AS(grid_range(testing::random_network(gen, 5, {2}), testing::box_poly(5, -1, 1), 3), TooLarge);
}

TEST_CASE("monolithic MILP range") {
  const double delta = 1e-3;
  const MonolithicRange sr = monolithic_milp_range(testing::sr_network(), testing::unit_square(), delta);
  CHECK(sr.upper >= 0.3 - 1e-9);
  CHECK(sr.upper <= 0.3 + delta + 1e-9);

  const Network constant(2, {Layer{Matrix::Zero(2, 2), vec({0, 0}), true}, Layer{Matrix::Zero(1, 2), vec({-2}), false}});
  const MonolithicRange c = monolithic_milp_range(constant, testing::box_poly(2, -1, 1), delta);
  CHECK(std::abs(c.upper + 2) <= delta);
  CHECK(std::abs(c.lower + 2) <= delta);

  std::mt19937_64 gen(64);
  for (int trial = 0; trial < 15; ++trial) {
    const Network net = testing::random_network(gen, 2, {4, 3});
    const Polyhedron box = testing::box_poly(2, -1, 1);
    const ExactRange e = exact_range(net, box);
    const MonolithicRange m = monolithic_milp_range(net, box, delta);
    CHECK(m.upper >= e.upper - 1e-6);
    CHECK(m.upper <= e.upper + delta + 1e-6);
    CHECK(m.lower <= e.lower + 1e-6);
    CHECK(m.lower >= e.lower - delta - 1e-6);
  }
}

TEST_CASE("oracle refuses large networks") {
  std::mt19937_64 gen(1);
  const Network big = testing::random_network(gen, 2, {11, 10});
  CHECK_THROWS_AS(enumerate_cells(big, testing::box_poly(2, -1, 1)), TooLarge);
  CHECK_THROWS_AS(exact_range(big, testing::box_poly(2, -1, 1)), TooLarge);
}

TEST_CASE("cell dump lists one line per cell") {
  std::ostringstream out;
  write_cells(enumerate_cells(testing::sr_network(), testing::unit_square()), out);
  const std::string text = out.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);
}

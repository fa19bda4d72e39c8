#include <doctest.h>

#include <sstream>

#include "nnrange/error.hpp"
#include "nnrange/network.hpp"
#include "test_support.hpp"

using namespace nnrange;
using testing::mat;
using testing::vec;

namespace {

Network identity_net() { return Network(1, {Layer{mat({{1}}), vec({0}), true}, Layer{mat({{1}}), vec({0}), false}}); }

Network load_text(const std::string& text) {
  std::istringstream in(text);
  return load_network(in);
}

}  // namespace

TEST_CASE("load identity-on-nonnegatives network") {
  const Network net = load_text(
      R"({"inputs":1,"layers":[{"weights":[[1]],"bias":[0],"activation":"relu"},{"weights":[[1]],"bias":[0],"activation":"linear"}]})");
  CHECK(net == identity_net());
  CHECK(evaluate(net, vec({2.5})) == 2.5);
  CHECK(evaluate(net, vec({-3.0})) == 0.0);
}

TEST_CASE("load rejects a column count that does not match the previous layer") {
  CHECK_THROWS_AS(
      load_text(
          R"({"inputs":2,"layers":[{"weights":[[1,0],[0,1]],"bias":[0,0],"activation":"relu"},{"weights":[[1,1,1]],"bias":[0],"activation":"linear"}]})"),
      DimensionMismatch);
}

TEST_CASE("load reports malformed input with a location") {
  CHECK_THROWS_AS(load_text("{not json"), ParseError);
  CHECK_THROWS_AS(load_text(R"({"inputs":1,"layers":[]})"), ParseError);
  CHECK_THROWS_AS(load_text(
                      R"({"inputs":1,"layers":[{"weights":[[1]],"bias":[0],"activation":"linear"},{"weights":[[1]],"bias":[0],"activation":"linear"}]})"),
                  ParseError);
  try {
    load_text(
        R"({"inputs":1,"layers":[{"weights":[["a"]],"bias":[0],"activation":"relu"},{"weights":[[1]],"bias":[0],"activation":"linear"}]})");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("layers[0].weights[0]") != std::string::npos);
  }
}

TEST_CASE("small worked example: structure, values, patterns") {
  const Network net = testing::sr_network();
  CHECK(net.num_hidden_neurons() == 2);
  CHECK(evaluate(net, vec({0.8, 0.6})) == doctest::Approx(0.16).epsilon(1e-12));

  const ActivationPattern both_on = activation_pattern(net, vec({0.8, 0.6}));
  CHECK(both_on.layers == std::vector<std::vector<bool>>{{true, true}});
  const ActivationPattern both_off = activation_pattern(net, vec({0.2, 0.6}));
  CHECK(both_off.layers == std::vector<std::vector<bool>>{{false, false}});

  // A pre-activation of exactly zero counts as active.
  CHECK(activation_pattern(net, vec({0.5, 0.5})).layers == std::vector<std::vector<bool>>{{true, true}});
}

TEST_CASE("relu clips a negative pre-activation") {
  const Network net(1, {Layer{mat({{1}}), vec({-5}), true}, Layer{mat({{1}}), vec({0}), false}});
  CHECK(evaluate(net, vec({3.0})) == 0.0);
}

TEST_CASE("large positive biases force the all-active pattern") {
  std::mt19937_64 gen(3);
  Network base = testing::random_network(gen, 3, {4, 4});
  auto layers = base.layers();
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) layers[l].bias.setConstant(1e3);
  const Network net(3, layers);
  for (int i = 0; i < 20; ++i) {
    const ActivationPattern p = activation_pattern(net, testing::uniform_point(gen, Vector::Constant(3, -1), Vector::Constant(3, 1)));
    for (const auto& layer : p.layers)
      for (bool a : layer) CHECK(a);
  }
}

TEST_CASE("gradient: worked example and single neuron") {
  const Network net = testing::sr_network();
  for (const Vector& x : {vec({0.8, 0.6}), vec({0.9, 0.3}), vec({0.6, 0.55})}) {
    const Vector g = gradient(net, x);
    CHECK(g(0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(g(1) == doctest::Approx(0.1).epsilon(1e-15));
  }
  const Network single(2, {Layer{mat({{2, -1}}), vec({10}), true}, Layer{mat({{1}}), vec({0}), false}});
  const Vector g = gradient(single, vec({0, 0}));
  CHECK(g(0) == 2.0);
  CHECK(g(1) == -1.0);
}

TEST_CASE("gradient matches central finite differences away from kinks") {
  std::mt19937_64 gen(11);
  int checked = 0;
  while (checked < 100) {
    const Network net = testing::random_network(gen, 3, {5, 4}, 2);
    const Vector x = testing::uniform_point(gen, Vector::Constant(3, -1), Vector::Constant(3, 1));
    if (testing::min_abs_preactivation(net, x) < 1e-4) continue;
    for (std::size_t out = 0; out < 2; ++out) {
      const Vector g = gradient(net, x, out);
      const Vector fd = testing::finite_difference_gradient(net, x, out, 1e-6);
      CHECK((fd - g).cwiseAbs().maxCoeff() <= 1e-5 * std::max(1.0, g.cwiseAbs().maxCoeff()));
    }
    ++checked;
  }
}

TEST_CASE("affine restriction: worked example and all-inactive pattern") {
  const Network net = testing::sr_network();
  const AffineMap all_on = affine_restriction(net, ActivationPattern{{{true, true}}});
  CHECK(all_on.coeffs(0) == 0.5);
  CHECK(all_on.coeffs(1) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(all_on.offset == doctest::Approx(-0.3).epsilon(1e-15));

  std::mt19937_64 gen(5);
  const Network rnd = testing::random_network(gen, 2, {3, 2});
  const AffineMap off = affine_restriction(rnd, ActivationPattern{{{false, false, false}, {false, false}}});
  CHECK(off.coeffs.isZero(0.0));
  CHECK(off.offset == rnd.layers().back().bias(0));
}

TEST_CASE("property: forward equals the affine restriction of its own pattern") {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 200; ++trial) {
    const Network net = testing::random_network(gen, 3, {4, 3}, 2);
    const Vector x = testing::uniform_point(gen, Vector::Constant(3, -2), Vector::Constant(3, 2));
    const ActivationPattern p = activation_pattern(net, x);
    for (std::size_t out = 0; out < 2; ++out) {
      const AffineMap map = affine_restriction(net, p, out);
      CHECK(std::abs(map(x) - evaluate(net, x, out)) <= 1e-12);
      // The gradient is the map's coefficient vector, computed along the same path.
      CHECK((gradient(net, x, out) - map.coeffs).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("property: equal patterns give identical gradients") {
  std::mt19937_64 gen(8);
  const Network net = testing::random_network(gen, 2, {4, 4});
  const Vector lo = Vector::Constant(2, -1), hi = Vector::Constant(2, 1);
  int pairs = 0;
  for (int i = 0; i < 2000 && pairs < 50; ++i) {
    const Vector a = testing::uniform_point(gen, lo, hi);
    const Vector b = testing::uniform_point(gen, lo, hi);
    if (!(activation_pattern(net, a) == activation_pattern(net, b))) continue;
    CHECK(gradient(net, a) == gradient(net, b));
    ++pairs;
  }
  CHECK(pairs > 0);
}

TEST_CASE("property: nonnegative weights give a monotone network") {
  std::mt19937_64 gen(13);
  for (int trial = 0; trial < 20; ++trial) {
    Network base = testing::random_network(gen, 3, {4, 3}, 2);
    auto layers = base.layers();
    for (auto& l : layers) {
      l.weights = l.weights.cwiseAbs();
      l.bias = l.bias.cwiseAbs();
    }
    const Network net(3, layers);
    for (int i = 0; i < 50; ++i) {
      const Vector a = testing::uniform_point(gen, Vector::Constant(3, -1), Vector::Constant(3, 1));
      const Vector step = testing::uniform_point(gen, Vector::Zero(3), Vector::Constant(3, 1));
      const Vector fa = forward(net, a).outputs;
      const Vector fb = forward(net, a + step).outputs;
      CHECK((fb.array() >= fa.array()).all());
    }
  }
}

TEST_CASE("save and load round trip") {
  std::mt19937_64 gen(7);
  for (const Network& net : {identity_net(), testing::sr_network(), testing::random_network(gen, 3, {5, 4}, 2)}) {
    std::stringstream buf;
    save_network(net, buf);
    CHECK(load_network(buf) == net);
  }
}

TEST_CASE("output slice keeps the trunk and one output row") {
  std::mt19937_64 gen(2);
  const Network net = testing::random_network(gen, 2, {3}, 3);
  const Network s = net.output_slice(2);
  CHECK(s.output_dim() == 1);
  const Vector x = vec({0.3, -0.4});
  CHECK(evaluate(s, x) == evaluate(net, x, 2));
  CHECK_THROWS_AS(net.output_slice(3), DimensionMismatch);
}

#include "nnrange/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nnrange/error.hpp"

namespace nnrange {

namespace {

void check_input(const Network& net, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != net.input_dim())
    throw DimensionMismatch("input has length " + std::to_string(x.size()) + ", network expects " +
                            std::to_string(net.input_dim()));
}

void check_output(const Network& net, std::size_t output) {
  if (output >= net.output_dim())
    throw DimensionMismatch("output index " + std::to_string(output) + " out of range (network has " +
                            std::to_string(net.output_dim()) + " outputs)");
}

}  // namespace

bool Layer::operator==(const Layer& other) const {
  return has_relu == other.has_relu && weights.rows() == other.weights.rows() &&
         weights.cols() == other.weights.cols() && bias.size() == other.bias.size() &&
         weights == other.weights && bias == other.bias;
}

Network::Network(std::size_t input_dim, std::vector<Layer> layers)
    : input_dim_(input_dim), layers_(std::move(layers)) {
  if (input_dim_ == 0) throw DimensionMismatch("network must have at least one input");
  if (layers_.empty()) throw DimensionMismatch("network must have at least one layer");

  std::size_t prev = input_dim_;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Layer& layer = layers_[i];
    const std::string name = "layer " + std::to_string(i);
    if (layer.weights.rows() == 0) throw DimensionMismatch(name + " has no neurons");
    if (static_cast<std::size_t>(layer.weights.cols()) != prev)
      throw DimensionMismatch(name + " weights have " + std::to_string(layer.weights.cols()) +
                              " columns, expected " + std::to_string(prev));
    if (layer.bias.size() != layer.weights.rows())
      throw DimensionMismatch(name + " bias has length " + std::to_string(layer.bias.size()) +
                              ", expected " + std::to_string(layer.weights.rows()));
    const bool last = i + 1 == layers_.size();
    if (layer.has_relu == last)
      throw ParseError(name + (last ? " (output) must be linear" : " (hidden) must use relu"));
    if (!layer.weights.allFinite() || !layer.bias.allFinite())
      throw ParseError(name + " contains a non-finite value");
    prev = static_cast<std::size_t>(layer.weights.rows());
  }
}

std::vector<std::size_t> Network::hidden_widths() const {
  std::vector<std::size_t> widths;
  for (std::size_t i = 0; i + 1 < layers_.size(); ++i)
    widths.push_back(static_cast<std::size_t>(layers_[i].weights.rows()));
  return widths;
}

std::size_t Network::num_hidden_neurons() const {
  std::size_t total = 0;
  for (std::size_t w : hidden_widths()) total += w;
  return total;
}

Network Network::output_slice(std::size_t output) const {
  check_output(*this, output);
  std::vector<Layer> layers = layers_;
  Layer& last = layers.back();
  last.weights = Matrix(last.weights.row(static_cast<Eigen::Index>(output)));
  last.bias = Vector::Constant(1, last.bias(static_cast<Eigen::Index>(output)));
  return Network(input_dim_, std::move(layers));
}

std::size_t ActivationPattern::num_neurons() const {
  std::size_t total = 0;
  for (const auto& l : layers) total += l.size();
  return total;
}

ForwardResult forward(const Network& net, const Vector& x) {
  check_input(net, x);
  ForwardResult result;
  Vector z = x;
  for (const Layer& layer : net.layers()) {
    z = layer.weights * z + layer.bias;
    if (layer.has_relu) z = z.cwiseMax(0.0);
    result.layer_values.push_back(z);
  }
  result.outputs = z;
  return result;
}

double evaluate(const Network& net, const Vector& x, std::size_t output) {
  check_output(net, output);
  return forward(net, x).outputs(static_cast<Eigen::Index>(output));
}

std::vector<Vector> hidden_preactivations(const Network& net, const Vector& x) {
  check_input(net, x);
  std::vector<Vector> pre;
  Vector z = x;
  for (std::size_t i = 0; i + 1 < net.layers().size(); ++i) {
    const Layer& layer = net.layers()[i];
    Vector a = layer.weights * z + layer.bias;
    z = a.cwiseMax(0.0);
    pre.push_back(std::move(a));
  }
  return pre;
}

ActivationPattern activation_pattern(const Network& net, const Vector& x) {
  ActivationPattern pattern;
  for (const Vector& a : hidden_preactivations(net, x)) {
    std::vector<bool> active(static_cast<std::size_t>(a.size()));
    for (Eigen::Index j = 0; j < a.size(); ++j) active[static_cast<std::size_t>(j)] = a(j) >= 0.0;
    pattern.layers.push_back(std::move(active));
  }
  return pattern;
}

void check_pattern_shape(const Network& net, const ActivationPattern& pattern) {
  const auto widths = net.hidden_widths();
  if (pattern.layers.size() != widths.size())
    throw DimensionMismatch("pattern has " + std::to_string(pattern.layers.size()) +
                            " layers, network has " + std::to_string(widths.size()) +
                            " hidden layers");
  for (std::size_t i = 0; i < widths.size(); ++i)
    if (pattern.layers[i].size() != widths[i])
      throw DimensionMismatch("pattern layer " + std::to_string(i) + " has " +
                              std::to_string(pattern.layers[i].size()) + " entries, expected " +
                              std::to_string(widths[i]));
}

Vector gradient(const Network& net, const Vector& x, std::size_t output) {
  check_output(net, output);
  const ActivationPattern pattern = activation_pattern(net, x);

  // Reverse accumulation of J_k * ... * J_0 as a row vector.
  const auto& layers = net.layers();
  Eigen::RowVectorXd g = layers.back().weights.row(static_cast<Eigen::Index>(output));
  for (std::size_t i = layers.size() - 1; i-- > 0;) {
    const auto& active = pattern.layers[i];
    for (Eigen::Index j = 0; j < g.size(); ++j)
      if (!active[static_cast<std::size_t>(j)]) g(j) = 0.0;
    g = g * layers[i].weights;
  }
  return g.transpose();
}

std::vector<std::pair<Matrix, Vector>> preactivation_maps(const Network& net,
                                                          const ActivationPattern& pattern) {
  const auto& layers = net.layers();
  const std::size_t depth = std::min(pattern.layers.size() + 1, layers.size() - 1);
  std::vector<std::pair<Matrix, Vector>> maps;

  // Post-activation of the previous layer as an affine function of x.
  Matrix coeffs = Matrix::Identity(static_cast<Eigen::Index>(net.input_dim()),
                                   static_cast<Eigen::Index>(net.input_dim()));
  Vector offset = Vector::Zero(static_cast<Eigen::Index>(net.input_dim()));
  for (std::size_t i = 0; i < depth; ++i) {
    Matrix pre_c = layers[i].weights * coeffs;
    Vector pre_d = layers[i].weights * offset + layers[i].bias;
    maps.emplace_back(pre_c, pre_d);
    if (i >= pattern.layers.size()) break;
    const auto& active = pattern.layers[i];
    if (active.size() != static_cast<std::size_t>(pre_c.rows()))
      throw DimensionMismatch("pattern layer " + std::to_string(i) + " has wrong width");
    for (Eigen::Index j = 0; j < pre_c.rows(); ++j) {
      if (!active[static_cast<std::size_t>(j)]) {
        pre_c.row(j).setZero();
        pre_d(j) = 0.0;
      }
    }
    coeffs = std::move(pre_c);
    offset = std::move(pre_d);
  }
  return maps;
}

AffineMap affine_restriction(const Network& net, const ActivationPattern& pattern,
                             std::size_t output) {
  check_pattern_shape(net, pattern);
  check_output(net, output);

  const auto& layers = net.layers();
  Matrix coeffs = Matrix::Identity(static_cast<Eigen::Index>(net.input_dim()),
                                   static_cast<Eigen::Index>(net.input_dim()));
  Vector offset = Vector::Zero(static_cast<Eigen::Index>(net.input_dim()));
  for (std::size_t i = 0; i + 1 < layers.size(); ++i) {
    Matrix c = layers[i].weights * coeffs;
    Vector d = layers[i].weights * offset + layers[i].bias;
    const auto& active = pattern.layers[i];
    for (Eigen::Index j = 0; j < c.rows(); ++j) {
      if (!active[static_cast<std::size_t>(j)]) {
        c.row(j).setZero();
        d(j) = 0.0;
      }
    }
    coeffs = std::move(c);
    offset = std::move(d);
  }
  const auto row = layers.back().weights.row(static_cast<Eigen::Index>(output));
  AffineMap map;
  map.coeffs = (row * coeffs).transpose();
  map.offset = row.dot(offset) + layers.back().bias(static_cast<Eigen::Index>(output));
  return map;
}

}  // namespace nnrange

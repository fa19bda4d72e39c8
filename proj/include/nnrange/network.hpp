#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace nnrange {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// One affine layer, optionally followed by a ReLU.
struct Layer {
  Matrix weights;  // rows = neurons, cols = inputs to the layer
  Vector bias;
  bool has_relu = true;

  bool operator==(const Layer& other) const;
};

/// Feedforward ReLU network F = F_k o ... o F_0.
///
/// Every layer but the last applies a ReLU; the last one is affine. The
/// network is immutable once constructed, so it can be shared freely across
/// threads.
class Network {
 public:
  /// Validates shapes, activations and finiteness. Throws DimensionMismatch
  /// naming the offending layer, or ParseError for non-finite entries or a
  /// bad activation layout.
  Network(std::size_t input_dim, std::vector<Layer> layers);

  std::size_t input_dim() const { return input_dim_; }
  std::size_t output_dim() const { return static_cast<std::size_t>(layers_.back().weights.rows()); }
  const std::vector<Layer>& layers() const { return layers_; }

  std::size_t num_hidden_layers() const { return layers_.size() - 1; }
  std::vector<std::size_t> hidden_widths() const;
  std::size_t num_hidden_neurons() const;

  /// Same trunk, final layer reduced to the single row `output`.
  Network output_slice(std::size_t output) const;

  bool operator==(const Network& other) const = default;

 private:
  std::size_t input_dim_;
  std::vector<Layer> layers_;
};

/// Per hidden layer, true = neuron active (pre-activation >= 0).
struct ActivationPattern {
  std::vector<std::vector<bool>> layers;

  std::size_t num_neurons() const;
  bool operator==(const ActivationPattern& other) const = default;
};

/// x -> coeffs . x + offset
struct AffineMap {
  Vector coeffs;
  double offset = 0.0;

  double operator()(const Vector& x) const { return coeffs.dot(x) + offset; }
};

struct ForwardResult {
  Vector outputs;
  std::vector<Vector> layer_values;  // post-activation value of every layer, last = outputs
};

ForwardResult forward(const Network& net, const Vector& x);

/// Convenience: output `output` of forward().
double evaluate(const Network& net, const Vector& x, std::size_t output = 0);

/// Boundary convention: a pre-activation of exactly 0 counts as active.
ActivationPattern activation_pattern(const Network& net, const Vector& x);

/// Pre-activations of every hidden layer at x.
std::vector<Vector> hidden_preactivations(const Network& net, const Vector& x);

/// Gradient of output `output` at x: product of per-layer Jacobians whose
/// rows are copies of W_i rows for active neurons and zero otherwise.
Vector gradient(const Network& net, const Vector& x, std::size_t output = 0);

/// Affine map realised by output `output` on the set of inputs whose
/// activation pattern is `pattern`.
AffineMap affine_restriction(const Network& net, const ActivationPattern& pattern,
                             std::size_t output = 0);

/// Pre-activations of hidden layers 0..p as affine functions of the input,
/// where p = pattern.layers.size() (capped at the last hidden layer). The map
/// of layer l uses pattern.layers[0..l-1], so a partial pattern is allowed:
/// pre_l(x) = maps[l].first * x + maps[l].second.
std::vector<std::pair<Matrix, Vector>> preactivation_maps(const Network& net,
                                                          const ActivationPattern& pattern);

void check_pattern_shape(const Network& net, const ActivationPattern& pattern);

// Network file: {"inputs": n, "layers": [{"weights": [[..]], "bias": [..],
// "activation": "relu"|"linear"}, ...]}

Network load_network(std::istream& in);
Network load_network_file(const std::string& path);
void save_network(const Network& net, std::ostream& out);
void save_network_file(const Network& net, const std::string& path);

}  // namespace nnrange

#pragma once

#include <chrono>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include "nnrange/error.hpp"
#include "nnrange/lp.hpp"
#include "nnrange/network.hpp"
#include "nnrange/polytope.hpp"

namespace nnrange {

enum class ThresholdSense { AtLeast, AtMost };

/// Interval of every hidden neuron's pre-activation over a box, layer by layer.
struct PreactivationBounds {
  std::vector<Vector> lo;
  std::vector<Vector> hi;
};

PreactivationBounds preactivation_bounds(const Network& net, const Box& box);

/// Per hidden neuron (layer-major): max(1.05 * sup |pre-activation|, 1.0) over the box.
std::vector<double> estimate_big_m(const Network& net, const Box& box);

/// Variable layout [x (n) | z (H) | t (H) | y], hidden neurons layer-major.
struct MilpLayout {
  std::size_t num_inputs = 0;
  std::size_t num_hidden = 0;

  std::size_t z(std::size_t neuron) const { return num_inputs + neuron; }
  std::size_t t(std::size_t neuron) const { return num_inputs + num_hidden + neuron; }
  std::size_t y() const { return num_inputs + 2 * num_hidden; }
  std::size_t num_vars() const { return num_inputs + 2 * num_hidden + 1; }
};

/// Big-M encoding of "exists x in P with F(x) >= threshold" (or <=).
///
/// t = 0 selects the affine branch of a neuron, t = 1 the zero branch.
/// Immutable once built.
struct MilpProblem {
  LinearProgram relaxation;  // binaries relaxed to [0, 1]
  std::vector<std::size_t> binaries;
  std::vector<double> big_m;
  MilpLayout layout;
  std::optional<Network> network;  // single-output network that was encoded
  double threshold = 0.0;
  ThresholdSense sense = ThresholdSense::AtLeast;
};

/// Uses a precomputed bounding box of P for the big-M constants.
MilpProblem encode_network(const Network& net, const Polyhedron& p, const Box& box, double threshold,
                           ThresholdSense sense, std::size_t output = 0);

/// Computes bounding_box(P) first; throws UnboundedSet / InfeasibleSet from it.
MilpProblem encode_network(const Network& net, const Polyhedron& p, double threshold, ThresholdSense sense,
                           std::size_t output = 0, const LpBackend& lp = default_lp());

struct MilpStats {
  std::size_t nodes = 0;
  std::size_t lp_solves = 0;
  double seconds = 0.0;

  MilpStats& operator+=(const MilpStats& other) {
    nodes += other.nodes;
    lp_solves += other.lp_solves;
    seconds += other.seconds;
    return *this;
  }
};

struct FeasibilityVerdict {
  bool feasible = false;
  Vector witness;   // input part of the solution (feasible only)
  double value = 0.0;  // y at the witness
  Vector solution;  // full variable assignment with integral binaries
  MilpStats stats;
};

struct MilpLimits {
  std::size_t node_limit = 1'000'000;
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

/// Node or time budget exhausted before a verdict; never means infeasible.
class LimitExceeded : public Error {
 public:
  enum class Kind { Nodes, Time };

  LimitExceeded(Kind kind, MilpStats stats);

  Kind kind() const { return kind_; }
  const MilpStats& stats() const { return stats_; }

 private:
  Kind kind_;
  MilpStats stats_;
};

/// Depth-first branch and bound over the binaries. The root LP relaxation
/// is solved first; if it is infeasible the verdict is returned after that
/// single LP. Branching picks the most fractional binary and explores the
/// side matching its relaxed value first. Any candidate witness has its
/// binaries fixed to 0/1 and is re-checked by a final LP.
///
/// `hint` is an input point; when it already satisfies the encoding it is
/// verified and returned without branching.
FeasibilityVerdict solve_feasibility(const MilpProblem& m, const std::optional<Vector>& hint = std::nullopt,
                                     const MilpLimits& limits = {}, const LpBackend& lp = default_lp());

/// Relaxation with the given binaries fixed (index into m.binaries -> 0/1, -1 = free).
LinearProgram with_fixed_binaries(const MilpProblem& m, const std::vector<signed char>& fixing);

/// LP-format style dump for cross-checking against external solvers.
void write_lp_format(const MilpProblem& m, std::ostream& out);

}  // namespace nnrange

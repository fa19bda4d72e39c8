#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "nnrange/lp.hpp"
#include "nnrange/milp.hpp"
#include "nnrange/network.hpp"
#include "nnrange/polytope.hpp"

// Brute-force ground truth for small networks. Exponential on purpose.
namespace nnrange {

inline constexpr std::size_t kMaxOracleNeurons = 20;

/// One linear piece of the network over P.
struct PatternCell {
  ActivationPattern pattern;
  Polyhedron region{0};  // P's rows, then one row per neuron: active non-strict, inactive strict
  AffineMap map;
  bool feasible = false;
};

/// Every pattern whose half-open region meets P, found by a neuron-by-neuron
/// depth-first walk that drops a prefix as soon as its region misses P.
/// Throws TooLarge past kMaxOracleNeurons hidden neurons.
std::vector<PatternCell> enumerate_cells(const Network& net, const Polyhedron& p, std::size_t output = 0,
                                         const LpBackend& lp = default_lp());

struct ExactRange {
  double lower = 0.0;
  double upper = 0.0;
  Vector arg_lower;
  Vector arg_upper;
  std::size_t cells = 0;
};

/// Optimizes each cell's affine map over its closed region intersected with P.
ExactRange exact_range(const Network& net, const Polyhedron& p, std::size_t output = 0,
                       const LpBackend& lp = default_lp());

struct GridRange {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t samples = 0;  // grid points that landed in P
};

/// Inner approximation: F evaluated on an axis grid of P's bounding box.
/// Input dimension must be at most 4; throws EmptyGrid if no point is in P.
GridRange grid_range(const Network& net, const Polyhedron& p, std::size_t points_per_dim, std::size_t output = 0,
                     const LpBackend& lp = default_lp());

struct MonolithicRange {
  double lower = 0.0;
  double upper = 0.0;
  MilpStats stats;
};

/// Bisection on the threshold of single feasibility MILPs until each bracket
/// is at most delta wide. The outer (sound) end of each bracket is returned.
MonolithicRange monolithic_milp_range(const Network& net, const Polyhedron& p, double delta, std::size_t output = 0,
                                      const MilpLimits& limits = {}, const LpBackend& lp = default_lp());

void write_cells(const std::vector<PatternCell>& cells, std::ostream& out);

}  // namespace nnrange

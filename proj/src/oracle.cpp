#include "nnrange/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "nnrange/error.hpp"

namespace nnrange {

namespace {

// A strict row must hold with at least this much slack somewhere.
constexpr double kStrictSlack = 1e-9;

void check_inputs(const Network& net, const Polyhedron& p, std::size_t output) {
  if (p.dim() != net.input_dim())
    throw DimensionMismatch("polyhedron has dimension " + std::to_string(p.dim()) + ", network has " +
                            std::to_string(net.input_dim()) + " inputs");
  if (output >= net.output_dim())
    throw DimensionMismatch("output index " + std::to_string(output) + " out of range");
}

// True if some point satisfies every non-strict row and every strict row with
// positive slack. Variables: x, then s in [0, 1]; maximize s.
bool half_open_nonempty(const Polyhedron& q, const LpBackend& lp) {
  const auto d = static_cast<Eigen::Index>(q.dim());
  LinearProgram prog(q.dim() + 1);
  prog.set_bounds(q.dim(), 0.0, 1.0);
  prog.objective(d) = 1.0;
  prog.sense = ObjectiveSense::Maximize;
  bool any_strict = false;
  for (Eigen::Index i = 0; i < q.a().rows(); ++i) {
    Vector row = Vector::Zero(d + 1);
    row.head(d) = q.a().row(i).transpose();
    if (q.strict()[static_cast<std::size_t>(i)]) {
      row(d) = 1.0;
      any_strict = true;
    }
    prog.add_row(std::move(row), Relation::LessEqual, q.b()(i));
  }
  const LpOutcome out = lp.solve(prog);
  if (out.status == LpStatus::Infeasible) return false;
  if (!any_strict) return true;
  return out.status == LpStatus::Unbounded || out.objective_value > kStrictSlack;
}

struct Walker {
  const Network& net;
  const Polyhedron& p;
  std::size_t output;
  const LpBackend& lp;
  std::vector<PatternCell> cells;

  void layer(ActivationPattern& prefix, const Polyhedron& region) {
    const std::size_t l = prefix.layers.size();
    if (l == net.num_hidden_layers()) {
      PatternCell cell;
      cell.pattern = prefix;
      cell.region = region;
      cell.map = affine_restriction(net, prefix, output);
      cell.feasible = true;
      cells.push_back(std::move(cell));
      return;
    }
    const auto maps = preactivation_maps(net, prefix);
    const auto& [coeffs, offset] = maps.back();
    prefix.layers.emplace_back();
    neuron(prefix, region, coeffs, offset, 0);
    prefix.layers.pop_back();
  }

  void neuron(ActivationPattern& prefix, const Polyhedron& region, const Matrix& coeffs, const Vector& offset,
              Eigen::Index j) {
    if (j == coeffs.rows()) {
      layer(prefix, region);
      return;
    }
    const Vector g = coeffs.row(j).transpose();
    for (bool active : {true, false}) {
      Polyhedron next = region;
      if (active)
        next.add_row(-g, offset(j), false);
      else
        next.add_row(g, -offset(j), true);
      if (!half_open_nonempty(next, lp)) continue;
      prefix.layers.back().push_back(active);
      neuron(prefix, next, coeffs, offset, j + 1);
      prefix.layers.back().pop_back();
    }
  }
};

}  // namespace

std::vector<PatternCell> enumerate_cells(const Network& net, const Polyhedron& p, std::size_t output,
                                         const LpBackend& lp) {
  check_inputs(net, p, output);
  if (net.num_hidden_neurons() > kMaxOracleNeurons)
    throw TooLarge("pattern enumeration supports at most " + std::to_string(kMaxOracleNeurons) +
                   " hidden neurons, network has " + std::to_string(net.num_hidden_neurons()));
  Walker walker{net, p, output, lp, {}};
  if (!half_open_nonempty(p, lp)) return {};
  ActivationPattern prefix;
  walker.layer(prefix, p);
  return std::move(walker.cells);
}

ExactRange exact_range(const Network& net, const Polyhedron& p, std::size_t output, const LpBackend& lp) {
  const std::vector<PatternCell> cells = enumerate_cells(net, p, output, lp);
  if (cells.empty()) throw InfeasibleSet("polyhedron is empty");
  ExactRange r;
  r.cells = cells.size();
  r.lower = kInfinity;
  r.upper = -kInfinity;
  for (const PatternCell& cell : cells) {
    LinearProgram prog = cell.region.as_lp();
    prog.objective = cell.map.coeffs;
    for (ObjectiveSense sense : {ObjectiveSense::Maximize, ObjectiveSense::Minimize}) {
      prog.sense = sense;
      const LpOutcome out = lp.solve(prog);
      if (out.status == LpStatus::Unbounded) throw UnboundedSet("network output is unbounded over the polyhedron");
      if (!out.optimal()) continue;  // numerically empty sliver
      const double value = cell.map(out.point);
      if (sense == ObjectiveSense::Maximize && value > r.upper) {
        r.upper = value;
        r.arg_upper = out.point;
      }
      if (sense == ObjectiveSense::Minimize && value < r.lower) {
        r.lower = value;
        r.arg_lower = out.point;
      }
    }
  }
  if (!std::isfinite(r.lower) || !std::isfinite(r.upper)) throw NumericFailure("no cell LP reached an optimum");
  return r;
}

GridRange grid_range(const Network& net, const Polyhedron& p, std::size_t points_per_dim, std::size_t output,
                     const LpBackend& lp) {
  check_inputs(net, p, output);
  const std::size_t n = net.input_dim();
  if (n > 4) throw TooLarge("grid sampling supports at most 4 inputs, network has " + std::to_string(n));
  if (points_per_dim == 0) throw Error("points_per_dim must be positive");
  const Box box = bounding_box(p, lp);

  std::size_t total = 1;
  for (std::size_t j = 0; j < n; ++j) total *= points_per_dim;

  GridRange r;
  r.lower = kInfinity;
  r.upper = -kInfinity;
  Vector x(static_cast<Eigen::Index>(n));
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rest = idx;
    for (std::size_t j = 0; j < n; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      const std::size_t k = rest % points_per_dim;
      rest /= points_per_dim;
      x(jj) = points_per_dim == 1 ? 0.5 * (box.lo(jj) + box.hi(jj))
                                  : box.lo(jj) + (box.hi(jj) - box.lo(jj)) * static_cast<double>(k) /
                                                     static_cast<double>(points_per_dim - 1);
    }
    if (!p.contains(x)) continue;
    const double v = evaluate(net, x, output);
    r.lower = std::min(r.lower, v);
    r.upper = std::max(r.upper, v);
    ++r.samples;
  }
  if (r.samples == 0) throw EmptyGrid("no grid point lies inside the polyhedron");
  return r;
}

MonolithicRange monolithic_milp_range(const Network& net, const Polyhedron& p, double delta, std::size_t output,
                                      const MilpLimits& limits, const LpBackend& lp) {
  check_inputs(net, p, output);
  if (!(delta > 0.0)) throw Error("delta must be positive");
  if (net.num_hidden_neurons() > kMaxOracleNeurons)
    throw TooLarge("monolithic MILP supports at most " + std::to_string(kMaxOracleNeurons) + " hidden neurons");
  const Network single = net.output_slice(output);
  const Box box = bounding_box(p, lp);

  // Interval arithmetic on the output layer gives the initial outer bracket.
  const PreactivationBounds bounds = preactivation_bounds(single, box);
  const Layer& last = single.layers().back();
  const Vector post_lo = bounds.lo.empty() ? box.lo : Vector(bounds.lo.back().cwiseMax(0.0));
  const Vector post_hi = bounds.hi.empty() ? box.hi : Vector(bounds.hi.back().cwiseMax(0.0));
  const Matrix pos = last.weights.cwiseMax(0.0);
  const Matrix neg = last.weights.cwiseMin(0.0);
  const double outer_lo = (neg * post_hi + pos * post_lo + last.bias)(0);
  const double outer_hi = (pos * post_hi + neg * post_lo + last.bias)(0);

  const double attained = evaluate(single, interior_sample(p, lp));
  MonolithicRange r;

  // Invariant: inner is attained by some x in P, outer bounds every value.
  auto bisect = [&](ThresholdSense sense, double inner, double outer) {
    const bool up = sense == ThresholdSense::AtLeast;
    while (std::abs(outer - inner) > delta) {
      const double mid = 0.5 * (inner + outer);
      const MilpProblem m = encode_network(single, p, box, mid, sense);
      const FeasibilityVerdict v = solve_feasibility(m, std::nullopt, limits, lp);
      r.stats += v.stats;
      if (!v.feasible) {
        outer = mid;
        continue;
      }
      const double reached = evaluate(single, v.witness);
      inner = up ? std::max(mid, reached) : std::min(mid, reached);
      if (up ? inner > outer : inner < outer) outer = inner;
    }
    return outer;
  };
  r.upper = bisect(ThresholdSense::AtLeast, attained, std::max(outer_hi, attained));
  r.lower = bisect(ThresholdSense::AtMost, attained, std::min(outer_lo, attained));
  return r;
}

void write_cells(const std::vector<PatternCell>& cells, std::ostream& out) {
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const PatternCell& cell = cells[c];
    out << "cell " << c << " pattern";
    for (const auto& layer : cell.pattern.layers) {
      out << ' ';
      for (bool a : layer) out << (a ? '1' : '0');
    }
    out << " map";
    for (Eigen::Index j = 0; j < cell.map.coeffs.size(); ++j) out << ' ' << cell.map.coeffs(j);
    out << " + " << cell.map.offset << '\n';
  }
}

}  // namespace nnrange

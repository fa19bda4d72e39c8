#include "nnrange/milp.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

namespace nnrange {

namespace {

constexpr double kIntegralityTol = 1e-6;
constexpr double kBigMPadding = 1.05;
constexpr double kBigMFloor = 1.0;

std::string kind_message(LimitExceeded::Kind kind) {
  return kind == LimitExceeded::Kind::Nodes ? "branch-and-bound node limit exceeded"
                                            : "branch-and-bound time limit exceeded";
}

Vector unit_row(std::size_t n, std::size_t j, double value) {
  Vector row = Vector::Zero(static_cast<Eigen::Index>(n));
  row(static_cast<Eigen::Index>(j)) = value;
  return row;
}

// Completes an input point into a full MILP assignment by running the network.
Vector complete_assignment(const MilpProblem& m, const Vector& x) {
  const Network& net = *m.network;
  const MilpLayout& lay = m.layout;
  Vector v = Vector::Zero(static_cast<Eigen::Index>(lay.num_vars()));
  v.head(x.size()) = x;
  std::size_t g = 0;
  for (const Vector& pre : hidden_preactivations(net, x)) {
    for (Eigen::Index j = 0; j < pre.size(); ++j, ++g) {
      v(static_cast<Eigen::Index>(lay.z(g))) = std::max(pre(j), 0.0);
      v(static_cast<Eigen::Index>(lay.t(g))) = pre(j) >= 0.0 ? 0.0 : 1.0;
    }
  }
  v(static_cast<Eigen::Index>(lay.y())) = evaluate(net, x);
  return v;
}

std::vector<signed char> rounded_fixing(const MilpProblem& m, const Vector& v) {
  std::vector<signed char> fixing(m.binaries.size());
  for (std::size_t b = 0; b < m.binaries.size(); ++b)
    fixing[b] = v(static_cast<Eigen::Index>(m.binaries[b])) >= 0.5 ? 1 : 0;
  return fixing;
}

bool meets_threshold(const MilpProblem& m, double y) {
  return m.sense == ThresholdSense::AtLeast ? y >= m.threshold : y <= m.threshold;
}

}  // namespace

LimitExceeded::LimitExceeded(Kind kind, MilpStats stats)
    : Error(kind_message(kind)), kind_(kind), stats_(stats) {}

PreactivationBounds preactivation_bounds(const Network& net, const Box& box) {
  if (box.dim() != net.input_dim())
    throw DimensionMismatch("box has dimension " + std::to_string(box.dim()) + ", network expects " +
                            std::to_string(net.input_dim()));
  PreactivationBounds out;
  Vector lo = box.lo;
  Vector hi = box.hi;
  const auto& layers = net.layers();
  for (std::size_t i = 0; i + 1 < layers.size(); ++i) {
    const Matrix& w = layers[i].weights;
    const Matrix pos = w.cwiseMax(0.0);
    const Matrix neg = w.cwiseMin(0.0);
    Vector pre_lo = pos * lo + neg * hi + layers[i].bias;
    Vector pre_hi = pos * hi + neg * lo + layers[i].bias;
    lo = pre_lo.cwiseMax(0.0);
    hi = pre_hi.cwiseMax(0.0);
    out.lo.push_back(std::move(pre_lo));
    out.hi.push_back(std::move(pre_hi));
  }
  return out;
}

std::vector<double> estimate_big_m(const Network& net, const Box& box) {
  const PreactivationBounds bounds = preactivation_bounds(net, box);
  std::vector<double> m;
  for (std::size_t l = 0; l < bounds.lo.size(); ++l)
    for (Eigen::Index j = 0; j < bounds.lo[l].size(); ++j) {
      const double mag = std::max(std::abs(bounds.lo[l](j)), std::abs(bounds.hi[l](j)));
      m.push_back(std::max(kBigMPadding * mag, kBigMFloor));
    }
  return m;
}

MilpProblem encode_network(const Network& full, const Polyhedron& p, const Box& box, double threshold,
                           ThresholdSense sense, std::size_t output) {
  if (p.dim() != full.input_dim())
    throw DimensionMismatch("polyhedron has dimension " + std::to_string(p.dim()) + ", network has " +
                            std::to_string(full.input_dim()) + " inputs");
  const Network net = full.output_slice(output);

  MilpProblem m;
  m.layout.num_inputs = net.input_dim();
  m.layout.num_hidden = net.num_hidden_neurons();
  m.big_m = estimate_big_m(net, box);
  m.threshold = threshold;
  m.sense = sense;
  const MilpLayout& lay = m.layout;
  const std::size_t nv = lay.num_vars();

  LinearProgram& lp = m.relaxation;
  lp = LinearProgram(nv);
  p.append_to(lp);  // input set

  // One 4-row block per hidden neuron.
  const auto& layers = net.layers();
  std::size_t g = 0;
  std::vector<std::size_t> prev_vars;
  for (std::size_t j = 0; j < lay.num_inputs; ++j) prev_vars.push_back(j);
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    const Layer& layer = layers[l];
    std::vector<std::size_t> cur_vars;
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r, ++g) {
      const std::size_t z = lay.z(g);
      const std::size_t t = lay.t(g);
      const double big_m = m.big_m[g];
      const double b = layer.bias(r);

      Vector affine = Vector::Zero(static_cast<Eigen::Index>(nv));  // z - W prev
      affine(static_cast<Eigen::Index>(z)) = 1.0;
      for (std::size_t k = 0; k < prev_vars.size(); ++k)
        affine(static_cast<Eigen::Index>(prev_vars[k])) -= layer.weights(r, static_cast<Eigen::Index>(k));

      lp.add_row(affine, Relation::GreaterEqual, b);  // z >= W prev + b
      Vector upper = affine;
      upper(static_cast<Eigen::Index>(t)) = -big_m;
      lp.add_row(upper, Relation::LessEqual, b);  // z <= W prev + b + M t
      lp.add_row(unit_row(nv, z, 1.0), Relation::GreaterEqual, 0.0);  // z >= 0
      Vector off = unit_row(nv, z, 1.0);
      off(static_cast<Eigen::Index>(t)) = big_m;
      lp.add_row(off, Relation::LessEqual, big_m);  // z <= M (1 - t)

      lp.set_bounds(t, 0.0, 1.0);
      m.binaries.push_back(t);
      cur_vars.push_back(z);
    }
    prev_vars = std::move(cur_vars);
  }

  // y = W_k z_k + b_k, then the threshold row.
  const Layer& last = layers.back();
  Vector out_row = unit_row(nv, lay.y(), 1.0);
  for (std::size_t k = 0; k < prev_vars.size(); ++k)
    out_row(static_cast<Eigen::Index>(prev_vars[k])) -= last.weights(0, static_cast<Eigen::Index>(k));
  lp.add_row(out_row, Relation::Equal, last.bias(0));
  lp.add_row(unit_row(nv, lay.y(), 1.0),
             sense == ThresholdSense::AtLeast ? Relation::GreaterEqual : Relation::LessEqual, threshold);

  m.network = net;
  return m;
}

MilpProblem encode_network(const Network& net, const Polyhedron& p, double threshold, ThresholdSense sense,
                           std::size_t output, const LpBackend& lp) {
  return encode_network(net, p, bounding_box(p, lp), threshold, sense, output);
}

LinearProgram with_fixed_binaries(const MilpProblem& m, const std::vector<signed char>& fixing) {
  LinearProgram lp = m.relaxation;
  for (std::size_t b = 0; b < m.binaries.size(); ++b) {
    if (fixing[b] < 0) continue;
    const double v = fixing[b];
    lp.set_bounds(m.binaries[b], v, v);
  }
  return lp;
}

FeasibilityVerdict solve_feasibility(const MilpProblem& m, const std::optional<Vector>& hint,
                                     const MilpLimits& limits, const LpBackend& lp) {
  const auto start = std::chrono::steady_clock::now();
  FeasibilityVerdict verdict;
  MilpStats& stats = verdict.stats;
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };

  const std::size_t nx = m.layout.num_inputs;
  auto accept = [&](const Vector& solution) {
    verdict.feasible = true;
    verdict.solution = solution;
    verdict.witness = solution.head(static_cast<Eigen::Index>(nx));
    verdict.value = solution(static_cast<Eigen::Index>(m.layout.y()));
    stats.seconds = elapsed();
    return verdict;
  };

  // Fixes binaries and re-solves; returns the verified assignment if feasible.
  auto verify = [&](const std::vector<signed char>& fixing) -> std::optional<Vector> {
    const LpOutcome out = lp.solve(with_fixed_binaries(m, fixing));
    ++stats.lp_solves;
    if (!out.optimal()) return std::nullopt;
    Vector v = out.point;
    for (std::size_t b = 0; b < m.binaries.size(); ++b) v(static_cast<Eigen::Index>(m.binaries[b])) = fixing[b];
    return v;
  };

  if (hint && m.network) {
    // The completed assignment is already integral; checking every row verifies it.
    const Vector candidate = complete_assignment(m, *hint);
    if (max_violation(m.relaxation, candidate) <= 1e-9) return accept(candidate);
  }

  const std::size_t nb = m.binaries.size();
  std::vector<std::vector<signed char>> stack;
  stack.emplace_back(nb, static_cast<signed char>(-1));

  while (!stack.empty()) {
    if (stats.nodes >= limits.node_limit) {
      stats.seconds = elapsed();
      throw LimitExceeded(LimitExceeded::Kind::Nodes, stats);
    }
    if (limits.deadline && std::chrono::steady_clock::now() >= *limits.deadline) {
      stats.seconds = elapsed();
      throw LimitExceeded(LimitExceeded::Kind::Time, stats);
    }
    std::vector<signed char> fixing = std::move(stack.back());
    stack.pop_back();
    ++stats.nodes;

    const LpOutcome relaxed = lp.solve(with_fixed_binaries(m, fixing));
    ++stats.lp_solves;
    if (!relaxed.optimal()) continue;
    const Vector& v = relaxed.point;

    // Primal heuristic: the relaxed input point may already clear the threshold.
    if (m.network) {
      const Vector x = v.head(static_cast<Eigen::Index>(nx));
      if (meets_threshold(m, evaluate(*m.network, x))) {
        const Vector candidate = complete_assignment(m, x);
        if (auto sol = verify(rounded_fixing(m, candidate))) return accept(*sol);
      }
    }

    std::size_t branch = nb;
    double worst = -1.0;
    bool free_left = false;
    for (std::size_t b = 0; b < nb; ++b) {
      if (fixing[b] >= 0) continue;
      free_left = true;
      const double val = v(static_cast<Eigen::Index>(m.binaries[b]));
      const double frac = std::min(val, 1.0 - val);
      if (frac > worst) {
        worst = frac;
        branch = b;
      }
    }

    if (worst <= kIntegralityTol) {
      if (!free_left) {
        Vector sol = v;
        for (std::size_t b = 0; b < nb; ++b) sol(static_cast<Eigen::Index>(m.binaries[b])) = fixing[b];
        return accept(sol);
      }
      if (auto sol = verify(rounded_fixing(m, v))) return accept(*sol);
    }
    if (branch == nb) continue;

    const double val = v(static_cast<Eigen::Index>(m.binaries[branch]));
    const signed char first = val >= 0.5 ? 1 : 0;
    std::vector<signed char> other = fixing;
    other[branch] = static_cast<signed char>(1 - first);
    fixing[branch] = first;
    stack.push_back(std::move(other));
    stack.push_back(std::move(fixing));
  }

  stats.seconds = elapsed();
  return verdict;
}

void write_lp_format(const MilpProblem& m, std::ostream& out) {
  const MilpLayout& lay = m.layout;
  auto name = [&](std::size_t j) -> std::string {
    if (j < lay.num_inputs) return "x" + std::to_string(j);
    if (j < lay.num_inputs + lay.num_hidden) return "z" + std::to_string(j - lay.num_inputs);
    if (j < lay.y()) return "t" + std::to_string(j - lay.num_inputs - lay.num_hidden);
    return "y";
  };
  const LinearProgram& lp = m.relaxation;
  out << "\\ feasibility problem: y " << (m.sense == ThresholdSense::AtLeast ? ">= " : "<= ") << m.threshold
      << "\nMinimize\n obj: 0\nSubject To\n";
  for (std::size_t i = 0; i < lp.num_rows(); ++i) {
    const LinearConstraint& row = lp.rows[i];
    out << " c" << i << ":";
    bool any = false;
    for (Eigen::Index j = 0; j < row.coeffs.size(); ++j) {
      const double c = row.coeffs(j);
      if (c == 0.0) continue;
      out << (c < 0 ? " - " : (any ? " + " : " ")) << std::abs(c) << ' ' << name(static_cast<std::size_t>(j));
      any = true;
    }
    if (!any) out << " 0 x0";
    out << (row.relation == Relation::LessEqual ? " <= " : row.relation == Relation::GreaterEqual ? " >= " : " = ")
        << row.rhs << '\n';
  }
  out << "Bounds\n";
  for (std::size_t j = 0; j < lp.num_vars(); ++j) {
    const double lo = lp.lower(static_cast<Eigen::Index>(j));
    const double hi = lp.upper(static_cast<Eigen::Index>(j));
    if (!std::isfinite(lo) && !std::isfinite(hi))
      out << ' ' << name(j) << " free\n";
    else
      out << ' ' << (std::isfinite(lo) ? std::to_string(lo) : "-inf") << " <= " << name(j)
          << " <= " << (std::isfinite(hi) ? std::to_string(hi) : "+inf") << '\n';
  }
  out << "Binaries\n";
  for (std::size_t b : m.binaries) out << ' ' << name(b) << '\n';
  out << "End\n";
}

}  // namespace nnrange

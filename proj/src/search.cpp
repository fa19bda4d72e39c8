#include "nnrange/search.hpp"

#include <chrono>
#include <cmath>
#include <future>

#include "nnrange/error.hpp"
#include "nnrange/parallel.hpp"
#include "nnrange/rng.hpp"

namespace nnrange {

namespace {

using Clock = std::chrono::steady_clock;

constexpr double kMembershipTol = 1e-7;

std::optional<Clock::time_point> deadline_from(const SearchParams& params) {
  if (!params.time_limit) return std::nullopt;
  return Clock::now() + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(*params.time_limit));
}

// Maximizes objective . y over closure(L(x)) intersected with closure(P).
std::optional<Vector> region_lp(const Network& net, const Vector& x, const Polyhedron& p, const Vector& objective,
                                const LpBackend& lp) {
  LinearProgram prog = locally_active_region(net, x).intersect(p).as_lp();
  prog.objective = objective;
  prog.sense = ObjectiveSense::Maximize;
  const LpOutcome out = lp.solve(prog);
  if (!out.optimal()) return std::nullopt;
  return out.point;
}

struct Direction {
  bool ascend;

  double sign() const { return ascend ? 1.0 : -1.0; }
  // true if a is strictly better than b
  bool better(double a, double b) const { return ascend ? a > b : a < b; }
};

BoundResult find_bound(const Network& net, const Polyhedron& p, const SearchParams& params, std::size_t output,
                       const LpBackend& lp, Direction dir, std::optional<Clock::time_point> deadline) {
  params.validate();
  if (p.dim() != net.input_dim())
    throw DimensionMismatch("polyhedron has dimension " + std::to_string(p.dim()) + ", network has " +
                            std::to_string(net.input_dim()) + " inputs");
  const Network single = net.output_slice(output);
  const Box box = bounding_box(p, lp);

  BoundResult result;
  const std::vector<Vector> samples = initial_samples(p, params.restarts, params.seed, lp);
  result.initial_value = evaluate(single, samples.front());
  for (const Vector& s : samples) {
    const double v = evaluate(single, s);
    if (dir.better(v, result.initial_value)) result.initial_value = v;
  }

  // Restart local searches run independently; the best one seeds the loop.
  std::vector<LocalSearchResult> starts(samples.size());
  parallel_for(samples.size(), params.workers, [&](std::size_t i) {
    starts[i] = local_search(single, samples[i], p, params, dir.ascend, 0, lp);
  });
  std::size_t best = 0;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    result.local_steps += starts[i].steps;
    if (dir.better(starts[i].value, starts[best].value)) best = i;
  }
  Vector x = starts[best].point;
  double value = starts[best].value;

  const MilpLimits limits{params.node_limit, deadline};
  const ThresholdSense sense = dir.ascend ? ThresholdSense::AtLeast : ThresholdSense::AtMost;
  while (true) {
    // Never let a threshold fall back below the previous one.
    double level = value;
    if (!result.thresholds.empty() && dir.better(result.thresholds.back(), level)) level = result.thresholds.back();
    const double threshold = level + dir.sign() * params.delta;

    if (deadline && Clock::now() >= *deadline) {
      result.status = RangeStatus::TimeLimit;
      break;
    }
    result.thresholds.push_back(threshold);
    ++result.rounds;

    const MilpProblem problem = encode_network(single, p, box, threshold, sense);
    FeasibilityVerdict verdict;
    try {
      verdict = solve_feasibility(problem, std::nullopt, limits, lp);
    } catch (const LimitExceeded& e) {
      result.milp += e.stats();
      result.status = e.kind() == LimitExceeded::Kind::Time ? RangeStatus::TimeLimit : RangeStatus::NodeLimit;
      break;
    }
    result.milp += verdict.stats;

    if (!verdict.feasible) {
      result.arg = x;
      result.bound = threshold;
      result.status = RangeStatus::Tight;
      return result;
    }

    // Counter-example guided hop: resume local search from the witness.
    const LocalSearchResult hop = local_search(single, verdict.witness, p, params, dir.ascend, 0, lp);
    result.local_steps += hop.steps;
    x = hop.point;
    value = hop.value;
  }

  // Not tight: report the best value actually attained.
  result.arg = x;
  result.bound = value;
  return result;
}

}  // namespace

void SearchParams::validate() const {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw Error("delta must be a positive finite number");
  if (restarts < 1) throw Error("restarts must be at least 1");
  if (min_improvement && *min_improvement < 0.0) throw Error("min_improvement must be nonnegative");
  if (time_limit && !(*time_limit > 0.0)) throw Error("time_limit must be positive");
}

std::string to_string(RangeStatus status) {
  switch (status) {
    case RangeStatus::Tight: return "Tight";
    case RangeStatus::TimeLimit: return "TimeLimit";
    case RangeStatus::NodeLimit: return "NodeLimit";
  }
  return "Unknown";
}

std::string to_string(Certification c) {
  switch (c) {
    case Certification::Certified: return "Certified";
    case Certification::Counterexample: return "Counterexample";
    case Certification::Undetermined: return "Undetermined";
  }
  return "Unknown";
}

Polyhedron locally_active_region(const Network& net, const Vector& x) {
  const ActivationPattern pattern = activation_pattern(net, x);
  const auto maps = preactivation_maps(net, pattern);
  Polyhedron region(net.input_dim());
  for (std::size_t l = 0; l < maps.size(); ++l) {
    const auto& [coeffs, offset] = maps[l];
    for (Eigen::Index j = 0; j < coeffs.rows(); ++j) {
      const Vector g = coeffs.row(j).transpose();
      if (pattern.layers[l][static_cast<std::size_t>(j)])
        region.add_row(-g, offset(j), false);  // g.x + h >= 0
      else
        region.add_row(g, -offset(j), true);  // g.x + h < 0
    }
  }
  return region;
}

StepResult local_step(const Network& net, const Vector& x, const Polyhedron& p, bool ascend, std::size_t output,
                      const LpBackend& lp) {
  const double current = evaluate(net, x, output);
  const Vector grad = gradient(net, x, output);
  const auto next = region_lp(net, x, p, ascend ? grad : Vector(-grad), lp);
  if (!next) return {x, current};
  const double value = evaluate(net, *next, output);
  // The LP optimum is at least as good as x up to rounding; keep x otherwise.
  if (Direction{ascend}.better(current, value)) return {x, current};
  return {*next, value};
}

LocalSearchResult local_search(const Network& net, const Vector& x0, const Polyhedron& p, const SearchParams& params,
                               bool ascend, std::size_t output, const LpBackend& lp) {
  const Direction dir{ascend};
  LocalSearchResult result{x0, evaluate(net, x0, output), 0};
  const double min_gain = params.improvement_threshold();
  while (result.steps < params.max_local_iters) {
    // Plateau: a constant objective cannot improve, leave it to global search.
    if (gradient(net, result.point, output).isZero(0.0)) break;
    const StepResult step = local_step(net, result.point, p, ascend, output, lp);
    ++result.steps;
    const double gain = dir.sign() * (step.value - result.value);
    const double step_norm = (step.point - result.point).norm();
    if (gain > 0.0) {
      result.point = step.point;
      result.value = step.value;
    }
    if (gain < min_gain || step_norm < params.min_step_norm) break;
  }
  return result;
}

BoundResult find_upper_bound(const Network& net, const Polyhedron& p, const SearchParams& params, std::size_t output,
                             const LpBackend& lp) {
  return find_bound(net, p, params, output, lp, Direction{true}, deadline_from(params));
}

BoundResult find_lower_bound(const Network& net, const Polyhedron& p, const SearchParams& params, std::size_t output,
                             const LpBackend& lp) {
  return find_bound(net, p, params, output, lp, Direction{false}, deadline_from(params));
}

RangeResult estimate_range(const Network& net, const Polyhedron& p, std::size_t output, const SearchParams& params,
                           const LpBackend& lp) {
  params.validate();
  if (output >= net.output_dim())
    throw DimensionMismatch("output index " + std::to_string(output) + " out of range (network has " +
                            std::to_string(net.output_dim()) + " outputs)");
  const auto deadline = deadline_from(params);

  RangeResult r;
  r.output = output;
  r.delta = params.delta;
  if (resolve_workers(params.workers) > 1) {
    auto upper = std::async(std::launch::async,
                            [&] { return find_bound(net, p, params, output, lp, Direction{true}, deadline); });
    r.lower_search = find_bound(net, p, params, output, lp, Direction{false}, deadline);
    r.upper_search = upper.get();
  } else {
    r.upper_search = find_bound(net, p, params, output, lp, Direction{true}, deadline);
    r.lower_search = find_bound(net, p, params, output, lp, Direction{false}, deadline);
  }
  r.upper = r.upper_search.bound;
  r.lower = r.lower_search.bound;
  r.arg_upper = r.upper_search.arg;
  r.arg_lower = r.lower_search.arg;
  r.status = r.upper_search.status != RangeStatus::Tight ? r.upper_search.status : r.lower_search.status;
  return r;
}

nlohmann::json to_json(const RangeResult& r) {
  auto vec = [](const Vector& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
  };
  const MilpStats milp = r.milp_stats();
  return {{"output", r.output},
          {"lower", r.lower},
          {"upper", r.upper},
          {"delta", r.delta},
          {"status", to_string(r.status)},
          {"iterations",
           {{"upper_rounds", r.upper_search.rounds},
            {"lower_rounds", r.lower_search.rounds},
            {"local_steps", r.local_steps()},
            {"milp_nodes", milp.nodes},
            {"lp_solves", milp.lp_solves},
            {"milp_seconds", milp.seconds}}},
          {"arg_upper", vec(r.arg_upper)},
          {"arg_lower", vec(r.arg_lower)}};
}

std::vector<Vector> initial_samples(const Polyhedron& p, std::size_t count, std::uint64_t seed, const LpBackend& lp) {
  std::vector<Vector> samples;
  samples.push_back(interior_sample(p, lp));
  if (count <= 1) return samples;
  const Box box = bounding_box(p, lp);
  const Polyhedron closed = p.closure();
  CounterRng rng(seed, 0);
  while (samples.size() < count) {
    Vector target(box.lo.size());
    for (Eigen::Index j = 0; j < target.size(); ++j) target(j) = rng.uniform(box.lo(j), box.hi(j));
    samples.push_back(closed.contains(target) ? target : project_l1(p, target, lp));
  }
  return samples;
}

std::optional<Vector> adversarial_search(const Network& net, const Polyhedron& p, std::size_t source_label,
                                         const SearchParams& params, const LpBackend& lp) {
  params.validate();
  if (source_label >= net.output_dim())
    throw DimensionMismatch("label " + std::to_string(source_label) + " out of range (network has " +
                            std::to_string(net.output_dim()) + " outputs)");
  if (net.output_dim() < 2) return std::nullopt;
  const auto src = static_cast<Eigen::Index>(source_label);

  // Best competing label and the margin l_best - l_source.
  auto competitor = [&](const Vector& outs) {
    Eigen::Index best = src == 0 ? 1 : 0;
    for (Eigen::Index k = 0; k < outs.size(); ++k)
      if (k != src && outs(k) > outs(best)) best = k;
    return std::pair{best, outs(best) - outs(src)};
  };
  auto flipped = [&](const Vector& x) {
    return competitor(forward(net, x).outputs).second > 0.0 && p.contains(x, kMembershipTol);
  };

  const double min_gain = params.improvement_threshold();
  for (Vector x : initial_samples(p, params.restarts, params.seed, lp)) {
    if (flipped(x)) return x;
    for (std::size_t it = 0; it < params.max_local_iters; ++it) {
      const auto [rival, margin] = competitor(forward(net, x).outputs);
      const Vector g = gradient(net, x, static_cast<std::size_t>(rival)) - gradient(net, x, source_label);
      if (g.isZero(0.0)) break;
      const auto next = region_lp(net, x, p, g, lp);
      if (!next) break;
      if (flipped(*next)) return *next;
      const double gain = competitor(forward(net, *next).outputs).second - margin;
      const double step_norm = (*next - x).norm();
      if (gain > 0.0) x = *next;
      if (gain < min_gain || step_norm < params.min_step_norm) break;
    }
  }
  return std::nullopt;
}

CertifyResult certify_label(const Network& net, const Polyhedron& p, std::size_t label, const SearchParams& params,
                            const LpBackend& lp) {
  if (net.output_dim() < 2) throw DimensionMismatch("certification needs a network with at least 2 outputs");
  if (label >= net.output_dim())
    throw DimensionMismatch("label " + std::to_string(label) + " out of range (network has " +
                            std::to_string(net.output_dim()) + " outputs)");
  CertifyResult result;
  result.ranges.resize(net.output_dim());
  SearchParams inner = params;
  inner.workers = 1;
  parallel_for(net.output_dim(), params.workers,
               [&](std::size_t k) { result.ranges[k] = estimate_range(net, p, k, inner, lp); });

  const RangeResult& own = result.ranges[label];
  for (std::size_t k = 0; k < net.output_dim(); ++k) {
    if (k == label) continue;
    const RangeResult& other = result.ranges[k];
    const bool separated =
        own.status == RangeStatus::Tight && other.status == RangeStatus::Tight && own.lower > other.upper;
    if (!separated) result.overlapping.push_back(k);
  }
  if (result.overlapping.empty()) {
    result.verdict = Certification::Certified;
    return result;
  }
  result.counterexample = adversarial_search(net, p, label, params, lp);
  result.verdict = result.counterexample ? Certification::Counterexample : Certification::Undetermined;
  return result;
}

}  // namespace nnrange

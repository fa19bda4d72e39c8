#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nnrange/lp.hpp"
#include "nnrange/milp.hpp"
#include "nnrange/network.hpp"
#include "nnrange/polytope.hpp"

namespace nnrange {

struct SearchParams {
  double delta = 1e-3;
  std::size_t max_local_iters = 1000;
  /// Defaults to delta / 10 when unset.
  std::optional<double> min_improvement;
  double min_step_norm = 1e-9;
  std::size_t restarts = 4;
  /// Seconds per bound computation; unset = no limit.
  std::optional<double> time_limit;
  std::size_t node_limit = 1'000'000;
  /// Concurrency cap for restarts and independent bounds; 0 = hardware concurrency.
  std::size_t workers = 0;
  std::uint64_t seed = 0;

  double improvement_threshold() const { return min_improvement.value_or(delta / 10.0); }
  void validate() const;
};

enum class RangeStatus { Tight, TimeLimit, NodeLimit };

std::string to_string(RangeStatus status);

/// Locally active region: inputs sharing x's activation pattern. Active
/// neurons give non-strict rows (pre >= 0), inactive ones strict rows (pre < 0).
Polyhedron locally_active_region(const Network& net, const Vector& x);

struct StepResult {
  Vector point;
  double value = 0.0;
};

/// One LP step: maximize grad F(x) . y over closure(L(x)) intersected with closure(P).
/// `ascend = false` minimizes instead.
StepResult local_step(const Network& net, const Vector& x, const Polyhedron& p, bool ascend = true,
                      std::size_t output = 0, const LpBackend& lp = default_lp());

struct LocalSearchResult {
  Vector point;
  double value = 0.0;
  std::size_t steps = 0;
};

/// Iterates local_step until the improvement drops below
/// params.improvement_threshold(), the step is shorter than
/// params.min_step_norm, or params.max_local_iters steps were taken. Never
/// returns a worse value than the start.
LocalSearchResult local_search(const Network& net, const Vector& x0, const Polyhedron& p, const SearchParams& params,
                               bool ascend = true, std::size_t output = 0, const LpBackend& lp = default_lp());

struct BoundResult {
  Vector arg;          // best point found; F(arg) is within delta of bound when tight
  double bound = 0.0;  // u (or l)
  RangeStatus status = RangeStatus::Tight;
  std::size_t rounds = 0;  // global-search calls
  std::size_t local_steps = 0;
  MilpStats milp;
  double initial_value = 0.0;      // best F over the initial samples
  std::vector<double> thresholds;  // global-search thresholds in call order
};

/// Alternates local search with MILP global search until the threshold
/// local_max + delta is proven unreachable. Tight results satisfy
/// u* <= bound <= u* + delta.
BoundResult find_upper_bound(const Network& net, const Polyhedron& p, const SearchParams& params = {},
                             std::size_t output = 0, const LpBackend& lp = default_lp());

/// Mirror image: descent steps, threshold local_min - delta, AtMost encoding.
BoundResult find_lower_bound(const Network& net, const Polyhedron& p, const SearchParams& params = {},
                             std::size_t output = 0, const LpBackend& lp = default_lp());

struct RangeResult {
  std::size_t output = 0;
  double lower = 0.0;
  double upper = 0.0;
  double delta = 0.0;
  Vector arg_lower;
  Vector arg_upper;
  RangeStatus status = RangeStatus::Tight;
  BoundResult lower_search;
  BoundResult upper_search;

  std::size_t local_steps() const { return lower_search.local_steps + upper_search.local_steps; }
  MilpStats milp_stats() const {
    MilpStats s = lower_search.milp;
    s += upper_search.milp;
    return s;
  }
};

RangeResult estimate_range(const Network& net, const Polyhedron& p, std::size_t output = 0,
                           const SearchParams& params = {}, const LpBackend& lp = default_lp());

/// Machine-readable result record.
nlohmann::json to_json(const RangeResult& r);

/// Ascends max_{k != source} l_k - l_source with LP steps from several
/// starts; returns the first point whose output favours another label.
std::optional<Vector> adversarial_search(const Network& net, const Polyhedron& p, std::size_t source_label,
                                         const SearchParams& params = {}, const LpBackend& lp = default_lp());

enum class Certification { Certified, Counterexample, Undetermined };

std::string to_string(Certification c);

struct CertifyResult {
  Certification verdict = Certification::Undetermined;
  std::optional<Vector> counterexample;
  std::vector<std::size_t> overlapping;  // labels whose range is not separated from the source
  std::vector<RangeResult> ranges;
};

/// Certified iff lower(l_label) > upper(l_k) for every k != label.
/// Otherwise tries adversarial_search; without a counterexample the
/// verdict is Undetermined.
CertifyResult certify_label(const Network& net, const Polyhedron& p, std::size_t label,
                            const SearchParams& params = {}, const LpBackend& lp = default_lp());

/// `count` starting points: the Chebyshev center, then random points of the
/// bounding box moved into P.
std::vector<Vector> initial_samples(const Polyhedron& p, std::size_t count, std::uint64_t seed,
                                    const LpBackend& lp = default_lp());

}  // namespace nnrange

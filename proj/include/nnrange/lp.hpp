#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "nnrange/network.hpp"

namespace nnrange {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Relation { LessEqual, GreaterEqual, Equal };
enum class ObjectiveSense { Minimize, Maximize };

struct LinearConstraint {
  Vector coeffs;
  Relation relation = Relation::LessEqual;
  double rhs = 0.0;
};

/// Dense linear program: optimize objective . x subject to rows and per-variable bounds.
///
/// Bounds default to (-inf, +inf). A zero objective turns solve() into a
/// feasibility query.
struct LinearProgram {
  explicit LinearProgram(std::size_t num_vars = 0);

  std::size_t num_vars() const { return static_cast<std::size_t>(lower.size()); }
  std::size_t num_rows() const { return rows.size(); }

  void add_row(Vector coeffs, Relation relation, double rhs);
  void set_bounds(std::size_t var, double lo, double hi);

  Vector objective;
  ObjectiveSense sense = ObjectiveSense::Minimize;
  std::vector<LinearConstraint> rows;
  Vector lower;
  Vector upper;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpOutcome {
  LpStatus status = LpStatus::Infeasible;
  Vector point;              // Optimal only
  double objective_value = 0.0;
  /// Infeasible only: row multipliers y with y_i >= 0 on <= rows, y_i <= 0 on
  /// >= rows, such that min over the variable bounds of (y^T A) x exceeds y^T rhs.
  Vector farkas;
  std::size_t iterations = 0;

  bool optimal() const { return status == LpStatus::Optimal; }
};

struct SimplexOptions {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  double pivot_tol = 1e-9;
  std::size_t max_iterations = 1'000'000;
  /// Consecutive non-improving pivots before switching to Bland's rule.
  std::size_t bland_after = 500;
  std::size_t refactor_period = 100;
};

/// Pluggable LP engine. Implementations must be safe to call concurrently
/// on independent programs.
class LpBackend {
 public:
  virtual ~LpBackend() = default;
  virtual LpOutcome solve(const LinearProgram& lp) const = 0;
};

/// Built-in dense bounded-variable primal simplex (two phases, Dantzig
/// pricing with a Bland fallback against cycling).
class SimplexBackend final : public LpBackend {
 public:
  SimplexBackend() = default;
  explicit SimplexBackend(SimplexOptions options) : options_(options) {}

  LpOutcome solve(const LinearProgram& lp) const override;

 private:
  SimplexOptions options_;
};

/// Process-wide default backend (a SimplexBackend).
const LpBackend& default_lp();

/// Throws NumericFailure on stalled pivoting; Infeasible/Unbounded are outcomes, not errors.
LpOutcome solve(const LinearProgram& lp, const LpBackend& backend = default_lp());

/// Same rows and bounds with a zero objective.
LpOutcome feasible_point(const LinearProgram& constraints, const LpBackend& backend = default_lp());

/// Checks an infeasibility certificate produced by the simplex kernel.
bool verify_farkas(const LinearProgram& lp, const Vector& y, double tol = 1e-9);

/// Largest violation of any row or bound by `x`.
double max_violation(const LinearProgram& lp, const Vector& x);

}  // namespace nnrange

#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "nnrange/lp.hpp"
#include "nnrange/network.hpp"

namespace nnrange {

struct Box {
  Vector lo;
  Vector hi;

  std::size_t dim() const { return static_cast<std::size_t>(lo.size()); }
  bool contains(const Vector& x, double tol = 0.0) const;
};

/// Convex polyhedron {x : A_i x <= b_i (or < b_i where strict[i])}.
///
/// Strictness only matters for membership bookkeeping; every LP works on
/// closure().
class Polyhedron {
 public:
  explicit Polyhedron(std::size_t dim);  // whole space, no rows
  Polyhedron(Matrix a, Vector b, std::vector<bool> strict = {});

  static Polyhedron from_box(const Box& box);
  static Polyhedron from_box(const Vector& lo, const Vector& hi) { return from_box(Box{lo, hi}); }

  std::size_t dim() const { return static_cast<std::size_t>(a_.cols()); }
  std::size_t num_rows() const { return static_cast<std::size_t>(a_.rows()); }
  const Matrix& a() const { return a_; }
  const Vector& b() const { return b_; }
  const std::vector<bool>& strict() const { return strict_; }

  /// Appends a_row . x <= rhs (or < rhs).
  void add_row(const Vector& a_row, double rhs, bool strict = false);

  bool contains(const Vector& x, double tol = 0.0) const;
  Polyhedron closure() const;
  Polyhedron intersect(const Polyhedron& other) const;

  /// Rows of closure() as LP constraints over the first dim() variables of a
  /// program with `num_vars` variables.
  void append_to(LinearProgram& lp) const;
  LinearProgram as_lp() const;

  bool operator==(const Polyhedron& other) const;

 private:
  Matrix a_;
  Vector b_;
  std::vector<bool> strict_;
};

/// Tightest axis-aligned box around closure(P): one LP per coordinate and direction.
/// Throws InfeasibleSet / UnboundedSet.
Box bounding_box(const Polyhedron& p, const LpBackend& lp = default_lp());

struct ChebyshevBall {
  Vector center;
  double radius = 0.0;
};

/// Largest inscribed ball of closure(P). Throws InfeasibleSet, UnboundedSet,
/// or DegenerateSet when the radius is <= 1e-12.
ChebyshevBall chebyshev_ball(const Polyhedron& p, const LpBackend& lp = default_lp());

/// Chebyshev center: an interior point with positive slack on every row.
Vector interior_sample(const Polyhedron& p, const LpBackend& lp = default_lp());

/// Point of closure(P) closest to `target` in the L1 norm.
Vector project_l1(const Polyhedron& p, const Vector& target, const LpBackend& lp = default_lp());

// Polyhedron file: {"A": [[..]], "b": [..], "strict": [bools]} (strict optional).
Polyhedron load_polyhedron(std::istream& in);
Polyhedron load_polyhedron_file(const std::string& path);
void save_polyhedron(const Polyhedron& p, std::ostream& out);

}  // namespace nnrange

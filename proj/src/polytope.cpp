#include "nnrange/polytope.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <ostream>

#include <json.hpp>

#include "nnrange/error.hpp"

namespace nnrange {

using json = nlohmann::json;

bool Box::contains(const Vector& x, double tol) const {
  if (x.size() != lo.size()) throw DimensionMismatch("box/point dimension mismatch");
  for (Eigen::Index j = 0; j < x.size(); ++j)
    if (x(j) < lo(j) - tol || x(j) > hi(j) + tol) return false;
  return true;
}

Polyhedron::Polyhedron(std::size_t dim) : a_(0, static_cast<Eigen::Index>(dim)), b_(0) {}

Polyhedron::Polyhedron(Matrix a, Vector b, std::vector<bool> strict)
    : a_(std::move(a)), b_(std::move(b)), strict_(std::move(strict)) {
  if (strict_.empty()) strict_.assign(static_cast<std::size_t>(a_.rows()), false);
  if (b_.size() != a_.rows())
    throw DimensionMismatch("polyhedron has " + std::to_string(a_.rows()) + " rows but b has length " +
                            std::to_string(b_.size()));
  if (strict_.size() != static_cast<std::size_t>(a_.rows()))
    throw DimensionMismatch("polyhedron strict flags have length " + std::to_string(strict_.size()) +
                            ", expected " + std::to_string(a_.rows()));
  if (!a_.allFinite() || !b_.allFinite()) throw ParseError("polyhedron contains a non-finite value");
}

Polyhedron Polyhedron::from_box(const Box& box) {
  const Eigen::Index d = box.lo.size();
  if (box.hi.size() != d) throw DimensionMismatch("box bounds have different lengths");
  Matrix a = Matrix::Zero(2 * d, d);
  Vector b(2 * d);
  for (Eigen::Index j = 0; j < d; ++j) {
    if (box.lo(j) > box.hi(j)) throw InfeasibleSet("box has lo > hi in coordinate " + std::to_string(j));
    a(2 * j, j) = 1.0;
    b(2 * j) = box.hi(j);
    a(2 * j + 1, j) = -1.0;
    b(2 * j + 1) = -box.lo(j);
  }
  return Polyhedron(std::move(a), std::move(b));
}

void Polyhedron::add_row(const Vector& a_row, double rhs, bool strict) {
  if (a_row.size() != a_.cols()) throw DimensionMismatch("row width does not match polyhedron dimension");
  a_.conservativeResize(a_.rows() + 1, Eigen::NoChange);
  a_.row(a_.rows() - 1) = a_row.transpose();
  b_.conservativeResize(b_.size() + 1);
  b_(b_.size() - 1) = rhs;
  strict_.push_back(strict);
}

bool Polyhedron::contains(const Vector& x, double tol) const {
  if (x.size() != a_.cols())
    throw DimensionMismatch("point has length " + std::to_string(x.size()) + ", polyhedron dimension is " +
                            std::to_string(a_.cols()));
  for (Eigen::Index i = 0; i < a_.rows(); ++i) {
    const double lhs = a_.row(i).dot(x);
    const double limit = b_(i) + tol;
    if (strict_[static_cast<std::size_t>(i)] ? !(lhs < limit) : !(lhs <= limit)) return false;
  }
  return true;
}

Polyhedron Polyhedron::closure() const {
  Polyhedron out = *this;
  out.strict_.assign(strict_.size(), false);
  return out;
}

Polyhedron Polyhedron::intersect(const Polyhedron& other) const {
  if (other.dim() != dim())
    throw DimensionMismatch("cannot intersect polyhedra of dimension " + std::to_string(dim()) + " and " +
                            std::to_string(other.dim()));
  Matrix a(a_.rows() + other.a_.rows(), a_.cols());
  a << a_, other.a_;
  Vector b(b_.size() + other.b_.size());
  b << b_, other.b_;
  std::vector<bool> strict = strict_;
  strict.insert(strict.end(), other.strict_.begin(), other.strict_.end());
  return Polyhedron(std::move(a), std::move(b), std::move(strict));
}

void Polyhedron::append_to(LinearProgram& lp) const {
  const auto n = static_cast<Eigen::Index>(lp.num_vars());
  if (n < a_.cols()) throw DimensionMismatch("program has fewer variables than polyhedron dimension");
  for (Eigen::Index i = 0; i < a_.rows(); ++i) {
    Vector row = Vector::Zero(n);
    row.head(a_.cols()) = a_.row(i).transpose();
    lp.add_row(std::move(row), Relation::LessEqual, b_(i));
  }
}

LinearProgram Polyhedron::as_lp() const {
  LinearProgram lp(dim());
  append_to(lp);
  return lp;
}

bool Polyhedron::operator==(const Polyhedron& other) const {
  return a_.rows() == other.a_.rows() && a_.cols() == other.a_.cols() && a_ == other.a_ && b_ == other.b_ &&
         strict_ == other.strict_;
}

Box bounding_box(const Polyhedron& p, const LpBackend& lp) {
  const auto d = static_cast<Eigen::Index>(p.dim());
  LinearProgram prog = p.as_lp();
  Box box{Vector(d), Vector(d)};
  for (Eigen::Index j = 0; j < d; ++j) {
    for (ObjectiveSense sense : {ObjectiveSense::Minimize, ObjectiveSense::Maximize}) {
      prog.objective.setZero();
      prog.objective(j) = 1.0;
      prog.sense = sense;
      const LpOutcome out = lp.solve(prog);
      if (out.status == LpStatus::Infeasible) throw InfeasibleSet("polyhedron is empty");
      if (out.status == LpStatus::Unbounded)
        throw UnboundedSet("polyhedron is unbounded in coordinate " + std::to_string(j));
      (sense == ObjectiveSense::Minimize ? box.lo : box.hi)(j) = out.objective_value;
    }
  }
  return box;
}

ChebyshevBall chebyshev_ball(const Polyhedron& p, const LpBackend& lp) {
  const auto d = static_cast<Eigen::Index>(p.dim());
  // Variables: x (free), r >= 0. Maximize r s.t. A_i x + r ||A_i|| <= b_i.
  LinearProgram prog(p.dim() + 1);
  prog.set_bounds(p.dim(), 0.0, kInfinity);
  prog.objective(d) = 1.0;
  prog.sense = ObjectiveSense::Maximize;
  for (Eigen::Index i = 0; i < p.a().rows(); ++i) {
    Vector row(d + 1);
    row.head(d) = p.a().row(i).transpose();
    row(d) = p.a().row(i).norm();
    prog.add_row(std::move(row), Relation::LessEqual, p.b()(i));
  }
  const LpOutcome out = lp.solve(prog);
  if (out.status == LpStatus::Infeasible) throw InfeasibleSet("polyhedron is empty");
  if (out.status == LpStatus::Unbounded) throw UnboundedSet("polyhedron contains arbitrarily large balls");
  ChebyshevBall ball{out.point.head(d), out.point(d)};
  if (ball.radius <= 1e-12) throw DegenerateSet("polyhedron has an empty interior");
  return ball;
}

Vector interior_sample(const Polyhedron& p, const LpBackend& lp) { return chebyshev_ball(p, lp).center; }

Vector project_l1(const Polyhedron& p, const Vector& target, const LpBackend& lp) {
  const std::size_t d = p.dim();
  if (static_cast<std::size_t>(target.size()) != d) throw DimensionMismatch("projection target has wrong length");
  // Variables: x (d), e (d) with e >= |x - target|; minimize sum e.
  LinearProgram prog(2 * d);
  p.append_to(prog);
  for (std::size_t j = 0; j < d; ++j) {
    prog.set_bounds(d + j, 0.0, kInfinity);
    prog.objective(static_cast<Eigen::Index>(d + j)) = 1.0;
    Vector up = Vector::Zero(static_cast<Eigen::Index>(2 * d));
    up(static_cast<Eigen::Index>(j)) = 1.0;
    up(static_cast<Eigen::Index>(d + j)) = -1.0;
    prog.add_row(up, Relation::LessEqual, target(static_cast<Eigen::Index>(j)));
    Vector down = Vector::Zero(static_cast<Eigen::Index>(2 * d));
    down(static_cast<Eigen::Index>(j)) = -1.0;
    down(static_cast<Eigen::Index>(d + j)) = -1.0;
    prog.add_row(down, Relation::LessEqual, -target(static_cast<Eigen::Index>(j)));
  }
  const LpOutcome out = lp.solve(prog);
  if (out.status != LpStatus::Optimal) throw InfeasibleSet("polyhedron is empty");
  return out.point.head(static_cast<Eigen::Index>(d));
}

Polyhedron load_polyhedron(std::istream& in) {
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("polyhedron file: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("A") || !doc.contains("b"))
    throw ParseError("polyhedron file: expected an object with \"A\" and \"b\"");
  const json& ja = doc["A"];
  const json& jb = doc["b"];
  if (!ja.is_array() || !jb.is_array()) throw ParseError("polyhedron file: \"A\" and \"b\" must be arrays");
  if (ja.size() != jb.size())
    throw DimensionMismatch("polyhedron file: A has " + std::to_string(ja.size()) + " rows, b has " +
                            std::to_string(jb.size()) + " entries");
  if (ja.empty()) throw ParseError("polyhedron file: at least one row is required to fix the dimension");
  if (!ja[0].is_array() || ja[0].empty()) throw ParseError("polyhedron file: A[0] must be a non-empty array");
  const std::size_t d = ja[0].size();
  Matrix a(static_cast<Eigen::Index>(ja.size()), static_cast<Eigen::Index>(d));
  Vector b(static_cast<Eigen::Index>(jb.size()));
  for (std::size_t i = 0; i < ja.size(); ++i) {
    const std::string where = "A[" + std::to_string(i) + "]";
    if (!ja[i].is_array() || ja[i].size() != d)
      throw DimensionMismatch("polyhedron file: " + where + " must have " + std::to_string(d) + " entries");
    for (std::size_t j = 0; j < d; ++j) {
      if (!ja[i][j].is_number()) throw ParseError("polyhedron file: " + where + "[" + std::to_string(j) + "] is not a number");
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = ja[i][j].get<double>();
    }
    if (!jb[i].is_number()) throw ParseError("polyhedron file: b[" + std::to_string(i) + "] is not a number");
    b(static_cast<Eigen::Index>(i)) = jb[i].get<double>();
  }
  std::vector<bool> strict;
  if (doc.contains("strict")) {
    const json& js = doc["strict"];
    if (!js.is_array() || js.size() != ja.size())
      throw ParseError("polyhedron file: \"strict\" must be a boolean array with one entry per row");
    for (const json& s : js) {
      if (!s.is_boolean()) throw ParseError("polyhedron file: \"strict\" entries must be booleans");
      strict.push_back(s.get<bool>());
    }
  }
  return Polyhedron(std::move(a), std::move(b), std::move(strict));
}

Polyhedron load_polyhedron_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open polyhedron file " + path);
  return load_polyhedron(in);
}

void save_polyhedron(const Polyhedron& p, std::ostream& out) {
  json ja = json::array();
  json jb = json::array();
  json js = json::array();
  for (Eigen::Index i = 0; i < p.a().rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < p.a().cols(); ++j) row.push_back(p.a()(i, j));
    ja.push_back(row);
    jb.push_back(p.b()(i));
    js.push_back(static_cast<bool>(p.strict()[static_cast<std::size_t>(i)]));
  }
  out << json{{"A", ja}, {"b", jb}, {"strict", js}}.dump() << '\n';
}

}  // namespace nnrange

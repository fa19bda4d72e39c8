#include <algorithm>
#include <cmath>
#include <string>

#include "nnrange/error.hpp"
#include "nnrange/lp.hpp"

namespace nnrange {

LinearProgram::LinearProgram(std::size_t num_vars)
    : objective(Vector::Zero(static_cast<Eigen::Index>(num_vars))),
      lower(Vector::Constant(static_cast<Eigen::Index>(num_vars), -kInfinity)),
      upper(Vector::Constant(static_cast<Eigen::Index>(num_vars), kInfinity)) {}

void LinearProgram::add_row(Vector coeffs, Relation relation, double rhs) {
  if (static_cast<std::size_t>(coeffs.size()) != num_vars())
    throw DimensionMismatch("constraint row has " + std::to_string(coeffs.size()) +
                            " coefficients, program has " + std::to_string(num_vars()) + " variables");
  rows.push_back({std::move(coeffs), relation, rhs});
}

void LinearProgram::set_bounds(std::size_t var, double lo, double hi) {
  lower(static_cast<Eigen::Index>(var)) = lo;
  upper(static_cast<Eigen::Index>(var)) = hi;
}

namespace {

enum class VarState : unsigned char { Basic, AtLower, AtUpper, Free, Fixed };

// Computational form: min cost . v  s.t.  a v = rhs,  lo <= v <= hi, where the
// columns are [structural | one slack per row | one artificial per row].
class Simplex {
 public:
  Simplex(const LinearProgram& lp, const SimplexOptions& opt);
  LpOutcome run();

 private:
  enum class PhaseResult { Optimal, Unbounded };

  PhaseResult optimize(const Vector& cost);
  void refactor();
  void pivot(Eigen::Index row, const Vector& alpha);
  void set_nonbasic_at_bound(Eigen::Index j, bool at_upper);

  const LinearProgram& lp_;
  SimplexOptions opt_;
  Eigen::Index m_ = 0;
  Eigen::Index n_ = 0;
  Eigen::Index ncols_ = 0;
  Matrix a_;
  Vector rhs_;
  Vector lo_;
  Vector hi_;
  Vector v_;
  std::vector<VarState> state_;
  std::vector<Eigen::Index> basis_;
  Matrix binv_;
  std::size_t iterations_ = 0;
  std::size_t since_refactor_ = 0;
};

Simplex::Simplex(const LinearProgram& lp, const SimplexOptions& opt) : lp_(lp), opt_(opt) {
  n_ = static_cast<Eigen::Index>(lp.num_vars());
  m_ = static_cast<Eigen::Index>(lp.num_rows());
  ncols_ = n_ + 2 * m_;
  if (lp.objective.size() != n_ || lp.upper.size() != n_)
    throw DimensionMismatch("linear program objective/bounds do not match variable count");

  a_ = Matrix::Zero(m_, ncols_);
  rhs_.resize(m_);
  lo_.resize(ncols_);
  hi_.resize(ncols_);
  v_ = Vector::Zero(ncols_);
  state_.assign(static_cast<std::size_t>(ncols_), VarState::Fixed);
  basis_.assign(static_cast<std::size_t>(m_), 0);

  for (Eigen::Index i = 0; i < m_; ++i) {
    const LinearConstraint& row = lp.rows[static_cast<std::size_t>(i)];
    if (row.coeffs.size() != n_) throw DimensionMismatch("constraint row width mismatch");
    if (!row.coeffs.allFinite() || !std::isfinite(row.rhs))
      throw NumericFailure("linear program has a non-finite coefficient");
    a_.row(i).head(n_) = row.coeffs.transpose();
    a_(i, n_ + i) = 1.0;
    rhs_(i) = row.rhs;
    switch (row.relation) {
      case Relation::LessEqual:
        lo_(n_ + i) = 0.0;
        hi_(n_ + i) = kInfinity;
        break;
      case Relation::GreaterEqual:
        lo_(n_ + i) = -kInfinity;
        hi_(n_ + i) = 0.0;
        break;
      case Relation::Equal:
        lo_(n_ + i) = 0.0;
        hi_(n_ + i) = 0.0;
        break;
    }
  }

  for (Eigen::Index j = 0; j < n_; ++j) {
    lo_(j) = lp.lower(j);
    hi_(j) = lp.upper(j);
    const bool lo_finite = std::isfinite(lo_(j));
    const bool hi_finite = std::isfinite(hi_(j));
    if (lo_finite && hi_finite && lo_(j) == hi_(j)) {
      state_[static_cast<std::size_t>(j)] = VarState::Fixed;
      v_(j) = lo_(j);
    } else if (lo_finite) {
      state_[static_cast<std::size_t>(j)] = VarState::AtLower;
      v_(j) = lo_(j);
    } else if (hi_finite) {
      state_[static_cast<std::size_t>(j)] = VarState::AtUpper;
      v_(j) = hi_(j);
    } else {
      state_[static_cast<std::size_t>(j)] = VarState::Free;
      v_(j) = 0.0;
    }
  }
}

void Simplex::set_nonbasic_at_bound(Eigen::Index j, bool at_upper) {
  auto& st = state_[static_cast<std::size_t>(j)];
  if (lo_(j) == hi_(j)) {
    st = VarState::Fixed;
    v_(j) = lo_(j);
  } else if (at_upper) {
    st = VarState::AtUpper;
    v_(j) = hi_(j);
  } else {
    st = VarState::AtLower;
    v_(j) = lo_(j);
  }
}

void Simplex::refactor() {
  since_refactor_ = 0;
  if (m_ == 0) return;
  Matrix basis_matrix(m_, m_);
  for (Eigen::Index i = 0; i < m_; ++i) basis_matrix.col(i) = a_.col(basis_[static_cast<std::size_t>(i)]);
  Eigen::FullPivLU<Matrix> lu(basis_matrix);
  if (!lu.isInvertible()) throw NumericFailure("simplex basis became singular");
  binv_ = lu.inverse();

  Vector residual = rhs_;
  for (Eigen::Index j = 0; j < ncols_; ++j)
    if (state_[static_cast<std::size_t>(j)] != VarState::Basic && v_(j) != 0.0) residual -= a_.col(j) * v_(j);
  const Vector xb = binv_ * residual;
  for (Eigen::Index i = 0; i < m_; ++i) v_(basis_[static_cast<std::size_t>(i)]) = xb(i);
}

void Simplex::pivot(Eigen::Index row, const Vector& alpha) {
  const double p = alpha(row);
  binv_.row(row) /= p;
  Vector col = alpha;
  col(row) = 0.0;
  const Eigen::RowVectorXd pivot_row = binv_.row(row);
  binv_.noalias() -= col * pivot_row;
  ++since_refactor_;
}

Simplex::PhaseResult Simplex::optimize(const Vector& cost) {
  std::size_t stall = 0;
  bool bland = false;
  Eigen::RowVectorXd cb(m_);

  while (true) {
    if (++iterations_ > opt_.max_iterations)
      throw NumericFailure("simplex exceeded " + std::to_string(opt_.max_iterations) + " iterations");
    if (since_refactor_ >= opt_.refactor_period) refactor();

    for (Eigen::Index i = 0; i < m_; ++i) cb(i) = cost(basis_[static_cast<std::size_t>(i)]);
    const Eigen::RowVectorXd pi = cb * binv_;
    const Eigen::RowVectorXd d = cost.transpose() - pi * a_;

    Eigen::Index entering = -1;
    double best_score = 0.0;
    for (Eigen::Index j = 0; j < ncols_; ++j) {
      const VarState st = state_[static_cast<std::size_t>(j)];
      const double dj = d(j);
      bool eligible = false;
      switch (st) {
        case VarState::AtLower: eligible = dj < -opt_.optimality_tol; break;
        case VarState::AtUpper: eligible = dj > opt_.optimality_tol; break;
        case VarState::Free: eligible = std::abs(dj) > opt_.optimality_tol; break;
        default: break;
      }
      if (!eligible) continue;
      if (bland) {
        entering = j;
        break;
      }
      if (std::abs(dj) > best_score) {
        best_score = std::abs(dj);
        entering = j;
      }
    }

    if (entering < 0) {
      if (since_refactor_ > 0) {
        refactor();
        continue;
      }
      return PhaseResult::Optimal;
    }

    const double dq = d(entering);
    const double dir = dq < 0.0 ? 1.0 : -1.0;
    const Vector alpha = binv_ * a_.col(entering);

    // Basic variable i moves by -dir * alpha(i) per unit step.
    const double flip = hi_(entering) - lo_(entering);
    double theta = std::isfinite(flip) ? flip : kInfinity;
    Eigen::Index leave = -1;

    auto ratio = [&](Eigen::Index i, double slack_tol) -> double {
      const double rate = dir * alpha(i);
      const Eigen::Index b = basis_[static_cast<std::size_t>(i)];
      if (rate > opt_.pivot_tol && std::isfinite(lo_(b))) return (v_(b) - lo_(b) + slack_tol) / rate;
      if (rate < -opt_.pivot_tol && std::isfinite(hi_(b))) return (hi_(b) - v_(b) + slack_tol) / -rate;
      return kInfinity;
    };

    if (bland) {
      for (Eigen::Index i = 0; i < m_; ++i) {
        const double t = std::max(0.0, ratio(i, 0.0));
        if (t < theta || (t == theta && leave >= 0 &&
                          basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)])) {
          theta = t;
          leave = i;
        }
      }
    } else {
      // Harris: bound the step with relaxed ratios, then pick the largest pivot among ties.
      double relaxed = kInfinity;
      for (Eigen::Index i = 0; i < m_; ++i) relaxed = std::min(relaxed, ratio(i, opt_.feasibility_tol));
      if (relaxed < theta) {
        double best_pivot = 0.0;
        for (Eigen::Index i = 0; i < m_; ++i) {
          const double t = ratio(i, 0.0);
          if (t <= relaxed && std::abs(alpha(i)) > best_pivot) {
            best_pivot = std::abs(alpha(i));
            leave = i;
            theta = std::max(0.0, t);
          }
        }
      }
    }

    if (!std::isfinite(theta)) return PhaseResult::Unbounded;

    if (theta > 0.0) {
      v_(entering) += dir * theta;
      for (Eigen::Index i = 0; i < m_; ++i) v_(basis_[static_cast<std::size_t>(i)]) -= dir * theta * alpha(i);
    }

    if (leave < 0) {
      set_nonbasic_at_bound(entering, dir > 0.0);
    } else {
      const Eigen::Index out = basis_[static_cast<std::size_t>(leave)];
      set_nonbasic_at_bound(out, dir * alpha(leave) < 0.0);
      basis_[static_cast<std::size_t>(leave)] = entering;
      state_[static_cast<std::size_t>(entering)] = VarState::Basic;
      pivot(leave, alpha);
    }

    if (theta * std::abs(dq) <= 1e-12) {
      if (++stall >= opt_.bland_after) bland = true;
    } else {
      stall = 0;
      bland = false;
    }
  }
}

LpOutcome Simplex::run() {
  LpOutcome out;
  for (Eigen::Index j = 0; j < n_; ++j) {
    if (lo_(j) > hi_(j)) {
      out.status = LpStatus::Infeasible;
      out.farkas = Vector::Zero(m_);
      return out;
    }
  }

  // Initial basis: a slack where the residual fits its bounds, otherwise a
  // signed artificial carrying |residual|.
  Vector residual = rhs_;
  for (Eigen::Index j = 0; j < n_; ++j)
    if (v_(j) != 0.0) residual -= a_.col(j) * v_(j);

  binv_ = Matrix::Zero(m_, m_);
  bool need_phase_one = false;
  for (Eigen::Index i = 0; i < m_; ++i) {
    const Eigen::Index slack = n_ + i;
    const Eigen::Index art = n_ + m_ + i;
    const double r = residual(i);
    if (r >= lo_(slack) && r <= hi_(slack)) {
      basis_[static_cast<std::size_t>(i)] = slack;
      state_[static_cast<std::size_t>(slack)] = VarState::Basic;
      v_(slack) = r;
      binv_(i, i) = 1.0;
      lo_(art) = hi_(art) = 0.0;
      state_[static_cast<std::size_t>(art)] = VarState::Fixed;
    } else {
      const double sign = r >= 0.0 ? 1.0 : -1.0;
      a_(i, art) = sign;
      lo_(art) = 0.0;
      hi_(art) = kInfinity;
      basis_[static_cast<std::size_t>(i)] = art;
      state_[static_cast<std::size_t>(art)] = VarState::Basic;
      v_(art) = std::abs(r);
      binv_(i, i) = sign;
      // 0 is always a bound of a slack.
      set_nonbasic_at_bound(slack, lo_(slack) != 0.0);
      need_phase_one = true;
    }
  }

  if (need_phase_one) {
    Vector cost = Vector::Zero(ncols_);
    cost.tail(m_).setOnes();
    optimize(cost);
    const double infeasibility = v_.tail(m_).sum();
    const double scale = 1.0 + (m_ > 0 ? rhs_.cwiseAbs().maxCoeff() : 0.0);
    if (infeasibility > opt_.feasibility_tol * scale) {
      Eigen::RowVectorXd cb(m_);
      for (Eigen::Index i = 0; i < m_; ++i) cb(i) = cost(basis_[static_cast<std::size_t>(i)]);
      out.status = LpStatus::Infeasible;
      out.farkas = -(cb * binv_).transpose();
      out.iterations = iterations_;
      return out;
    }
    for (Eigen::Index i = 0; i < m_; ++i) {
      const Eigen::Index art = n_ + m_ + i;
      hi_(art) = 0.0;
      if (state_[static_cast<std::size_t>(art)] != VarState::Basic) set_nonbasic_at_bound(art, false);
    }
  }

  Vector cost = Vector::Zero(ncols_);
  cost.head(n_) = lp_.sense == ObjectiveSense::Maximize ? Vector(-lp_.objective) : lp_.objective;
  if (optimize(cost) == PhaseResult::Unbounded) {
    out.status = LpStatus::Unbounded;
    out.iterations = iterations_;
    return out;
  }

  out.status = LpStatus::Optimal;
  out.point = v_.head(n_);
  for (Eigen::Index j = 0; j < n_; ++j) out.point(j) = std::clamp(out.point(j), lo_(j), hi_(j));
  out.objective_value = lp_.objective.dot(out.point);
  out.iterations = iterations_;
  return out;
}

}  // namespace

LpOutcome SimplexBackend::solve(const LinearProgram& lp) const {
  Simplex simplex(lp, options_);
  return simplex.run();
}

const LpBackend& default_lp() {
  static const SimplexBackend backend;
  return backend;
}

LpOutcome solve(const LinearProgram& lp, const LpBackend& backend) { return backend.solve(lp); }

LpOutcome feasible_point(const LinearProgram& constraints, const LpBackend& backend) {
  LinearProgram lp = constraints;
  lp.objective.setZero();
  return backend.solve(lp);
}

bool verify_farkas(const LinearProgram& lp, const Vector& y, double tol) {
  const auto n = static_cast<Eigen::Index>(lp.num_vars());
  for (Eigen::Index j = 0; j < n; ++j)
    if (lp.lower(j) > lp.upper(j)) return true;
  if (static_cast<std::size_t>(y.size()) != lp.num_rows()) return false;

  Vector combined = Vector::Zero(n);
  double rhs = 0.0;
  for (std::size_t i = 0; i < lp.num_rows(); ++i) {
    const double yi = y(static_cast<Eigen::Index>(i));
    const LinearConstraint& row = lp.rows[i];
    if (row.relation == Relation::LessEqual && yi < -tol) return false;
    if (row.relation == Relation::GreaterEqual && yi > tol) return false;
    combined += yi * row.coeffs;
    rhs += yi * row.rhs;
  }
  // Every feasible x satisfies combined . x <= rhs; the box must rule that out.
  double min_lhs = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double g = combined(j);
    if (std::abs(g) <= tol) continue;
    const double bound = g > 0.0 ? lp.lower(j) : lp.upper(j);
    if (!std::isfinite(bound)) return false;
    min_lhs += g * bound;
  }
  return min_lhs > rhs;
}

double max_violation(const LinearProgram& lp, const Vector& x) {
  double worst = 0.0;
  for (const LinearConstraint& row : lp.rows) {
    const double lhs = row.coeffs.dot(x);
    switch (row.relation) {
      case Relation::LessEqual: worst = std::max(worst, lhs - row.rhs); break;
      case Relation::GreaterEqual: worst = std::max(worst, row.rhs - lhs); break;
      case Relation::Equal: worst = std::max(worst, std::abs(lhs - row.rhs)); break;
    }
  }
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    worst = std::max(worst, lp.lower(j) - x(j));
    worst = std::max(worst, x(j) - lp.upper(j));
  }
  return worst;
}

}  // namespace nnrange

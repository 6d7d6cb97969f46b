#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace irsbf {

using cd = std::complex<double>;

/// sum over selected coordinates of |x_j|^2 <= radius^2.
struct BallConstraint {
  std::vector<int> selector;
  double radius = 0.0;
};

/// gain * Re{lhs x + lhs_offset} >= || [rhs_1 x + c_1, ..., rhs_R x + c_R, sigma] ||
/// together with Im{lhs x + lhs_offset} = 0.
struct SocConstraint {
  double gain = 1.0;
  Eigen::RowVectorXcd lhs;
  cd lhs_offset{0.0, 0.0};
  Eigen::MatrixXcd rhs;         // one form per row
  Eigen::VectorXcd rhs_offset;  // empty means zero
  double sigma = 0.0;
};

/// Concave quadratic program over a complex vector x:
///   maximize  -x^H Q x + 2 Re{v^H x} - offset
/// subject to the ball, per-coordinate box (|x_j| <= 1) and second-order-cone constraints.
struct ConeProblem {
  Eigen::MatrixXcd Q;
  // Optional factor with Q == Q_factor * Q_factor^H. Lets the solver exploit low rank.
  Eigen::MatrixXcd Q_factor;
  Eigen::VectorXcd v;
  double offset = 0.0;
  std::vector<BallConstraint> balls;
  std::vector<bool> box;  // empty, or one flag per coordinate
  std::vector<SocConstraint> socs;

  int dim() const { return static_cast<int>(v.size()); }
  double objective(const Eigen::VectorXcd& x) const;
};

struct ConstraintViolation {
  double ball_box = 0.0;  // absolute, on |x| and ||x_S||
  double soc = 0.0;       // relative to the scale of the cone terms
  double equality = 0.0;  // relative |Im{lhs x + offset}|
};

ConstraintViolation constraint_violation(const ConeProblem& problem, const Eigen::VectorXcd& x);

/// Throws std::invalid_argument on inconsistent sizes, non-positive gains or an
/// indefinite Q (eigenvalue below -1e-9 ||Q||).
void check_problem(const ConeProblem& problem);

}  // namespace irsbf

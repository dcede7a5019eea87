#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

namespace couette {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Chebyshev-Gauss-Lobatto collocation on [r_inner, r_outer], nodes ascending.
struct RadialGrid {
  int n_points = 0;
  double r_inner = 0.0;
  double r_outer = 0.0;
  Vec nodes;
  Mat d1;
  Mat d2;
  Vec quad_weights;  // Clenshaw-Curtis, sum_j w_j f(r_j) ~ integral f dr
  Vec bary_weights;  // barycentric interpolation weights

  /// Integral of f over the gap.
  double integrate(const Vec& f) const { return quad_weights.dot(f); }

  /// Polynomial interpolant of nodal values f evaluated at r.
  double interpolate(const Vec& f, double r) const;

  /// Row vector e such that e.dot(f) equals interpolate(f, r).
  Vec interpolation_row(double r) const;
};

RadialGrid build_grid(int n_points, double r_inner, double r_outer);

/// Dense solve of op * x = rhs. With a border row c (length n) the system is
/// extended to [[op, b], [c^T, 0]] [x; lambda] = [rhs; 0]; `border_col` b
/// defaults to c. Throws ErrorKind::Numerical when the (bordered) matrix is
/// singular to working precision; `context` is appended to the message.
struct BorderedSolution {
  Vec x;
  double lambda = 0.0;
};

BorderedSolution solve_bordered(const Mat& op, const Vec& rhs, const std::optional<Vec>& border_row,
                                const std::optional<Vec>& border_col = std::nullopt,
                                const std::string& context = {});

/// Reusable factorization of a bordered system for many right-hand sides.
class BorderedSolver {
 public:
  BorderedSolver() = default;
  BorderedSolver(const Mat& op, const Vec& border_col, const Vec& border_row,
                 const std::string& context = {});

  /// Returns [x; lambda] for right-hand side [rhs; 0].
  BorderedSolution solve(const Vec& rhs) const;
  int size() const { return static_cast<int>(lu_.rows()) - 1; }

 private:
  Eigen::PartialPivLU<Mat> lu_;
};

/// Reciprocal condition estimate of a PartialPivLU factorization from the
/// diagonal of U. Cheap and only used as a singularity guard.
double lu_rcond_estimate(const Eigen::PartialPivLU<Mat>& lu);

}  // namespace couette

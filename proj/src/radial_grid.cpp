#include "couette/radial_grid.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "couette/error.hpp"

namespace couette {

namespace {

constexpr double kSingularRcond = 1e-14;

// Clenshaw-Curtis weights on [-1, 1] for x_j = cos(pi j / N).
Vec clenshaw_curtis(int N) {
  Vec w = Vec::Zero(N + 1);
  const double pi = std::numbers::pi;
  Vec v = Vec::Ones(N - 1);
  if (N % 2 == 0) {
    w(0) = w(N) = 1.0 / (N * N - 1.0);
    for (int k = 1; k < N / 2; ++k) {
      for (int j = 1; j < N; ++j) v(j - 1) -= 2.0 * std::cos(2.0 * k * pi * j / N) / (4.0 * k * k - 1.0);
    }
    for (int j = 1; j < N; ++j) v(j - 1) -= std::cos(N * pi * j / N) / (N * N - 1.0);
  } else {
    w(0) = w(N) = 1.0 / (double(N) * N);
    for (int k = 1; k <= (N - 1) / 2; ++k) {
      for (int j = 1; j < N; ++j) v(j - 1) -= 2.0 * std::cos(2.0 * k * pi * j / N) / (4.0 * k * k - 1.0);
    }
  }
  for (int j = 1; j < N; ++j) w(j) = 2.0 * v(j - 1) / N;
  return w;
}

}  // namespace

RadialGrid build_grid(int n_points, double r_inner, double r_outer) {
  if (n_points < 16) {
    std::ostringstream os;
    os << "radial grid needs at least 16 points, got " << n_points;
    fail(ErrorKind::Config, os.str());
  }
  if (!(r_outer > r_inner)) fail(ErrorKind::Config, "radial grid needs r_outer > r_inner");

  const int N = n_points - 1;
  const double pi = std::numbers::pi;
  const double h = r_outer - r_inner;

  // Reference nodes on [-1,1], ordered so that r ascends.
  Vec x(n_points);
  for (int j = 0; j <= N; ++j) x(j) = -std::cos(pi * j / N);

  Vec c(n_points);
  for (int j = 0; j <= N; ++j) c(j) = ((j == 0 || j == N) ? 2.0 : 1.0) * ((j % 2) ? -1.0 : 1.0);

  Mat D = Mat::Zero(n_points, n_points);
  for (int i = 0; i <= N; ++i) {
    for (int j = 0; j <= N; ++j) {
      if (i != j) D(i, j) = c(i) / c(j) / (x(i) - x(j));
    }
  }
  for (int i = 0; i <= N; ++i) D(i, i) = -D.row(i).sum();

  RadialGrid g;
  g.n_points = n_points;
  g.r_inner = r_inner;
  g.r_outer = r_outer;
  g.nodes = r_inner + (x.array() + 1.0) * 0.5 * h;
  g.d1 = D * (2.0 / h);
  g.d2 = g.d1 * g.d1;
  // Weights are symmetric, so the reversed node order needs no permutation.
  g.quad_weights = clenshaw_curtis(N) * (0.5 * h);
  g.bary_weights.resize(n_points);
  for (int j = 0; j <= N; ++j) {
    g.bary_weights(j) = ((j % 2) ? -1.0 : 1.0) * ((j == 0 || j == N) ? 0.5 : 1.0);
  }
  return g;
}

Vec RadialGrid::interpolation_row(double r) const {
  Vec e = Vec::Zero(n_points);
  for (int j = 0; j < n_points; ++j) {
    if (std::abs(r - nodes(j)) < 1e-14) {
      e(j) = 1.0;
      return e;
    }
  }
  double denom = 0.0;
  for (int j = 0; j < n_points; ++j) {
    e(j) = bary_weights(j) / (r - nodes(j));
    denom += e(j);
  }
  return e / denom;
}

double RadialGrid::interpolate(const Vec& f, double r) const { return interpolation_row(r).dot(f); }

double lu_rcond_estimate(const Eigen::PartialPivLU<Mat>& lu) {
  const auto diag = lu.matrixLU().diagonal().cwiseAbs();
  const double mx = diag.maxCoeff();
  if (!(mx > 0.0)) return 0.0;
  return diag.minCoeff() / mx;
}

BorderedSolver::BorderedSolver(const Mat& op, const Vec& border_col, const Vec& border_row,
                               const std::string& context) {
  const Eigen::Index n = op.rows();
  Mat A = Mat::Zero(n + 1, n + 1);
  A.topLeftCorner(n, n) = op;
  A.topRightCorner(n, 1) = border_col;
  A.bottomLeftCorner(1, n) = border_row.transpose();
  lu_.compute(A);
  if (!(lu_rcond_estimate(lu_) > kSingularRcond)) {
    fail(ErrorKind::Numerical, "bordered system is singular to working precision" +
                                   (context.empty() ? std::string() : " (" + context + ")"));
  }
}

BorderedSolution BorderedSolver::solve(const Vec& rhs) const {
  const Eigen::Index n = lu_.rows() - 1;
  Vec b = Vec::Zero(n + 1);
  b.head(n) = rhs;
  Vec s = lu_.solve(b);
  return {s.head(n), s(n)};
}

BorderedSolution solve_bordered(const Mat& op, const Vec& rhs, const std::optional<Vec>& border_row,
                                const std::optional<Vec>& border_col, const std::string& context) {
  if (op.rows() != op.cols() || op.rows() != rhs.size()) {
    fail(ErrorKind::Domain, "solve_bordered: operator and forcing sizes disagree");
  }
  if (border_row) {
    const Vec& col = border_col ? *border_col : *border_row;
    return BorderedSolver(op, col, *border_row, context).solve(rhs);
  }
  Eigen::PartialPivLU<Mat> lu(op);
  if (!(lu_rcond_estimate(lu) > kSingularRcond)) {
    fail(ErrorKind::Numerical, "linear system is singular to working precision" +
                                   (context.empty() ? std::string() : " (" + context + ")"));
  }
  return {lu.solve(rhs), 0.0};
}

}  // namespace couette

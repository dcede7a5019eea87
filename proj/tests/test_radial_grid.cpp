#include <doctest.h>

#include <cmath>

#include "couette/error.hpp"
#include "couette/radial_grid.hpp"

using namespace couette;

TEST_CASE("collocation derivatives are exact on polynomials") {
  const RadialGrid g = build_grid(24, 1.0, 2.0);
  const Vec r = g.nodes;
  Vec p(24), dp(24), ddp(24);
  for (int j = 0; j < 24; ++j) {
    const double x = r(j);
    p(j) = std::pow(x, 7) - 3 * x * x + 1;
    dp(j) = 7 * std::pow(x, 6) - 6 * x;
    ddp(j) = 42 * std::pow(x, 5) - 6;
  }
  CHECK((g.d1 * p - dp).lpNorm<Eigen::Infinity>() < 1e-9);
  CHECK((g.d2 * p - ddp).lpNorm<Eigen::Infinity>() < 1e-7);
  for (int j = 1; j < 24; ++j) CHECK(r(j) > r(j - 1));
  CHECK(r(0) == doctest::Approx(1.0));
  CHECK(r(23) == doctest::Approx(2.0));
}

TEST_CASE("quadrature and interpolation") {
  const RadialGrid g = build_grid(20, 1.0, 2.0);
  Vec f(20);
  for (int j = 0; j < 20; ++j) f(j) = std::exp(g.nodes(j));
  CHECK(g.integrate(f) == doctest::Approx(std::exp(2.0) - std::exp(1.0)).epsilon(1e-13));
  CHECK(g.interpolate(f, 1.37) == doctest::Approx(std::exp(1.37)).epsilon(1e-12));
  CHECK(g.interpolation_row(1.37).dot(f) == doctest::Approx(g.interpolate(f, 1.37)).epsilon(1e-14));
  CHECK(g.interpolate(f, g.nodes(5)) == doctest::Approx(f(5)).epsilon(1e-14));
  CHECK_THROWS_AS(build_grid(8, 1.0, 2.0), Error);
}

TEST_CASE("bordered solve recovers a manufactured solution") {
  const int n = 12;
  Mat A = Mat::Random(n, n) + 5.0 * Mat::Identity(n, n);
  const Vec x = Vec::LinSpaced(n, -1.0, 2.0);
  const BorderedSolution s = solve_bordered(A, A * x, std::nullopt);
  CHECK((s.x - x).norm() < 1e-12);
}

TEST_CASE("bordered solve handles a rank-deficient operator") {
  const int n = 10;
  // A has a one-dimensional null space spanned by q; left null vector p.
  Mat B = Mat::Random(n, n) + 4.0 * Mat::Identity(n, n);
  Vec q = Vec::Ones(n);
  Vec p = Vec::LinSpaced(n, 1.0, 2.0);
  const Mat A = B - (B * q) * p.transpose() / p.dot(q);
  REQUIRE((A * q).norm() < 1e-10);
  CHECK_THROWS_AS(solve_bordered(A, Vec::Ones(n), std::nullopt), Error);

  // Solvable right-hand side plus a null-space pin gives the unique solution with c.x = 0.
  const Vec x0 = Vec::LinSpaced(n, 0.0, 1.0);
  const Vec c = Vec::Unit(n, 3);
  const Vec xs = x0 - q * c.dot(x0) / c.dot(q);
  const Vec rhs = A * x0;
  const BorderedSolution s = solve_bordered(A, rhs, c, B * q);
  CHECK(std::abs(s.lambda) < 1e-10);
  CHECK((s.x - xs).norm() < 1e-10);

  // Reused factorization agrees with the one-shot solve.
  const BorderedSolver solver(A, B * q, c);
  const BorderedSolution s2 = solver.solve(rhs);
  CHECK((s2.x - s.x).norm() < 1e-12);
  CHECK(solver.size() == n);
}

TEST_CASE("singular bordered system is reported as numerical") {
  const Mat Z = Mat::Zero(4, 4);
  try {
    solve_bordered(Z, Vec::Ones(4), Vec::Ones(4));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Numerical);
  }
}

#include "couette/reduced_models.hpp"

#include <cmath>
#include <sstream>

#include "couette/error.hpp"

namespace couette {

namespace {

int interior_index(const KernelTables& t, double k) {
  const int i = t.index(k);
  if (i == 0 || i == t.size() - 1) {
    std::ostringstream os;
    os << "wavenumber " << k << " lies on the edge of the table range";
    fail(ErrorKind::Domain, os.str());
  }
  return i;
}

void check_step(double t_end, double dt) {
  if (!(dt > 0.0) || !(t_end >= 0.0)) fail(ErrorKind::Config, "ODE integration needs dt > 0 and t_end >= 0");
}

long step_count(double t_end, double dt) { return std::lround(t_end / dt); }

}  // namespace

double LandauModel::equilibrium_amplitude() const {
  if (a > 0.0 && a1 < 0.0) return std::sqrt(-a / a1);
  return 0.0;
}

double landau_constant(double k0, const KernelTables& t) {
  if (std::abs(k0) < 1e-12) fail(ErrorKind::Domain, "Landau constant needs k0 != 0");
  const int i = interior_index(t, k0);
  const int j = interior_index(t, -k0);
  return t.c(i, j, i) + t.c(j, i, i) + t.c(i, i, i);
}

LandauModel landau_model(double k0, const KernelTables& t) {
  return {k0, t.a[t.index(k0)], landau_constant(k0, t)};
}

std::vector<ScalarSample> landau_evolution(const LandauModel& m, double A_init, double t_end, double dt,
                                           OdeMethod method, double picard_tol) {
  check_step(t_end, dt);
  const long n = step_count(t_end, dt);
  std::vector<ScalarSample> out;
  out.reserve(n + 1);
  double A = A_init;
  out.push_back({0.0, A});
  auto f = [&](double x) { return m.a * x + m.a1 * x * x * x; };
  for (long s = 1; s <= n; ++s) {
    if (method == OdeMethod::RK4) {
      const double k1 = f(A);
      const double k2 = f(A + 0.5 * dt * k1);
      const double k3 = f(A + 0.5 * dt * k2);
      const double k4 = f(A + dt * k3);
      A += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    } else {
      double next = A;
      for (int it = 0; it < 200; ++it) {
        const double upd = (A + dt * m.a1 * next * next * next) / (1.0 - dt * m.a);
        const double change = std::abs(upd - next);
        next = upd;
        if (change < picard_tol) break;
      }
      A = next;
    }
    out.push_back({s * dt, A});
  }
  return out;
}

GinzburgLandauCoefficients gl_coefficients(const KernelTables& t, double k_c) {
  const int i = static_cast<int>(std::lround(k_c / t.dk)) + t.nk;
  if (i <= t.nk || i + 1 >= t.size()) {
    std::ostringstream os;
    os << "critical wavenumber " << k_c << " is too close to the grid edge";
    fail(ErrorKind::Domain, os.str());
  }
  GinzburgLandauCoefficients g;
  g.k_c = t.k(i);
  g.a_kc = t.a[i];
  g.a1 = landau_constant(g.k_c, t);
  g.a2 = -0.5 * (t.a[i + 1] - 2.0 * t.a[i] + t.a[i - 1]) / (t.dk * t.dk);
  return g;
}

MeanFlowCoupledModel MeanFlowCoupledModel::decoupled() const {
  MeanFlowCoupledModel m = *this;
  m.a31 = m.a42 = m.b32 = m.b41 = 0.0;
  return m;
}

MeanFlowCoupledModel meanflow_coupled_coefficients(double k0, const KernelTables& t) {
  if (std::abs(k0) < 1e-12) fail(ErrorKind::Domain, "mean-flow coupled model needs k0 != 0");
  const int p = interior_index(t, k0);
  const int m = interior_index(t, -k0);
  const int z = t.nk;
  MeanFlowCoupledModel r;
  r.k0 = k0;
  r.a_k0 = t.a[p];
  r.a_0 = t.a[z];
  // b(k1, k - k1) is stored against (k1, k); c(k1, k2, k3) against (k1, k2, k1+k2+k3).
  r.a31 = t.b(z, p) + t.b(p, p);
  r.a41 = landau_constant(k0, t);
  r.a42 = t.c(p, z, p) + t.c(z, p, p) + t.c(z, z, p);
  r.b31 = t.b(z, z);
  r.b32 = t.b(p, z) + t.b(m, z);
  r.b41 = t.c(p, m, z) + t.c(m, p, z) + t.c(p, z, z) + t.c(m, z, z) + t.c(z, p, z) + t.c(z, m, z);
  r.b42 = t.c(z, z, z);
  return r;
}

std::vector<PairSample> meanflow_coupled_evolution(const MeanFlowCoupledModel& m, double x_init, double y_init,
                                                   double t_end, double dt, OdeMethod method, double picard_tol) {
  check_step(t_end, dt);
  const long n = step_count(t_end, dt);
  std::vector<PairSample> out;
  out.reserve(n + 1);
  double x = x_init, y = y_init;
  out.push_back({0.0, x, y});
  // Nonlinear parts only; the linear rates are handled separately for the implicit scheme.
  auto nx = [&](double X, double Y) { return m.a31 * Y * X + (m.a41 * X * X + m.a42 * Y * Y) * X; };
  auto ny = [&](double X, double Y) { return m.b31 * Y * Y + m.b32 * X * X + (m.b41 * X * X + m.b42 * Y * Y) * Y; };
  for (long s = 1; s <= n; ++s) {
    if (method == OdeMethod::RK4) {
      auto fx = [&](double X, double Y) { return m.a_k0 * X + nx(X, Y); };
      auto fy = [&](double X, double Y) { return m.a_0 * Y + ny(X, Y); };
      const double kx1 = fx(x, y), ky1 = fy(x, y);
      const double kx2 = fx(x + 0.5 * dt * kx1, y + 0.5 * dt * ky1), ky2 = fy(x + 0.5 * dt * kx1, y + 0.5 * dt * ky1);
      const double kx3 = fx(x + 0.5 * dt * kx2, y + 0.5 * dt * ky2), ky3 = fy(x + 0.5 * dt * kx2, y + 0.5 * dt * ky2);
      const double kx4 = fx(x + dt * kx3, y + dt * ky3), ky4 = fy(x + dt * kx3, y + dt * ky3);
      x += dt / 6.0 * (kx1 + 2.0 * kx2 + 2.0 * kx3 + kx4);
      y += dt / 6.0 * (ky1 + 2.0 * ky2 + 2.0 * ky3 + ky4);
    } else {
      double X = x, Y = y;
      for (int it = 0; it < 200; ++it) {
        const double ux = (x + dt * nx(X, Y)) / (1.0 - dt * m.a_k0);
        const double uy = (y + dt * ny(X, Y)) / (1.0 - dt * m.a_0);
        const double change = std::max(std::abs(ux - X), std::abs(uy - Y));
        X = ux;
        Y = uy;
        if (change < picard_tol) break;
      }
      x = X;
      y = Y;
    }
    out.push_back({s * dt, x, y});
  }
  return out;
}

}  // namespace couette

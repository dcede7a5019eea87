#pragma once

#include <vector>

#include "couette/interaction_kernels.hpp"

namespace couette {

/// dA/dt = a A + a1 |A|^2 A for the physical amplitude of one wave pair.
struct LandauModel {
  double k0 = 0.0;
  double a = 0.0;
  double a1 = 0.0;

  /// sqrt(-a/a1) when a > 0 and a1 < 0, otherwise 0.
  double equilibrium_amplitude() const;
};

/// a1 = c(k0,-k0,k0) + c(-k0,k0,k0) + c(k0,k0,-k0).
double landau_constant(double k0, const KernelTables& t);
LandauModel landau_model(double k0, const KernelTables& t);

enum class OdeMethod {
  RK4,            // classical Runge-Kutta with the given step
  ImplicitEuler,  // the spectrum engine's scheme (Picard, linear part implicit)
};

struct ScalarSample {
  double t;
  double value;
};

/// Trajectory at every step from t = 0 to t_end.
std::vector<ScalarSample> landau_evolution(const LandauModel& m, double A_init, double t_end, double dt,
                                           OdeMethod method = OdeMethod::RK4, double picard_tol = 1e-13);

struct GinzburgLandauCoefficients {
  double k_c = 0.0;   // grid wavenumber used
  double a_kc = 0.0;  // a(k_c)
  double a1 = 0.0;    // Landau constant at k_c
  double a2 = 0.0;    // -1/2 a''(k_c), centred differences with step dk
};

/// Coefficients at the grid point nearest to k_c.
GinzburgLandauCoefficients gl_coefficients(const KernelTables& t, double k_c);

/// Two-mode system for X = Abar(k0) and Y = Abar(0):
///   dX/dt = a_k0 X + a31 Y X + (a41 X^2 + a42 Y^2) X
///   dY/dt = a_0 Y + b31 Y^2 + b32 X^2 + (b41 X^2 + b42 Y^2) Y
struct MeanFlowCoupledModel {
  double k0 = 0.0;
  double a_k0 = 0.0, a_0 = 0.0;
  double a31 = 0.0, a41 = 0.0, a42 = 0.0;
  double b31 = 0.0, b32 = 0.0, b41 = 0.0, b42 = 0.0;

  /// Model with the mean-flow coupling (a31, a42, b32, b41) removed.
  MeanFlowCoupledModel decoupled() const;
};

MeanFlowCoupledModel meanflow_coupled_coefficients(double k0, const KernelTables& t);

struct PairSample {
  double t;
  double x;  // Abar(k0)
  double y;  // Abar(0)
};

std::vector<PairSample> meanflow_coupled_evolution(const MeanFlowCoupledModel& m, double x_init, double y_init,
                                                   double t_end, double dt, OdeMethod method = OdeMethod::RK4,
                                                   double picard_tol = 1e-13);

}  // namespace couette

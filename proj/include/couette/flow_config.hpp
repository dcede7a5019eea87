#pragma once

namespace couette {

/// Geometry and laminar base state of the annulus.
///
/// Lengths are scaled by the gap width d, velocities by the inner-wall speed
/// r1*Omega1 and time by d^2/nu, so r_outer - r_inner == 1 and the base flow
/// V(r) = a0*r + b0/r satisfies V(r_inner) = 1, V(r_outer) = mu*r_outer/r_inner.
struct FlowConfig {
  double eta = 0.5;        // radius ratio r1/r2
  double mu = 0.0;         // angular-speed ratio Omega2/Omega1
  double reynolds = 88.1;  // Omega1 r1 d / nu

  double r_inner = 1.0;
  double r_outer = 2.0;
  double a0 = 0.0;
  double b0 = 0.0;

  /// Validates (0 < eta < 1, finite mu, reynolds >= 0) and derives radii and
  /// base-flow constants from the two wall conditions.
  static FlowConfig make(double eta, double mu, double reynolds);

  FlowConfig with_reynolds(double reynolds) const { return make(eta, mu, reynolds); }

  /// Prescribed azimuthal velocity at the outer wall, mu*(1 + d/r1).
  double outer_wall_speed() const;
};

/// V(r). Throws a Domain error outside [r_inner, r_outer] (with a 1e-12 slack).
double base_flow_profile(const FlowConfig& cfg, double r);

/// dV/dr.
double base_flow_derivative(const FlowConfig& cfg, double r);

/// T = (64/9) R^2. Only defined for eta = 0.5; other geometries are rejected.
double taylor_number(const FlowConfig& cfg);

/// 1/2 * integral of r V(r)^2 over the gap (per unit axial length and radian).
double couette_base_kinetic_energy(const FlowConfig& cfg);

/// Same integral for an arbitrary profile a*r + b/r on [r_inner, r_outer].
double couette_kinetic_energy(double a, double b, double r_inner, double r_outer);

}  // namespace couette

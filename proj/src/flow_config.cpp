#include "couette/flow_config.hpp"

#include <cmath>
#include <sstream>

#include "couette/error.hpp"

namespace couette {

FlowConfig FlowConfig::make(double eta, double mu, double reynolds) {
  if (!(eta > 0.0 && eta < 1.0)) {
    std::ostringstream os;
    os << "radius ratio eta must lie in (0,1), got " << eta;
    fail(ErrorKind::Config, os.str());
  }
  if (!std::isfinite(mu)) fail(ErrorKind::Config, "angular-speed ratio mu must be finite");
  if (!(reynolds >= 0.0) || !std::isfinite(reynolds)) {
    fail(ErrorKind::Config, "Reynolds number must be finite and non-negative");
  }
  FlowConfig cfg;
  cfg.eta = eta;
  cfg.mu = mu;
  cfg.reynolds = reynolds;
  cfg.r_inner = eta / (1.0 - eta);
  cfg.r_outer = cfg.r_inner + 1.0;
  // Closed-form solution of a0*r + b0/r = 1 at r_inner and mu*r_outer/r_inner at r_outer.
  cfg.a0 = (mu - eta * eta) / (eta * (1.0 + eta));
  cfg.b0 = eta * (1.0 - mu) / ((1.0 + eta) * (1.0 - eta) * (1.0 - eta));
  return cfg;
}

double FlowConfig::outer_wall_speed() const { return mu * (1.0 + (1.0 - eta) / eta); }

double base_flow_profile(const FlowConfig& cfg, double r) {
  constexpr double slack = 1e-12;
  if (r < cfg.r_inner - slack || r > cfg.r_outer + slack) {
    std::ostringstream os;
    os << "radius " << r << " outside annulus [" << cfg.r_inner << ", " << cfg.r_outer << "]";
    fail(ErrorKind::Domain, os.str());
  }
  return cfg.a0 * r + cfg.b0 / r;
}

double base_flow_derivative(const FlowConfig& cfg, double r) {
  (void)base_flow_profile(cfg, r);
  return cfg.a0 - cfg.b0 / (r * r);
}

double taylor_number(const FlowConfig& cfg) {
  if (std::abs(cfg.eta - 0.5) > 1e-12) {
    std::ostringstream os;
    os << "Taylor-number relation T = 64/9 R^2 holds only for eta = 0.5 (got eta = " << cfg.eta
       << ")";
    fail(ErrorKind::Domain, os.str());
  }
  return 64.0 / 9.0 * cfg.reynolds * cfg.reynolds;
}

double couette_kinetic_energy(double a, double b, double r_inner, double r_outer) {
  const double r4 = std::pow(r_outer, 4) - std::pow(r_inner, 4);
  const double r2 = r_outer * r_outer - r_inner * r_inner;
  return 0.5 * (a * a * r4 / 4.0 + a * b * r2 + b * b * std::log(r_outer / r_inner));
}

double couette_base_kinetic_energy(const FlowConfig& cfg) {
  return couette_kinetic_energy(cfg.a0, cfg.b0, cfg.r_inner, cfg.r_outer);
}

}  // namespace couette

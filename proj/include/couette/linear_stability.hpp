#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "couette/flow_config.hpp"
#include "couette/radial_grid.hpp"

namespace couette {

/// Block layout of the discrete state: [u | v | w_hat | P], each of length n.
/// The axial velocity is w = i*w_hat with w_hat real.
enum Block { kU = 0, kV = 1, kW = 2, kP = 3 };

/// Discrete pencil sigma*M*x = J*x at one axial wavenumber. Momentum rows at
/// the wall nodes carry Dirichlet conditions (M = 0 there). At k = 0 only the
/// azimuthal block is dynamic; the other blocks are identity rows.
struct Pencil {
  Mat J;
  Mat M;
};

Pencil assemble_pencil(const FlowConfig& cfg, const RadialGrid& grid, double k);

struct EigenMode {
  double k = 0.0;
  double sigma = 0.0;
  Vec state;  // 4n stacked [u, v, w_hat, P]
  Vec u() const { return block(kU); }
  Vec v() const { return block(kV); }
  Vec w() const { return block(kW); }  // imaginary part of the axial profile
  Vec p() const { return block(kP); }
  Vec block(Block b) const { return state.segment(b * n(), n()); }
  int n() const { return static_cast<int>(state.size() / 4); }
};

struct AdjointMode {
  double k = 0.0;
  double sigma = 0.0;
  /// Discrete left vector with y^T (J - sigma M) = 0 and y^T M x = 1.
  Vec left;
  /// Continuous adjoint profiles: left / quadrature weight on interior velocity
  /// nodes, zero at the walls, so integral(u+ u + v+ v + w+ w_hat) dr = 1.
  Vec profiles;
  Vec block(Block b) const { return profiles.segment(b * n(), n()); }
  int n() const { return static_cast<int>(left.size() / 4); }
};

/// All finite eigenvalues of the pencil, sorted by decreasing real part.
std::vector<std::complex<double>> eigen_spectrum(const FlowConfig& cfg, const RadialGrid& grid,
                                                 double k);

/// Eigenvector for a known (real) eigenvalue, refined by Newton iteration on
/// (x, sigma), normalized and phase-fixed. `sigma` is updated in place.
EigenMode mode_for_eigenvalue(const FlowConfig& cfg, const RadialGrid& grid, double k,
                              double sigma);

/// Least-stable eigenmode. Throws a Regime error if its eigenvalue is complex.
EigenMode leading_mode(const FlowConfig& cfg, double k, const RadialGrid& grid);

/// Biorthonormal adjoint of `direct`.
AdjointMode adjoint_mode(const FlowConfig& cfg, double k, const RadialGrid& grid,
                         const EigenMode& direct);

/// Mode at -k from the mode at k (w_hat negated).
EigenMode mirror(const EigenMode& m);
AdjointMode mirror(const AdjointMode& m);

/// integral r (u^2 + v^2 + w_hat^2) dr.
double energy_norm(const RadialGrid& grid, const Vec& state);

/// integral r (a_u b_u + a_v b_v + a_w b_w) dr.
double energy_inner(const RadialGrid& grid, const Vec& a, const Vec& b);

/// integral (adj . direct) dr over velocity components.
double biorthogonal_product(const RadialGrid& grid, const AdjointMode& adj, const Vec& direct);

/// Residual diagnostics of a direct mode.
struct ModeResiduals {
  double eigen = 0.0;       // max |(J - sigma M) x| over interior momentum rows
  double continuity = 0.0;  // max |Du + u/r - k w_hat|
  double boundary = 0.0;    // max |velocity| at the walls
};
ModeResiduals mode_residuals(const FlowConfig& cfg, const RadialGrid& grid, const EigenMode& m);

struct GrowthSample {
  double k;
  double sigma;
};

/// sigma_1(k) on the given wavenumbers. Branch continuity is checked by
/// marching outward from the most unstable sample and requiring the rightmost
/// eigenmode to be the one with the largest overlap with its neighbour.
std::vector<GrowthSample> growth_curve(const FlowConfig& cfg, const std::vector<double>& k_grid,
                                       const RadialGrid& grid, int threads = 1);

/// Leading modes at ascending non-negative wavenumbers with the same branch
/// check as growth_curve.
std::vector<EigenMode> tracked_leading_modes(const FlowConfig& cfg, const std::vector<double>& ks,
                                             const RadialGrid& grid, int threads = 1);

/// Leading eigenvalue only; cheaper than leading_mode.
double leading_eigenvalue(const FlowConfig& cfg, const RadialGrid& grid, double k);

struct CriticalPoint {
  double reynolds;
  double k;
};

/// Minimum of the neutral curve sigma_1(k; R) = 0 over k in [k_lo, k_hi].
CriticalPoint critical_point(double eta, double mu, const RadialGrid& grid, double k_lo = 1.0,
                             double k_hi = 8.0, double r_lo = 10.0, double r_hi = 400.0);

/// Endpoints of the unstable band at cfg.reynolds, searched on [k_lo, k_hi].
std::pair<double, double> neutral_band(const FlowConfig& cfg, const RadialGrid& grid,
                                       double k_lo = 0.05, double k_hi = 12.0);

/// Maximum of sigma_1(k) over [k_lo, k_hi].
GrowthSample max_growth(const FlowConfig& cfg, const RadialGrid& grid, double k_lo = 0.5,
                        double k_hi = 8.0);

}  // namespace couette

#pragma once

#include <filesystem>
#include <vector>

#include "couette/spectrum_evolution.hpp"

namespace couette {

/// r_inner^2 / (2 B0); equals eta (1 + eta) / 2 when mu = 0.
double torque_prefactor(const FlowConfig& cfg);

struct TorqueReport {
  double k_f = 0.0;
  double ratio = 1.0;           // G_T / G_C with the k = 0 and (k_f, -k_f) terms
  double mean_flow_term = 0.0;  // Abar(0) d v1(0)/dr at r_inner
  double pair_term = 0.0;       // |Abar(k_f)|^2 [d v2(k_f,-k_f)/dr + c.c.] at r_inner
  /// sum over every (k, -k) pair instead of k_f alone; equals the z-averaged
  /// wall shear of the reconstructed field
  double spectrum_term = 0.0;
  double ratio_all_pairs = 1.0;
};

TorqueReport torque_ratio(const EquilibriumReport& eq, const KernelTables& t, const FlowConfig& cfg);
TorqueReport torque_ratio(const SpectrumState& s, double k_f, const KernelTables& t, const FlowConfig& cfg);

/// 1/2 z-averaged integral r |first-order velocity of the (k_f, -k_f) pair|^2 dr = |Abar(k_f)|^2.
double perturbation_kinetic_energy(const EquilibriumReport& eq);
/// Same over every mode of the state.
double total_first_order_energy(const SpectrumState& s, const KernelTables& t);

struct VelocityField {
  std::vector<double> r, z;
  // row-major [ir * nz + iz]
  std::vector<double> u, v, w, dvdr;
  double imag_residue = 0.0;  // largest imaginary part discarded
};

/// Base flow plus first- and second-order terms of the expansion on an r-z
/// mesh. Second-order pairs are limited to amplitudes with |A| dk > pair_floor.
VelocityField reconstruct_velocity(const SpectrumState& s, const KernelTables& t, const ModeBank& bank,
                                   const std::vector<double>& r, const std::vector<double>& z,
                                   double pair_floor = 0.0);

/// Torque ratio from the z-average of the reconstructed inner-wall shear over
/// one period 2 pi / dk, sampled at nz points.
double torque_from_reconstruction(const SpectrumState& s, const KernelTables& t, const ModeBank& bank,
                                  int nz, double pair_floor = 0.0);

struct TorqueCurvePoint {
  double reynolds = 0.0;
  double k_f = 0.0;
  double ratio = 1.0;
  double envelope_min = 1.0;
  double envelope_max = 1.0;
  EquilibriumReport report;
  TableBuildInfo tables;
  std::string tables_hash;
};

struct TorqueSweepSpec {
  std::vector<double> reynolds;
  double eta = 0.5, mu = 0.0;
  int n_points = 48;
  KernelOptions kernel;
  EvolutionParams evolution;
  double seed_k = 3.25;      // wavenumber seeded for the main branch
  double seed_density = 0.1;
  /// Seeds for the envelope; each is evolved without background and kept when
  /// it remains the dominant wave.
  std::vector<double> envelope_seeds;
  std::filesystem::path cache_dir;
  bool force_rebuild = false;
};

std::vector<TorqueCurvePoint> torque_vs_reynolds(const TorqueSweepSpec& spec);

}  // namespace couette

#pragma once

#include <complex>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "couette/interaction_kernels.hpp"

namespace couette {

using cplx = std::complex<double>;

/// Amplitude density A(k) on the table grid, Hermitian: A(-k) = conj A(k).
struct SpectrumState {
  double t = 0.0;
  long steps = 0;
  std::vector<cplx> A;
};

struct EvolutionParams {
  double dt = 0.01;
  double picard_tol = 1e-10;
  int picard_max = 50;
  double equil_tol = 1e-8;  // on max |dA/dt| * dk
  double t_max = 100.0;
  int sample_every = 10;     // steps between trajectory samples (0: none)
  int snapshot_every = 0;    // steps between snapshots (0: none)
  std::filesystem::path snapshot_file;
  int threads = 1;
  /// Optional per-index mask; masked-out amplitudes are held at zero.
  std::vector<char> mask;

  void validate() const;
};

/// I1(k) = sum_k1 w(k1) b(k1, k-k1) A(k1) A(k-k1) dk, trapezoid end weights.
std::vector<cplx> triad_integral(const SpectrumState& s, const KernelTables& t, int threads = 1);
/// I2(k) = sum_k1,k2 w(k1) w(k2) c(k1, k2, k-k1-k2) A A A dk^2.
std::vector<cplx> quartet_integral(const SpectrumState& s, const KernelTables& t, int threads = 1);

/// Real-arithmetic versions of the two integrals (output overwritten).
void triad_integral_real(const std::vector<double>& A, const KernelTables& t, std::vector<double>& out,
                         int threads = 1);
void quartet_integral_real(const std::vector<double>& A, const KernelTables& t, std::vector<double>& out,
                           int threads = 1);

/// max_k |a A + I1 + I2| * dk.
double rhs_residual(const SpectrumState& s, const KernelTables& t, int threads = 1);

/// One implicit Euler step solved by Picard iteration with the linear term in
/// the denominator. Throws Numerical if Picard does not converge.
SpectrumState step(const SpectrumState& s, const KernelTables& t, const EvolutionParams& p);

/// Largest |A(-k) - conj A(k)|.
double hermitian_drift(const SpectrumState& s);

struct EquilibriumReport {
  double k_f = 0.0;
  double amplitude_kf = 0.0;          // Abar at k_f (signed, real part)
  double mean_flow = 0.0;             // Abar at k = 0 (real part)
  std::vector<double> k;              // k >= 0 grid
  std::vector<double> amplitudes;     // Abar_k = Re A(k) dk for k >= 0
  std::vector<double> abs_amplitudes; // |A(k)| dk
  std::vector<std::pair<double, double>> harmonics;  // (m k_f, Abar), m = 1, 2, ...
  double residual = 0.0;
  std::string reason;  // "converged" or "horizon"
  double t = 0.0;
  long steps = 0;
};

/// Dominant nonzero wavenumber; ties go to the smaller k.
EquilibriumReport make_report(const SpectrumState& s, const KernelTables& t, double residual,
                              const std::string& reason);

struct EvolveResult {
  SpectrumState final_state;
  EquilibriumReport report;
};

using SampleCallback = std::function<void(const SpectrumState&)>;

/// Steps until the residual drops below equil_tol or t reaches t_max. The
/// callback sees the initial state and every sample_every-th state.
EvolveResult evolve(const SpectrumState& initial, const KernelTables& t, const EvolutionParams& p,
                    const SampleCallback& on_sample = {});

/// Zero state, then each seed sets A(k) = density and A(-k) = conj.
SpectrumState seeded_state(const KernelTables& t, const std::vector<std::pair<double, cplx>>& seeds,
                           double background = 0.0);
/// Uniform density on every k != 0 (and k = 0 when include_zero).
SpectrumState uniform_state(const KernelTables& t, double density, bool include_zero = false);

/// Snapshot I/O (JSON). The snapshot records the table content hash.
void save_snapshot(const SpectrumState& s, const KernelTables& t, const EvolutionParams& p,
                   const std::filesystem::path& file);
SpectrumState load_snapshot(const std::filesystem::path& file, const KernelTables& t);

struct SelectionRow {
  double seed_k = 0.0;
  double k_f = 0.0;
  double amplitude = 0.0;
  std::string outcome;  // "stable as seeded", "decayed to harmonic", "decayed to band interior"
  EquilibriumReport report;
};

/// One evolution per seed: density `seed_density` at the seed, `background`
/// on every other nonzero k.
std::vector<SelectionRow> selection_sweep(const KernelTables& t, const std::vector<double>& seeds,
                                          double seed_density, double background, const EvolutionParams& p);

std::string classify_outcome(double seed_k, double k_f, double dk);

}  // namespace couette

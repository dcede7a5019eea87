#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "couette/linear_stability.hpp"

namespace couette {

/// Which null direction is removed from the second-order fields.
enum class Pin {
  Adjoint,  // integral(adjoint . U2) dr = 0
  Energy,   // integral r (mode . U2) dr = 0
};

const char* to_string(Pin pin);
Pin pin_from_string(const std::string& s);

struct KernelOptions {
  double k_max = 12.0;   // tables cover [-k_max, k_max]
  double dk = 0.25;
  Pin pin = Pin::Adjoint;
  bool include_b1 = true;
  bool flip_phase = false;  // negate every k != 0 mode (gauge test)
  int threads = 1;
};

/// Three radial profiles of an axisymmetric vector field; the axial entry is
/// the imaginary part of the axial component.
struct ForcingProfile {
  double k1 = 0.0;
  double k2 = 0.0;
  Vec radial;
  Vec azimuthal;
  Vec axial;
};

/// Quadratic advective forcing -R (U1.grad)U2 for the pair, symmetrized over
/// argument order: F = 1/2 [N(a, b) + N(b, a)].
ForcingProfile quadratic_forcing(const FlowConfig& cfg, const RadialGrid& grid, const EigenMode& a,
                                 const EigenMode& b);

/// Unsymmetrized -R (X.grad)Y for velocity states X at wavenumber ka and Y at
/// kb, each stacked [u, v, w_hat] (length >= 3n). The result is stacked the same way.
Vec advective_term(const FlowConfig& cfg, const RadialGrid& grid, const Vec& X, const Vec& Y, double kb);

/// Leading modes and adjoints on the wavenumber lattice j*dk, |j| <= j_max,
/// together with the factorized bordered operators used by the second-order
/// problems.
class ModeBank {
 public:
  ModeBank(const FlowConfig& cfg, const RadialGrid& grid, double dk, int j_max, Pin pin = Pin::Adjoint,
           bool flip_phase = false, int threads = 1);

  const FlowConfig& config() const { return cfg_; }
  const RadialGrid& grid() const { return grid_; }
  double dk() const { return dk_; }
  int j_max() const { return j_max_; }
  Pin pin() const { return pin_; }

  const EigenMode& mode(int j) const;
  const AdjointMode& adjoint(int j) const;
  double sigma(int j) const { return mode(j).sigma; }
  /// Interior-velocity adjoint rows (walls and pressure zeroed) for projections.
  const Vec& projector(int j) const;

  /// Second-order field for the pair (j1, j2); `b0` receives the solvability
  /// coefficient. Pins and k=0 handling follow the bank's options.
  Vec second_order(int j1, int j2, double* b0 = nullptr) const;

 private:
  FlowConfig cfg_;
  RadialGrid grid_;
  double dk_;
  int j_max_;
  Pin pin_;
  std::vector<EigenMode> modes_;       // index j + j_max
  std::vector<AdjointMode> adjoints_;  // index j + j_max
  std::vector<Vec> projectors_;
  std::vector<BorderedSolver> solvers_;
};

/// Solvability coefficient of the triad (k1, k2) -> k1+k2.
double triad_kernel_b0(const ModeBank& bank, int j1, int j2);

struct SecondOrderField {
  int j1 = 0;
  int j2 = 0;
  double k = 0.0;
  double b0 = 0.0;
  Vec state;  // 4n stacked [u, v, w_hat, P]
};

SecondOrderField second_order_field(const ModeBank& bank, int j1, int j2);

/// Growth-rate mismatch term [a(k) - a(k1) - a(k2)] * integral(adjoint . U2).
double triad_kernel_b1(const ModeBank& bank, int j1, int j2);

/// Quartet coefficient symmetrized over the three arguments; direct evaluation
/// without tables (used to cross-check the tabulated build).
double cubic_kernel_c(const ModeBank& bank, int j1, int j2, int j3);

/// Dense kernel tables on k_i = (i - nk) dk, i in [0, N).
struct KernelTables {
  static constexpr int kFormatVersion = 3;

  // provenance
  double eta = 0.5, mu = 0.0, reynolds = 88.1;
  int n_points = 48;
  double k_max = 12.0, dk = 0.25;
  Pin pin = Pin::Adjoint;
  bool include_b1 = true;
  bool flip_phase = false;

  int nk = 0;  // N = 2 nk + 1
  std::vector<double> a;        // N
  std::vector<double> b_store;  // [i * N + i1] = b(k_i1, k_i - k_i1)
  std::vector<double> c_store;  // [(i * N + i1) * N + i2] = c(k_i1, k_i2, k_i - k_i1 - k_i2)
  std::vector<double> dv2_wall; // N, d v2(k, -k)/dr at r_inner
  double dv1_wall0 = 0.0;       // d v1(0)/dr at r_inner
  double epsilon = 0.0;         // max_k a(k)
  double sigma_w_branch0 = 0.0; // least-stable axial-diffusion eigenvalue at k = 0

  int size() const { return 2 * nk + 1; }
  double k(int i) const { return (i - nk) * dk; }
  /// Grid index of wavenumber k; throws Domain if off-grid or out of range.
  int index(double k) const;
  bool in_range(int i) const { return i >= 0 && i < size(); }

  double b(int i1, int i) const { return b_store[std::size_t(i) * size() + i1]; }
  double c(int i1, int i2, int i) const {
    const std::size_t N = size();
    return c_store[(std::size_t(i) * N + i1) * N + i2];
  }

  /// Hash of the provenance fields (hex). Equal hashes mean interchangeable tables.
  std::string config_hash() const;
  /// Hash of the table contents.
  std::string content_hash() const;
};

struct TableBuildInfo {
  bool cache_hit = false;
  double seconds = 0.0;
  std::filesystem::path file;
};

KernelTables assemble_tables(const FlowConfig& cfg, const RadialGrid& grid, const KernelOptions& opts);

/// Same as assemble_tables but with the dense quartet assembled from an
/// explicit bank; exposed so callers can reuse the bank.
KernelTables assemble_tables(const ModeBank& bank, const KernelOptions& opts);

/// Lattice bank wide enough for the tables (|j| <= 2 k_max / dk).
ModeBank make_table_bank(const FlowConfig& cfg, const RadialGrid& grid, const KernelOptions& opts);

std::string table_config_hash(const FlowConfig& cfg, int n_points, const KernelOptions& opts);

void save_tables(const KernelTables& t, const std::filesystem::path& file);
KernelTables load_tables(const std::filesystem::path& file);

/// Loads from `dir` when a file with a matching config hash exists, otherwise
/// builds and writes it (atomic rename).
KernelTables cached_tables(const FlowConfig& cfg, int n_points, const KernelOptions& opts,
                           const std::filesystem::path& dir, bool force_rebuild,
                           TableBuildInfo* info = nullptr);

std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t seed = 1469598103934665603ULL);
std::string hex64(std::uint64_t h);

}  // namespace couette

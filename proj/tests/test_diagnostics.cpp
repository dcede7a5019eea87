#include <doctest.h>

#include <cmath>
#include <numbers>

#include "couette/error.hpp"
#include "oracles.hpp"

using namespace couette;

namespace {

const ModeBank& short_bank() {
  static const ModeBank b = [] {
    KernelOptions o;
    o.k_max = 3.0;
    const FlowConfig& c = oracle::flow88();
    return make_table_bank(c, build_grid(32, c.r_inner, c.r_outer), o);
  }();
  return b;
}

}  // namespace

TEST_CASE("torque prefactor") {
  CHECK(torque_prefactor(oracle::flow88()) == doctest::Approx(0.5 * 1.5 / 2.0));
  const FlowConfig c = FlowConfig::make(0.5, 0.0, 88.1);
  CHECK(torque_prefactor(c) == doctest::Approx(c.r_inner * c.r_inner / (2 * c.b0)));
}

TEST_CASE("zero disturbance gives the Couette torque exactly") {
  const KernelTables& t = oracle::tables88();
  const SpectrumState s = seeded_state(t, {});
  const TorqueReport r = torque_ratio(s, 3.0, t, oracle::flow88());
  CHECK(r.ratio == 1.0);
  CHECK(r.ratio_all_pairs == 1.0);
  EquilibriumReport e = make_report(s, t, 0.0, "converged");
  CHECK(perturbation_kinetic_energy(e) == 0.0);
}

TEST_CASE("torque ratio formula terms") {
  const KernelTables& t = oracle::tables88();
  const EvolveResult r = evolve(seeded_state(t, {{3.0, cplx(0.125)}}), t, EvolutionParams{});
  const TorqueReport q = torque_ratio(r.report, t, oracle::flow88());
  const double A0 = r.report.mean_flow, Ak = r.report.amplitude_kf;
  const int i = t.index(3.0), m = t.index(-3.0);
  CHECK(q.mean_flow_term == doctest::Approx(A0 * t.dv1_wall0));
  CHECK(q.pair_term == doctest::Approx(Ak * Ak * (t.dv2_wall[i] + t.dv2_wall[m])));
  CHECK(q.ratio == doctest::Approx(1.0 - torque_prefactor(oracle::flow88()) * (q.mean_flow_term + q.pair_term)));
  CHECK(q.ratio > 1.0);
  CHECK(perturbation_kinetic_energy(r.report) == doctest::Approx(Ak * Ak));
}

TEST_CASE("first-order energy equals the squared amplitude under the unit normalization") {
  const ModeBank& bank = short_bank();
  const KernelTables& t = oracle::short_tables();
  const RadialGrid& g = bank.grid();
  const double k = 2.0, Abar = 0.03;
  SpectrumState s = seeded_state(t, {{k, cplx(Abar / t.dk)}});
  std::vector<double> r(g.nodes.data(), g.nodes.data() + g.n_points);
  const int nz = 32;
  std::vector<double> z(nz);
  for (int m = 0; m < nz; ++m) z[m] = 2 * std::numbers::pi / k * m / nz;
  // rebuild the first-order field alone (second order switched off by the pair floor)
  const VelocityField f = reconstruct_velocity(s, t, bank, r, z, 1e9);
  const FlowConfig& c = bank.config();
  Vec e(g.n_points);
  for (int j = 0; j < g.n_points; ++j) {
    double sum = 0.0;
    for (int m = 0; m < nz; ++m) {
      const double dv = f.v[j * nz + m] - base_flow_profile(c, r[j]);
      sum += f.u[j * nz + m] * f.u[j * nz + m] + dv * dv + f.w[j * nz + m] * f.w[j * nz + m];
    }
    e(j) = 0.5 * r[j] * sum / nz;
  }
  CHECK(g.integrate(e) / (Abar * Abar) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(total_first_order_energy(s, t) == doctest::Approx(Abar * Abar));
}

TEST_CASE("reconstruction: base flow, periodicity, mean and imaginary residue") {
  const ModeBank& bank = short_bank();
  const KernelTables& t = oracle::short_tables();
  const RadialGrid& g = bank.grid();
  const FlowConfig& c = bank.config();
  std::vector<double> r = {g.r_inner, 1.3, 1.7, g.r_outer};
  std::vector<double> z = {0.0, 0.4, 1.1};

  const VelocityField zero = reconstruct_velocity(seeded_state(t, {}), t, bank, r, z);
  for (std::size_t j = 0; j < r.size(); ++j) {
    for (std::size_t m = 0; m < z.size(); ++m) {
      CHECK(zero.v[j * z.size() + m] == doctest::Approx(base_flow_profile(c, r[j])).epsilon(1e-14));
      CHECK(zero.u[j * z.size() + m] == 0.0);
    }
  }

  const double kf = 1.5;
  const SpectrumState s = seeded_state(t, {{kf, cplx(0.2)}, {2 * kf, cplx(0.02)}, {0.0, cplx(0.05)}});
  const double L = 2 * std::numbers::pi / kf;
  const VelocityField a = reconstruct_velocity(s, t, bank, r, {0.3, 0.3 + L});
  for (std::size_t j = 0; j < r.size(); ++j) CHECK(a.v[2 * j] == doctest::Approx(a.v[2 * j + 1]).epsilon(1e-12));
  CHECK(a.imag_residue < 1e-10);

  // a k = 0 amplitude alone is z-independent
  const SpectrumState only0 = seeded_state(t, {{0.0, cplx(0.05)}});
  const VelocityField m0 = reconstruct_velocity(only0, t, bank, r, {0.0, 0.7, 2.9});
  for (std::size_t j = 0; j < r.size(); ++j) {
    CHECK(m0.v[3 * j] == doctest::Approx(m0.v[3 * j + 2]).epsilon(1e-13));
    CHECK(m0.u[3 * j + 1] == doctest::Approx(0.0));
  }
  CHECK_THROWS_AS(reconstruct_velocity(s, t, bank, {0.5}, {0.0}), Error);
}

TEST_CASE("torque from the reconstructed wall shear matches the formula over all pairs") {
  const ModeBank& bank = short_bank();
  const KernelTables& t = oracle::short_tables();
  const SpectrumState s = seeded_state(t, {{2.0, cplx(0.2)}, {1.25, cplx(0.05)}, {0.0, cplx(0.04)}}, 1e-3);
  const TorqueReport q = torque_ratio(s, 2.0, t, bank.config());
  const double direct = torque_from_reconstruction(s, t, bank, 64);
  CHECK(direct == doctest::Approx(q.ratio_all_pairs).epsilon(1e-6));
  CHECK(q.ratio != q.ratio_all_pairs);
}

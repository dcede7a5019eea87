#include "couette/diagnostics.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "couette/error.hpp"

namespace couette {

double torque_prefactor(const FlowConfig& cfg) { return cfg.r_inner * cfg.r_inner / (2.0 * cfg.b0); }

namespace {

void check_tables(const KernelTables& t) {
  if (static_cast<int>(t.dv2_wall.size()) != t.size()) {
    fail(ErrorKind::Dependency, "kernel tables carry no wall-derivative entries");
  }
}

TorqueReport assemble(double k_f, double abar0, double abs_f, double spectrum_term, const KernelTables& t,
                      const FlowConfig& cfg) {
  TorqueReport r;
  r.k_f = k_f;
  const int i = t.index(k_f);
  const int m = t.size() - 1 - i;
  r.mean_flow_term = abar0 * t.dv1_wall0;
  r.pair_term = abs_f * abs_f * (t.dv2_wall[i] + t.dv2_wall[m]);
  if (i == m) r.pair_term = 0.0;
  r.spectrum_term = spectrum_term;
  const double f = torque_prefactor(cfg);
  r.ratio = 1.0 - f * (r.mean_flow_term + r.pair_term);
  r.ratio_all_pairs = 1.0 - f * (r.mean_flow_term + r.spectrum_term);
  return r;
}

}  // namespace

TorqueReport torque_ratio(const SpectrumState& s, double k_f, const KernelTables& t, const FlowConfig& cfg) {
  check_tables(t);
  if (static_cast<int>(s.A.size()) != t.size()) fail(ErrorKind::Domain, "state does not match the tables");
  const int N = t.size();
  double spectrum = 0.0;
  for (int i = 0; i < N; ++i) {
    if (i == t.nk) continue;
    const double w = (i == 0 || i == N - 1) ? 0.5 : 1.0;
    spectrum += w * std::norm(s.A[i]) * t.dv2_wall[i];
  }
  spectrum *= t.dk * t.dk;
  return assemble(k_f, s.A[t.nk].real() * t.dk, std::abs(s.A[t.index(k_f)]) * t.dk, spectrum, t, cfg);
}

TorqueReport torque_ratio(const EquilibriumReport& eq, const KernelTables& t, const FlowConfig& cfg) {
  check_tables(t);
  double abs_f = 0.0;
  double spectrum = 0.0;
  for (std::size_t n = 0; n < eq.k.size(); ++n) {
    if (std::abs(eq.k[n] - eq.k_f) < 1e-9) abs_f = eq.abs_amplitudes[n];
    if (n == 0) continue;
    const int i = t.index(eq.k[n]);
    const double w = (i == t.size() - 1) ? 0.5 : 1.0;
    // both signs of k
    spectrum += 2.0 * w * eq.abs_amplitudes[n] * eq.abs_amplitudes[n] * t.dv2_wall[i];
  }
  return assemble(eq.k_f, eq.mean_flow, abs_f, spectrum, t, cfg);
}

double perturbation_kinetic_energy(const EquilibriumReport& eq) {
  for (std::size_t n = 0; n < eq.k.size(); ++n) {
    if (std::abs(eq.k[n] - eq.k_f) < 1e-9) {
      if (eq.k_f == 0.0) return 0.5 * eq.abs_amplitudes[n] * eq.abs_amplitudes[n];
      return eq.abs_amplitudes[n] * eq.abs_amplitudes[n];
    }
  }
  return 0.0;
}

double total_first_order_energy(const SpectrumState& s, const KernelTables& t) {
  double e = 0.0;
  for (const auto& a : s.A) e += std::norm(a);
  return 0.5 * e * t.dk * t.dk;
}

VelocityField reconstruct_velocity(const SpectrumState& s, const KernelTables& t, const ModeBank& bank,
                                   const std::vector<double>& r, const std::vector<double>& z,
                                   double pair_floor) {
  const RadialGrid& g = bank.grid();
  const FlowConfig& cfg = bank.config();
  const int n = g.n_points;
  const int N = t.size();
  if (static_cast<int>(s.A.size()) != N) fail(ErrorKind::Domain, "state does not match the tables");
  if (std::abs(bank.dk() - t.dk) > 1e-15 || bank.j_max() < 2 * t.nk) {
    fail(ErrorKind::Dependency, "mode bank does not match the tables");
  }
  for (double rr : r) {
    if (rr < g.r_inner - 1e-12 || rr > g.r_outer + 1e-12) {
      std::ostringstream os;
      os << "mesh radius " << rr << " outside the annulus";
      fail(ErrorKind::Domain, os.str());
    }
  }
  const std::size_t nr = r.size(), nz = z.size();
  VelocityField f;
  f.r = r;
  f.z = z;
  std::vector<cplx> U(nr * nz), V(nr * nz), W(nr * nz), DV(nr * nz);

  std::vector<Vec> E(nr), ED(nr);
  for (std::size_t a = 0; a < nr; ++a) {
    E[a] = g.interpolation_row(r[a]);
    ED[a] = g.d1.transpose() * E[a];
  }
  auto weight = [&](int i) { return (i == 0 || i == N - 1) ? 0.5 : 1.0; };
  auto add = [&](const Vec& X, double k, cplx amp) {
    for (std::size_t a = 0; a < nr; ++a) {
      const double u = E[a].dot(X.segment(0, n));
      const double v = E[a].dot(X.segment(n, n));
      const double w = E[a].dot(X.segment(2 * n, n));
      const double dv = ED[a].dot(X.segment(n, n));
      for (std::size_t b = 0; b < nz; ++b) {
        const cplx e = amp * std::exp(cplx(0.0, k * z[b]));
        const std::size_t idx = a * nz + b;
        U[idx] += e * u;
        V[idx] += e * v;
        W[idx] += e * cplx(0.0, w);
        DV[idx] += e * dv;
      }
    }
  };
  std::vector<int> active;
  for (int i = 0; i < N; ++i) {
    if (s.A[i] == cplx(0.0)) continue;
    active.push_back(i);
    add(bank.mode(i - t.nk).state, t.k(i), weight(i) * t.dk * s.A[i]);
  }
  for (int i1 : active) {
    for (int i2 : active) {
      if (std::abs(s.A[i1]) * t.dk <= pair_floor || std::abs(s.A[i2]) * t.dk <= pair_floor) continue;
      const int j1 = i1 - t.nk, j2 = i2 - t.nk;
      const Vec X = bank.second_order(j1, j2);
      add(X, (j1 + j2) * t.dk, weight(i1) * weight(i2) * t.dk * t.dk * s.A[i1] * s.A[i2]);
    }
  }
  f.u.resize(nr * nz);
  f.v.resize(nr * nz);
  f.w.resize(nr * nz);
  f.dvdr.resize(nr * nz);
  for (std::size_t a = 0; a < nr; ++a) {
    const double Vb = base_flow_profile(cfg, std::clamp(r[a], g.r_inner, g.r_outer));
    const double dVb = base_flow_derivative(cfg, std::clamp(r[a], g.r_inner, g.r_outer));
    for (std::size_t b = 0; b < nz; ++b) {
      const std::size_t idx = a * nz + b;
      f.u[idx] = U[idx].real();
      f.v[idx] = Vb + V[idx].real();
      f.w[idx] = W[idx].real();
      f.dvdr[idx] = dVb + DV[idx].real();
      f.imag_residue = std::max({f.imag_residue, std::abs(U[idx].imag()), std::abs(V[idx].imag()),
                                 std::abs(W[idx].imag()), std::abs(DV[idx].imag())});
    }
  }
  return f;
}

double torque_from_reconstruction(const SpectrumState& s, const KernelTables& t, const ModeBank& bank, int nz,
                                  double pair_floor) {
  const FlowConfig& cfg = bank.config();
  const double period = 2.0 * std::numbers::pi / t.dk;
  std::vector<double> z(nz);
  for (int b = 0; b < nz; ++b) z[b] = period * b / nz;
  const VelocityField f = reconstruct_velocity(s, t, bank, {cfg.r_inner}, z, pair_floor);
  double mean = 0.0;
  for (double d : f.dvdr) mean += d;
  mean /= nz;
  const double couette = base_flow_derivative(cfg, cfg.r_inner);
  return 1.0 - torque_prefactor(cfg) * (mean - couette);
}

std::vector<TorqueCurvePoint> torque_vs_reynolds(const TorqueSweepSpec& spec) {
  std::vector<TorqueCurvePoint> out;
  for (double R : spec.reynolds) {
    const FlowConfig cfg = FlowConfig::make(spec.eta, spec.mu, R);
    TorqueCurvePoint pt;
    const KernelTables t =
        cached_tables(cfg, spec.n_points, spec.kernel, spec.cache_dir, spec.force_rebuild, &pt.tables);
    pt.tables_hash = t.content_hash();
    pt.reynolds = R;
    const EvolveResult main = evolve(seeded_state(t, {{spec.seed_k, cplx(spec.seed_density)}}), t, spec.evolution);
    pt.report = main.report;
    pt.k_f = main.report.k_f;
    pt.ratio = main.report.amplitude_kf == 0.0 ? 1.0 : torque_ratio(main.report, t, cfg).ratio;
    pt.envelope_min = pt.envelope_max = pt.ratio;
    for (double k0 : spec.envelope_seeds) {
      if (t.a[t.index(k0)] <= 0.0) continue;
      const EvolveResult r = evolve(seeded_state(t, {{k0, cplx(spec.seed_density)}}), t, spec.evolution);
      if (std::abs(r.report.k_f - k0) > 0.5 * t.dk || r.report.amplitude_kf == 0.0) continue;
      const double g = torque_ratio(r.report, t, cfg).ratio;
      pt.envelope_min = std::min(pt.envelope_min, g);
      pt.envelope_max = std::max(pt.envelope_max, g);
    }
    out.push_back(std::move(pt));
  }
  return out;
}

}  // namespace couette

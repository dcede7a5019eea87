#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "couette/linear_stability.hpp"
#include "couette/scenario.hpp"
#include "oracles.hpp"

using namespace couette;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int failures = 0;
std::ofstream report;

void verdict(int id, const std::string& name, bool ok, const std::string& detail) {
  char line[1024];
  std::snprintf(line, sizeof line, "[%s] criterion %2d %-28s %s\n", ok ? "PASS" : "FAIL", id, name.c_str(),
                detail.c_str());
  std::fputs(line, stdout);
  std::fflush(stdout);
  report << line << std::flush;
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

bool near(double x, double want, double tol) { return std::abs(x - want) <= tol; }

fs::path out_root() { return oracle::cache_dir().parent_path() / "acceptance"; }

json run_preset(const std::string& name) {
  RunConfig c = preset(name);
  c.out_dir = out_root() / name;
  const RunOutcome r = run_scenario(c);
  if (r.exit_code != 0) throw std::runtime_error(name + ": " + r.error);
  return json::parse(r.summary);
}

json equilibrium(const std::string& name, const std::string& label) {
  RunConfig c = preset(name);
  std::ifstream in(out_root() / name / (name + "-" + c.hash() + "-" + label + "-equilibrium.json"));
  return json::parse(in);
}

double run_kf(const json& s, const std::string& label) {
  for (const json& r : s["runs"]) {
    if (r["label"] == label) return r["k_f"].get<double>();
  }
  throw std::runtime_error("missing run " + label);
}

void critical() {
  const CriticalPoint cp = critical_point(0.5, 0.0, oracle::grid48());
  verdict(1, "critical point", near(cp.reynolds, 68.1, 0.681) && near(cp.k, 3.16, 0.05),
          fmt("R_c=%.3f (68.1+-1%%) k_c=%.4f (3.16+-0.05)", cp.reynolds, cp.k));
}

void band() {
  const auto [lo, hi] = neutral_band(oracle::flow88(), oracle::grid48());
  verdict(2, "neutral band", near(lo, 1.6, 0.1) && near(hi, 5.6, 0.1),
          fmt("band=[%.4f, %.4f] (1.6, 5.6 +-0.1)", lo, hi));
}

void growth() {
  const GrowthSample g = max_growth(oracle::flow88(), oracle::grid48());
  verdict(3, "max growth rate", near(g.sigma, 8.34, 0.02 * 8.34) && near(g.k, 3.5, 0.25),
          fmt("max sigma=%.4f at k=%.4f (8.34+-2%% near 3.5)", g.sigma, g.k));
}

void base_energy() {
  const double e = couette_base_kinetic_energy(oracle::flow88());
  verdict(4, "base-flow energy", near(e, 0.1578, 1e-3), fmt("E=%.6f (0.1578+-1e-3)", e));
}

void fig2() {
  const json s = run_preset("fig2");
  const json eq = equilibrium("fig2", "k3");
  const double kf = eq["k_f"], amp = eq["amplitude_kf"], ke = eq["kinetic_energy"], mean = eq["mean_flow"];
  double harm = 0.0;
  for (const json& h : eq["harmonics"]) {
    if (std::abs(h["k"].get<double>() - 6.0) < 1e-9) harm = h["amplitude"];
  }
  const KernelTables& t = oracle::tables88();
  EvolutionParams p;
  p.t_max = 0.05;
  const SpectrumState early = evolve(seeded_state(t, {{3.0, cplx(0.125)}}), t, p).final_state;
  const auto I1 = triad_integral(early, t);
  const auto I2 = quartet_integral(early, t);
  const double i13 = I1[t.index(3.0)].real(), i16 = I1[t.index(6.0)].real(), i10 = I1[t.index(0.0)].real();
  const double i20 = I2[t.index(0.0)].real(), i23 = I2[t.index(3.0)].real(), i26 = I2[t.index(6.0)].real();
  const double i2max = std::max({i20, i23, i26});
  const bool signs = i13 < 0 && i16 > 0 && i10 > 0 && i2max <= 0;
  const bool shape = kf == 3.0 && std::abs(harm) > 0 && std::abs(mean) > 0;
  verdict(5, "fig2 equilibrium", shape && signs && near(ke, 0.0096, 0.00096),
          fmt("k_f=%g Abar3=%.5f Abar6=%.2e Abar0=%.5f KE=%.5f (0.0096+-10%%) signs I1(3)=%.2e I1(6)=%.2e "
              "I1(0)=%.2e I2(0)=%.2e I2(3)=%.2e I2(6)=%.2e%s",
              kf, amp, harm, mean, ke, i13, i16, i10, i20, i23, i26, signs ? "" : " [sign mismatch]"));
  (void)s;
}

void fig3() {
  const json s = run_preset("fig3");
  const json eq = equilibrium("fig3", "k2");
  const auto& k = eq["k"];
  const auto& a = eq["abs_amplitudes"];
  double a2 = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (k[i] == 2.0) a2 = a[i];
  }
  const double kf = run_kf(s, "k2");
  verdict(6, "sideband instability", kf == 4.0 && a2 < 0.1 * 0.25,
          fmt("k_f=%g (4), final |Abar(2)|=%.2e from 0.025", kf, a2));
}

void fig4() {
  const json s = run_preset("fig4");
  std::map<std::pair<double, bool>, double> kf;
  for (const json& r : s["rows"]) kf[{r["seed_k"].get<double>(), r["background"].get<double>() > 0}] = r["k_f"];
  std::string d;
  bool ok = true;
  const std::pair<double, double> harmonics[] = {{1.75, 3.5}, {2.0, 4.0}, {2.25, 4.5}, {2.5, 5.0}};
  for (const auto& [seed, want] : harmonics) {
    const double got = kf.at({seed, true});
    ok = ok && got == want;
    d += fmt("%g->%g(%g) ", seed, got, want);
  }
  for (double seed : {5.25, 5.5}) {
    const double noisy = kf.at({seed, true}), clean = kf.at({seed, false});
    ok = ok && noisy == 3.25 && clean == seed;
    d += fmt("%g->%g(3.25)/clean %g(%g) ", seed, noisy, clean, seed);
  }
  bool subset = false;
  if (!s["stable_band"].is_null()) {
    const double lo = s["stable_band"][0], hi = s["stable_band"][1];
    subset = lo >= 1.6 && hi <= 5.6 && (lo > 1.6 || hi < 5.6);
    d += fmt("stable band [%g, %g]", lo, hi);
  }
  verdict(7, "fig4 selection", ok && subset, d);
}

void fig5() {
  const double a = run_kf(run_preset("fig5a"), "pair");
  const double b = run_kf(run_preset("fig5b"), "pair");
  verdict(8, "nonuniqueness", a == 3.25 && b == 3.75, fmt("(0.2,0.2)->%g (3.25), (0.1,0.2)->%g (3.75)", a, b));
}

void fig6() {
  const json s = run_preset("fig6");
  std::vector<double> ks, amps;
  for (const char* l : {"d0.1", "d0.05", "d0.01"}) {
    ks.push_back(run_kf(s, l));
    amps.push_back(equilibrium("fig6", l)["amplitude_kf"]);
  }
  const double spread = *std::max_element(amps.begin(), amps.end()) - *std::min_element(amps.begin(), amps.end());
  const bool ok = std::all_of(ks.begin(), ks.end(), [](double k) { return k == 3.0; }) &&
                  spread <= 1e-4 * std::abs(amps[0]);
  verdict(9, "long-wave receptivity", ok,
          fmt("k_f=%g/%g/%g (3) Abar spread %.2e", ks[0], ks[1], ks[2], spread));
}

void broadband() {
  const json s = run_preset("broadband");
  const double lo = run_kf(s, "u0.01"), hi = run_kf(s, "u0.1");
  verdict(10, "broad-band threshold", lo == 3.5 && hi == 3.25,
          fmt("u0.01->%g (3.5), u0.05->%g, u0.1->%g (3.25)", lo, run_kf(s, "u0.05"), hi));
}

void table1() {
  const json s = run_preset("table1");
  const double ref[] = {1.150, 1.172, 1.181, 1.183, 1.179, 1.172, 1.161, 1.144, 1.122, 1.096};
  double worst = 0.0;
  int i = 0, within = 0;
  std::string rows;
  for (const json& r : s["rows"]) {
    const double g = r["ratio"];
    const double e = std::abs(g - ref[i]);
    worst = std::max(worst, e);
    within += e <= 0.02;
    rows += fmt("%g:%.4f ", r["k_f"].get<double>(), g);
    ++i;
  }
  const double kmax = s["max"]["k_f"], kmin = s["min"]["k_f"], spread = s["spread"];
  const bool ok = i == 10 && worst <= 0.02 && kmax == 3.5 && kmin == 5.0 && spread > 0.05 && spread < 0.15;
  verdict(11, "table1 torque", ok,
          fmt("%d/10 rows within 0.02 (worst %.4f), max at %g, min at %g, spread %.1f%% | %s", within, worst, kmax,
              kmin, 100 * spread, rows.c_str()));
}

void properties() {
  std::string d;
  bool ok = true;
  const FlowConfig& c = oracle::flow88();
  const RadialGrid& g = oracle::grid48();

  double bio = 0.0, res = 0.0;
  for (double k : {0.5, 3.0, 6.0}) {
    const EigenMode m = leading_mode(c, k, g);
    const AdjointMode a = adjoint_mode(c, k, g, m);
    bio = std::max(bio, std::abs(biorthogonal_product(g, a, m.state) - 1.0));
    const ModeResiduals r = mode_residuals(c, g, m);
    res = std::max({res, r.eigen, r.continuity, r.boundary});
  }
  ok = ok && bio <= 1e-6 && res <= 1e-7;
  d += fmt("biorth %.1e, residual %.1e; ", bio, res);

  const KernelTables& t = oracle::tables88();
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  SpectrumState s;
  s.A.assign(t.size(), 0.0);
  for (int i = t.nk; i < t.size(); ++i) {
    s.A[i] = i == t.nk ? cplx(nd(rng)) : cplx(nd(rng), nd(rng));
    s.A[2 * t.nk - i] = std::conj(s.A[i]);
  }
  const auto I1 = triad_integral(s, t), I2 = quartet_integral(s, t);
  const auto B1 = oracle::brute_triad(s.A, t), B2 = oracle::brute_quartet(s.A, t);
  double e1 = 0.0, e2 = 0.0, s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < t.size(); ++i) {
    e1 = std::max(e1, std::abs(I1[i] - B1[i]));
    e2 = std::max(e2, std::abs(I2[i] - B2[i]));
    s1 = std::max(s1, std::abs(B1[i]));
    s2 = std::max(s2, std::abs(B2[i]));
  }
  ok = ok && e1 <= 1e-12 * s1 && e2 <= 1e-12 * s2;
  d += fmt("convolution %.1e/%.1e rel; ", e1 / s1, e2 / s2);

  const KernelTables& ts = oracle::short_tables();
  SpectrumState h = seeded_state(ts, {{2.0, std::polar(0.2, 0.7)}, {1.25, std::polar(0.05, -1.1)}}, 1e-5);
  double drift = 0.0;
  for (int n = 0; n < 100000; ++n) {
    h = step(h, ts, EvolutionParams{});
    if (n % 1000 == 0) drift = std::max(drift, hermitian_drift(h));
  }
  drift = std::max(drift, hermitian_drift(h));
  ok = ok && drift <= 1e-12;
  d += fmt("hermitian drift %.1e; ", drift);

  const double k0 = 3.0, dt = 0.01;
  double landau = 0.0;
  {
    const auto twin = landau_evolution(landau_model(k0, t), 0.05 * t.dk, 2.0, dt, OdeMethod::ImplicitEuler);
    oracle::masked_run(t, {k0}, {{k0, 0.05}}, 2.0, dt, 10, [&](const SpectrumState& st) {
      const double ref = twin[std::lround(st.t / dt)].value;
      landau = std::max(landau, std::abs(st.A[t.index(k0)].real() * t.dk - ref) / std::abs(ref));
    });
  }
  double coupled = 0.0;
  {
    const auto twin = meanflow_coupled_evolution(meanflow_coupled_coefficients(k0, t), 0.1 * t.dk, 0.0, 3.0, dt,
                                                 OdeMethod::ImplicitEuler);
    oracle::masked_run(t, {k0, 0.0}, {{k0, 0.1}}, 3.0, dt, 10, [&](const SpectrumState& st) {
      const auto& ref = twin[std::lround(st.t / dt)];
      coupled = std::max(coupled, std::abs(st.A[t.index(k0)].real() * t.dk - ref.x) / std::abs(ref.x));
      if (st.t > 0.5) coupled = std::max(coupled, std::abs(st.A[t.nk].real() * t.dk - ref.y) / std::abs(ref.y));
    });
  }
  ok = ok && landau <= 1e-6 && coupled <= 1e-6;
  d += fmt("masked Landau %.1e, mean-flow %.1e; ", landau, coupled);

  KernelOptions o;
  o.dk = 0.2;
  const KernelTables t2 = oracle::tables_with(o);
  const EvolveResult a = evolve(seeded_state(t, {{3.0, cplx(0.125)}}, 1e-5), t, EvolutionParams{});
  const EvolveResult b =
      evolve(seeded_state(t2, {{3.0, cplx(0.125 * 0.25 / 0.2)}}, 1e-5 * 0.25 / 0.2), t2, EvolutionParams{});
  const double rel = std::abs(b.report.amplitude_kf / a.report.amplitude_kf - 1.0);
  ok = ok && rel < 0.02 && b.report.k_f == a.report.k_f;
  d += fmt("dk=0.2 change %.2f%%; ", 100 * rel);

  const RadialGrid g32 = build_grid(32, c.r_inner, c.r_outer);
  const EigenMode m3 = leading_mode(c, 3.0, g32), m25 = leading_mode(c, 2.5, g32);
  const ForcingProfile F = quadratic_forcing(c, g32, m3, m25);
  const auto ps = oracle::pseudo_spectral_forcing(c, g32, m3.state, 3.0, m25.state, 2.5, 4 * 22 + 8);
  double err = 0.0, scale = 0.0;
  for (int j = 1; j + 1 < g32.n_points; ++j) {
    const cplx want[3] = {0.25 * F.radial(j), 0.25 * F.azimuthal(j), cplx(0.0, 0.25 * F.axial(j))};
    for (int q = 0; q < 3; ++q) {
      scale = std::max(scale, std::abs(want[q]));
      err = std::max(err, std::abs(ps[q * g32.n_points + j] - want[q]));
    }
  }
  ok = ok && err <= 1e-8 * scale;
  d += fmt("pseudo-spectral %.1e rel", err / scale);
  verdict(12, "property suites", ok, d);
}

}  // namespace

int main() {
  setenv("COUETTE_SPECTRUM_CACHE", oracle::cache_dir().c_str(), 0);
  fs::create_directories(out_root());
  report.open(ACCEPTANCE_REPORT);
  using Fn = void (*)();
  const std::pair<int, Fn> all[] = {{12, properties}, {1, critical}, {2, band},     {3, growth},
                                    {4, base_energy}, {5, fig2},     {6, fig3},     {7, fig4},
                                    {8, fig5},        {9, fig6},     {10, broadband}, {11, table1}};
  for (const auto& [id, fn] : all) {
    try {
      fn();
    } catch (const std::exception& e) {
      verdict(id, "error", false, e.what());
    }
  }
  std::printf("%d of 12 criteria failed\n", failures);
  report << failures << " of 12 criteria failed\n";
  return 0;
}

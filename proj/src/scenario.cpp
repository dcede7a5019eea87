#include "couette/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "couette/reduced_models.hpp"
#include "parallel.hpp"

#ifndef COUETTE_SPECTRUM_VERSION
#define COUETTE_SPECTRUM_VERSION "unknown"
#endif

namespace couette {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string num(double x) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  std::string s(buf, r.ptr);
  if (s.find_first_of(".en") == std::string::npos) s += ".0";
  return s;
}

// ---- emitting

void emit_list(YAML::Emitter& e, const std::vector<double>& v) {
  e << YAML::Flow << YAML::BeginSeq;
  for (double x : v) e << num(x);
  e << YAML::EndSeq;
}

void emit_config(YAML::Emitter& e, const RunConfig& c, bool with_output) {
  e << YAML::BeginMap;
  e << YAML::Key << "scenario" << YAML::Value << c.scenario;
  e << YAML::Key << "kind" << YAML::Value << to_string(c.kind);

  e << YAML::Key << "flow" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "eta" << YAML::Value << num(c.eta);
  e << YAML::Key << "mu" << YAML::Value << num(c.mu);
  e << YAML::Key << "reynolds" << YAML::Value << num(c.reynolds);
  e << YAML::EndMap;

  e << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "n_points" << YAML::Value << c.n_points;
  e << YAML::Key << "k_max" << YAML::Value << num(c.kernel.k_max);
  e << YAML::Key << "dk" << YAML::Value << num(c.kernel.dk);
  e << YAML::Key << "pin" << YAML::Value << to_string(c.kernel.pin);
  e << YAML::Key << "include_b1" << YAML::Value << c.kernel.include_b1;
  e << YAML::Key << "flip_phase" << YAML::Value << c.kernel.flip_phase;
  e << YAML::EndMap;

  const EvolutionParams& p = c.evolution;
  e << YAML::Key << "evolution" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "dt" << YAML::Value << num(p.dt);
  e << YAML::Key << "picard_tol" << YAML::Value << num(p.picard_tol);
  e << YAML::Key << "picard_max" << YAML::Value << p.picard_max;
  e << YAML::Key << "equil_tol" << YAML::Value << num(p.equil_tol);
  e << YAML::Key << "t_max" << YAML::Value << num(p.t_max);
  e << YAML::Key << "sample_every" << YAML::Value << p.sample_every;
  e << YAML::Key << "snapshot_every" << YAML::Value << p.snapshot_every;
  e << YAML::EndMap;

  e << YAML::Key << "runs" << YAML::Value;
  if (c.runs.empty()) e << YAML::Flow;
  e << YAML::BeginSeq;
  for (const InitialCondition& ic : c.runs) {
    e << YAML::BeginMap;
    e << YAML::Key << "label" << YAML::Value << ic.label;
    e << YAML::Key << "seeds" << YAML::Value << YAML::BeginSeq;
    for (const SeedSpec& s : ic.seeds) {
      e << YAML::Flow << YAML::BeginMap;
      e << YAML::Key << "k" << YAML::Value << num(s.k);
      e << YAML::Key << "density" << YAML::Value << num(s.density);
      e << YAML::Key << "phase" << YAML::Value << num(s.phase);
      e << YAML::EndMap;
    }
    e << YAML::EndSeq;
    e << YAML::Key << "uniform" << YAML::Value << num(ic.uniform);
    e << YAML::Key << "include_zero" << YAML::Value << ic.include_zero;
    e << YAML::Key << "background" << YAML::Value << num(ic.background);
    e << YAML::EndMap;
  }
  e << YAML::EndSeq;

  e << YAML::Key << "selection" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "density" << YAML::Value << num(c.selection_density);
  e << YAML::Key << "groups" << YAML::Value;
  if (c.selection.empty()) e << YAML::Flow;
  e << YAML::BeginSeq;
  for (const SelectionGroup& g : c.selection) {
    e << YAML::BeginMap;
    e << YAML::Key << "background" << YAML::Value << num(g.background);
    e << YAML::Key << "seeds" << YAML::Value;
    emit_list(e, g.seeds);
    e << YAML::EndMap;
  }
  e << YAML::EndSeq;
  e << YAML::EndMap;

  e << YAML::Key << "torque" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "k_f" << YAML::Value;
  emit_list(e, c.torque_k);
  e << YAML::Key << "density" << YAML::Value << num(c.torque_density);
  e << YAML::Key << "background" << YAML::Value << num(c.torque_background);
  e << YAML::EndMap;

  e << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "reynolds" << YAML::Value;
  emit_list(e, c.sweep_reynolds);
  e << YAML::Key << "seed_k" << YAML::Value << num(c.sweep_seed_k);
  e << YAML::Key << "density" << YAML::Value << num(c.sweep_density);
  e << YAML::Key << "envelope_seeds" << YAML::Value;
  emit_list(e, c.sweep_envelope);
  e << YAML::EndMap;

  if (with_output) {
    e << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "dir" << YAML::Value << c.out_dir.string();
    e << YAML::Key << "cache_dir" << YAML::Value << c.cache_dir.string();
    e << YAML::Key << "force_rebuild" << YAML::Value << c.force_rebuild;
    e << YAML::Key << "threads" << YAML::Value << c.threads;
    e << YAML::EndMap;
  }
  e << YAML::EndMap;
}

// ---- parsing

[[noreturn]] void bad(const std::string& msg) { fail(ErrorKind::Config, "config: " + msg); }

void check_keys(const YAML::Node& n, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!n.IsMap()) bad(where + " must be a mapping");
  for (const auto& kv : n) {
    const std::string key = kv.first.as<std::string>();
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      bad("unknown key '" + key + "' in " + where);
    }
  }
}

template <class T>
void read(const YAML::Node& n, const char* key, T& out, const std::string& where) {
  const YAML::Node v = n[key];
  if (!v) return;
  try {
    out = v.as<T>();
  } catch (const YAML::Exception&) {
    bad("bad value for " + where + "." + key);
  }
}

void read_list(const YAML::Node& n, const char* key, std::vector<double>& out, const std::string& where) {
  const YAML::Node v = n[key];
  if (!v) return;
  if (!v.IsSequence()) bad(where + "." + key + " must be a list");
  out.clear();
  for (const auto& x : v) {
    try {
      out.push_back(x.as<double>());
    } catch (const YAML::Exception&) {
      bad("bad number in " + where + "." + key);
    }
  }
}

RunConfig from_node(const YAML::Node& root) {
  RunConfig c;
  check_keys(root, "top level",
             {"scenario", "kind", "flow", "grid", "evolution", "runs", "selection", "torque", "sweep", "output"});
  read(root, "scenario", c.scenario, "");
  if (root["kind"]) c.kind = scenario_kind_from_string(root["kind"].as<std::string>());
  if (const YAML::Node n = root["flow"]) {
    check_keys(n, "flow", {"eta", "mu", "reynolds"});
    read(n, "eta", c.eta, "flow");
    read(n, "mu", c.mu, "flow");
    read(n, "reynolds", c.reynolds, "flow");
  }
  if (const YAML::Node n = root["grid"]) {
    check_keys(n, "grid", {"n_points", "k_max", "dk", "pin", "include_b1", "flip_phase"});
    read(n, "n_points", c.n_points, "grid");
    read(n, "k_max", c.kernel.k_max, "grid");
    read(n, "dk", c.kernel.dk, "grid");
    if (n["pin"]) c.kernel.pin = pin_from_string(n["pin"].as<std::string>());
    read(n, "include_b1", c.kernel.include_b1, "grid");
    read(n, "flip_phase", c.kernel.flip_phase, "grid");
  }
  if (const YAML::Node n = root["evolution"]) {
    check_keys(n, "evolution",
               {"dt", "picard_tol", "picard_max", "equil_tol", "t_max", "sample_every", "snapshot_every"});
    EvolutionParams& p = c.evolution;
    read(n, "dt", p.dt, "evolution");
    read(n, "picard_tol", p.picard_tol, "evolution");
    read(n, "picard_max", p.picard_max, "evolution");
    read(n, "equil_tol", p.equil_tol, "evolution");
    read(n, "t_max", p.t_max, "evolution");
    read(n, "sample_every", p.sample_every, "evolution");
    read(n, "snapshot_every", p.snapshot_every, "evolution");
  }
  if (const YAML::Node n = root["runs"]) {
    if (!n.IsSequence()) bad("runs must be a list");
    for (const auto& r : n) {
      check_keys(r, "runs", {"label", "seeds", "uniform", "include_zero", "background"});
      InitialCondition ic;
      read(r, "label", ic.label, "runs");
      if (const YAML::Node s = r["seeds"]) {
        if (!s.IsSequence()) bad("runs.seeds must be a list");
        for (const auto& x : s) {
          check_keys(x, "runs.seeds", {"k", "density", "phase"});
          SeedSpec seed;
          read(x, "k", seed.k, "runs.seeds");
          read(x, "density", seed.density, "runs.seeds");
          read(x, "phase", seed.phase, "runs.seeds");
          ic.seeds.push_back(seed);
        }
      }
      read(r, "uniform", ic.uniform, "runs");
      read(r, "include_zero", ic.include_zero, "runs");
      read(r, "background", ic.background, "runs");
      c.runs.push_back(std::move(ic));
    }
  }
  if (const YAML::Node n = root["selection"]) {
    check_keys(n, "selection", {"density", "groups"});
    read(n, "density", c.selection_density, "selection");
    if (const YAML::Node g = n["groups"]) {
      if (!g.IsSequence()) bad("selection.groups must be a list");
      for (const auto& x : g) {
        check_keys(x, "selection.groups", {"background", "seeds"});
        SelectionGroup grp;
        read(x, "background", grp.background, "selection.groups");
        read_list(x, "seeds", grp.seeds, "selection.groups");
        c.selection.push_back(std::move(grp));
      }
    }
  }
  if (const YAML::Node n = root["torque"]) {
    check_keys(n, "torque", {"k_f", "density", "background"});
    read_list(n, "k_f", c.torque_k, "torque");
    read(n, "density", c.torque_density, "torque");
    read(n, "background", c.torque_background, "torque");
  }
  if (const YAML::Node n = root["sweep"]) {
    check_keys(n, "sweep", {"reynolds", "seed_k", "density", "envelope_seeds"});
    read_list(n, "reynolds", c.sweep_reynolds, "sweep");
    read(n, "seed_k", c.sweep_seed_k, "sweep");
    read(n, "density", c.sweep_density, "sweep");
    read_list(n, "envelope_seeds", c.sweep_envelope, "sweep");
  }
  if (const YAML::Node n = root["output"]) {
    check_keys(n, "output", {"dir", "cache_dir", "force_rebuild", "threads"});
    std::string s;
    if (n["dir"]) {
      read(n, "dir", s, "output");
      c.out_dir = s;
    }
    if (n["cache_dir"]) {
      s.clear();
      read(n, "cache_dir", s, "output");
      c.cache_dir = s;
    }
    read(n, "force_rebuild", c.force_rebuild, "output");
    read(n, "threads", c.threads, "output");
  }
  return c;
}

bool on_grid(double k, double dk) {
  const double q = k / dk;
  return std::abs(q - std::round(q)) < 1e-9;
}

std::vector<double> range(double lo, double hi, double step) {
  std::vector<double> v;
  const int n = static_cast<int>(std::lround((hi - lo) / step));
  for (int i = 0; i <= n; ++i) v.push_back(lo + i * step);
  return v;
}

RunConfig evolve_preset(const std::string& name, std::vector<InitialCondition> runs, double t_max) {
  RunConfig c;
  c.scenario = name;
  c.kind = ScenarioKind::Evolve;
  c.runs = std::move(runs);
  c.evolution.t_max = t_max;
  return c;
}

InitialCondition seeded(const std::string& label, std::vector<SeedSpec> seeds, double background = 0.0) {
  InitialCondition ic;
  ic.label = label;
  ic.seeds = std::move(seeds);
  ic.background = background;
  return ic;
}

InitialCondition uniform(const std::string& label, double density) {
  InitialCondition ic;
  ic.label = label;
  ic.uniform = density;
  return ic;
}

// ---- output helpers

void write_file(const fs::path& file, const std::string& text) {
  const fs::path tmp = file.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) fail(ErrorKind::Cache, "cannot write " + tmp.string());
    os << text;
    if (!os) fail(ErrorKind::Cache, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, file, ec);
  if (ec) fail(ErrorKind::Cache, "cannot rename " + tmp.string() + ": " + ec.message());
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

json report_json(const EquilibriumReport& r) {
  json j;
  j["k_f"] = r.k_f;
  j["amplitude_kf"] = r.amplitude_kf;
  j["mean_flow"] = r.mean_flow;
  j["residual"] = r.residual;
  j["reason"] = r.reason;
  j["t"] = r.t;
  j["steps"] = r.steps;
  j["harmonics"] = json::array();
  for (const auto& [k, a] : r.harmonics) j["harmonics"].push_back({{"k", k}, {"amplitude", a}});
  j["k"] = r.k;
  j["amplitudes"] = r.amplitudes;
  j["abs_amplitudes"] = r.abs_amplitudes;
  return j;
}

struct Ctx {
  const RunConfig& c;
  std::string stem;
  fs::path cache;
  int threads;
  json& man;
  std::vector<fs::path>& files;

  fs::path file(const std::string& suffix) const { return c.out_dir / (stem + "-" + suffix); }
  void write(const std::string& suffix, const std::string& text) {
    const fs::path f = file(suffix);
    write_file(f, text);
    if (std::find(files.begin(), files.end(), f) == files.end()) files.push_back(f);
  }

  KernelOptions kernel() const {
    KernelOptions o = c.kernel;
    o.threads = threads;
    return o;
  }

  KernelTables tables(double reynolds) {
    TableBuildInfo info;
    KernelTables t =
        cached_tables(FlowConfig::make(c.eta, c.mu, reynolds), c.n_points, kernel(), cache, c.force_rebuild, &info);
    man["tables"].push_back(table_json(t, info));
    return t;
  }

  static json table_json(const KernelTables& t, const TableBuildInfo& info) {
    return {{"reynolds", t.reynolds},       {"config_hash", t.config_hash()},
            {"content_hash", t.content_hash()}, {"cache_hit", info.cache_hit},
            {"seconds", info.seconds},       {"file", info.file.string()},
            {"epsilon", t.epsilon},          {"k0_slowest_decay", t.sigma_w_branch0},
            {"k0_mean_flow_decay", t.a[t.nk]}};
  }

  EvolutionParams params() const {
    EvolutionParams p = c.evolution;
    p.threads = threads;
    return p;
  }
};

SpectrumState initial_state(const InitialCondition& ic, const KernelTables& t) {
  if (ic.uniform > 0.0) return uniform_state(t, ic.uniform, ic.include_zero);
  std::vector<std::pair<double, cplx>> seeds;
  for (const SeedSpec& s : ic.seeds) seeds.emplace_back(s.k, std::polar(s.density, s.phase));
  return seeded_state(t, seeds, ic.background);
}

void run_evolve(Ctx& x, const fs::path& resume) {
  const RunConfig& c = x.c;
  if (!resume.empty() && c.runs.size() != 1) fail(ErrorKind::Config, "resume needs a configuration with one run");
  const FlowConfig cfg = c.flow();
  const KernelTables t = x.tables(c.reynolds);
  SpectrumState resumed;
  if (!resume.empty()) resumed = load_snapshot(resume, t);

  json runs = json::array();
  for (const InitialCondition& ic : c.runs) {
    const SpectrumState init = resume.empty() ? initial_state(ic, t) : resumed;
    EvolutionParams p = x.params();
    p.snapshot_file = x.file(ic.label + "-snapshot.json");

    std::ostringstream traj, integ;
    traj << "t,k,re_A,im_A,abs_amplitude\n";
    integ << "t,k,I1,I2\n";
    auto sample = [&](const SpectrumState& s) {
      const std::vector<cplx> I1 = triad_integral(s, t, p.threads);
      const std::vector<cplx> I2 = quartet_integral(s, t, p.threads);
      for (int i = t.nk; i < t.size(); ++i) {
        const std::string ts = fmt(s.t), ks = fmt(t.k(i));
        traj << ts << ',' << ks << ',' << fmt(s.A[i].real()) << ',' << fmt(s.A[i].imag()) << ','
             << fmt(std::abs(s.A[i]) * t.dk) << '\n';
        integ << ts << ',' << ks << ',' << fmt(I1[i].real()) << ',' << fmt(I2[i].real()) << '\n';
      }
    };
    const auto t0 = std::chrono::steady_clock::now();
    const EvolveResult res = evolve(init, t, p, sample);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    x.files.push_back(p.snapshot_file);

    const EquilibriumReport& r = res.report;
    const TorqueReport tq = torque_ratio(r, t, cfg);
    json eq = report_json(r);
    eq["label"] = ic.label;
    eq["torque_ratio"] = tq.ratio;
    eq["torque_ratio_all_pairs"] = tq.ratio_all_pairs;
    eq["kinetic_energy"] = perturbation_kinetic_energy(r);
    eq["first_order_energy"] = total_first_order_energy(res.final_state, t);
    eq["base_kinetic_energy"] = couette_base_kinetic_energy(cfg);
    eq["hermitian_drift"] = hermitian_drift(res.final_state);
    x.write(ic.label + "-trajectory.csv", traj.str());
    x.write(ic.label + "-integrals.csv", integ.str());
    x.write(ic.label + "-equilibrium.json", eq.dump(2) + "\n");

    runs.push_back({{"label", ic.label},
                    {"k_f", r.k_f},
                    {"amplitude_kf", r.amplitude_kf},
                    {"mean_flow", r.mean_flow},
                    {"reason", r.reason},
                    {"residual", r.residual},
                    {"t", r.t},
                    {"torque_ratio", tq.ratio},
                    {"kinetic_energy", perturbation_kinetic_energy(r)},
                    {"seconds", secs}});
  }
  x.man["summary"]["runs"] = runs;
}

void run_landau(Ctx& x) {
  const KernelTables t = x.tables(x.c.reynolds);
  std::ostringstream os;
  os << "k,growth_rate,landau_constant,equilibrium_amplitude\n";
  double best_k = 0.0, best_a = 0.0;
  for (int i = t.nk + 1; i < t.size(); ++i) {
    LandauModel m;
    try {
      m = landau_model(t.k(i), t);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Domain) continue;
      throw;
    }
    const double amp = m.equilibrium_amplitude();
    os << fmt(m.k0) << ',' << fmt(m.a) << ',' << fmt(m.a1) << ',' << fmt(amp) << '\n';
    if (amp > best_a) {
      best_a = amp;
      best_k = m.k0;
    }
  }
  x.write("fig1.csv", os.str());
  x.man["summary"] = {{"k_max_amplitude", best_k}, {"max_amplitude", best_a}};
}

void run_selection(Ctx& x) {
  const RunConfig& c = x.c;
  const KernelTables t = x.tables(c.reynolds);
  const EvolutionParams p = x.params();
  std::ostringstream os;
  os << "seed_k,background,k_f,amplitude,outcome,reason,t\n";
  json rows = json::array();
  double lo = INFINITY, hi = -INFINITY;
  const bool any_noisy = std::any_of(c.selection.begin(), c.selection.end(),
                                     [](const SelectionGroup& g) { return g.background > 0.0; });
  for (const SelectionGroup& g : c.selection) {
    for (const SelectionRow& r : selection_sweep(t, g.seeds, c.selection_density, g.background, p)) {
      os << fmt(r.seed_k) << ',' << fmt(g.background) << ',' << fmt(r.k_f) << ',' << fmt(r.amplitude) << ','
         << r.outcome << ',' << r.report.reason << ',' << fmt(r.report.t) << '\n';
      rows.push_back({{"seed_k", r.seed_k},
                      {"background", g.background},
                      {"k_f", r.k_f},
                      {"amplitude", r.amplitude},
                      {"outcome", r.outcome},
                      {"reason", r.report.reason}});
      if ((g.background > 0.0 || !any_noisy) && r.outcome == "stable as seeded") {
        lo = std::min(lo, r.k_f);
        hi = std::max(hi, r.k_f);
      }
    }
  }
  x.write("fig4.csv", os.str());
  const FlowConfig cfg = c.flow();
  const auto band = neutral_band(cfg, build_grid(c.n_points, cfg.r_inner, cfg.r_outer));
  json& s = x.man["summary"];
  s["rows"] = rows;
  s["unstable_band"] = json::array({band.first, band.second});
  if (std::isfinite(lo)) {
    s["stable_band"] = json::array({lo, hi});
  } else {
    s["stable_band"] = nullptr;
  }
}

void run_torque(Ctx& x) {
  const RunConfig& c = x.c;
  const FlowConfig cfg = c.flow();
  const KernelTables t = x.tables(c.reynolds);
  const EvolutionParams p = x.params();
  std::ostringstream os;
  os << "k_f,ratio,mean_flow_term,pair_term,ratio_all_pairs,amplitude,mean_flow,final_k,reason\n";
  json rows = json::array();
  double gmin = INFINITY, gmax = -INFINITY, kmin = 0.0, kmax = 0.0;
  for (double k : c.torque_k) {
    const SpectrumState init = seeded_state(t, {{k, cplx(c.torque_density)}}, c.torque_background);
    const EvolveResult res = evolve(init, t, p);
    // evaluated at the seeded wavenumber even if another wave took over
    const TorqueReport tq = torque_ratio(res.final_state, k, t, cfg);
    const int i = t.index(k);
    const double amp = res.final_state.A[i].real() * t.dk;
    os << fmt(k) << ',' << fmt(tq.ratio) << ',' << fmt(tq.mean_flow_term) << ',' << fmt(tq.pair_term) << ','
       << fmt(tq.ratio_all_pairs) << ',' << fmt(amp) << ',' << fmt(res.report.mean_flow) << ','
       << fmt(res.report.k_f) << ',' << res.report.reason << '\n';
    rows.push_back({{"k_f", k}, {"ratio", tq.ratio}, {"final_k", res.report.k_f}, {"reason", res.report.reason}});
    if (tq.ratio > gmax) gmax = tq.ratio, kmax = k;
    if (tq.ratio < gmin) gmin = tq.ratio, kmin = k;
  }
  x.write("table1.csv", os.str());
  json& s = x.man["summary"];
  s["rows"] = rows;
  if (!c.torque_k.empty()) {
    s["max"] = {{"k_f", kmax}, {"ratio", gmax}};
    s["min"] = {{"k_f", kmin}, {"ratio", gmin}};
    s["spread"] = (gmax - gmin) / gmin;
  }
}

void run_sweep(Ctx& x) {
  const RunConfig& c = x.c;
  TorqueSweepSpec spec;
  spec.reynolds = c.sweep_reynolds;
  spec.eta = c.eta;
  spec.mu = c.mu;
  spec.n_points = c.n_points;
  spec.kernel = x.kernel();
  spec.evolution = x.params();
  spec.seed_k = c.sweep_seed_k;
  spec.seed_density = c.sweep_density;
  spec.envelope_seeds = c.sweep_envelope;
  spec.cache_dir = x.cache;
  spec.force_rebuild = c.force_rebuild;
  const std::vector<TorqueCurvePoint> pts = torque_vs_reynolds(spec);
  std::ostringstream os;
  os << "reynolds,k_f,ratio,envelope_min,envelope_max\n";
  json rows = json::array();
  for (const TorqueCurvePoint& pt : pts) {
    os << fmt(pt.reynolds) << ',' << fmt(pt.k_f) << ',' << fmt(pt.ratio) << ',' << fmt(pt.envelope_min) << ','
       << fmt(pt.envelope_max) << '\n';
    rows.push_back({{"reynolds", pt.reynolds},
                    {"k_f", pt.k_f},
                    {"ratio", pt.ratio},
                    {"envelope_min", pt.envelope_min},
                    {"envelope_max", pt.envelope_max}});
    x.man["tables"].push_back({{"reynolds", pt.reynolds},
                               {"content_hash", pt.tables_hash},
                               {"cache_hit", pt.tables.cache_hit},
                               {"seconds", pt.tables.seconds},
                               {"file", pt.tables.file.string()}});
  }
  x.write("fig7.csv", os.str());
  x.man["summary"]["rows"] = rows;
}

}  // namespace

std::string to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::Evolve:
      return "evolve";
    case ScenarioKind::Landau:
      return "landau";
    case ScenarioKind::Selection:
      return "selection";
    case ScenarioKind::Torque:
      return "torque";
    case ScenarioKind::TorqueSweep:
      return "torque_sweep";
  }
  return "evolve";
}

ScenarioKind scenario_kind_from_string(const std::string& s) {
  for (ScenarioKind k : {ScenarioKind::Evolve, ScenarioKind::Landau, ScenarioKind::Selection, ScenarioKind::Torque,
                         ScenarioKind::TorqueSweep}) {
    if (to_string(k) == s) return k;
  }
  fail(ErrorKind::Config, "unknown scenario kind '" + s + "'");
}

FlowConfig RunConfig::flow() const { return FlowConfig::make(eta, mu, reynolds); }

std::string RunConfig::hash() const {
  YAML::Emitter e;
  emit_config(e, *this, false);
  return hex64(fnv1a(e.c_str(), e.size())).substr(0, 12);
}

void RunConfig::validate() const {
  if (scenario.empty() || scenario.find_first_of("/\\ ") != std::string::npos) {
    bad("scenario name must be a non-empty word");
  }
  try {
    (void)flow();
  } catch (const Error& e) {
    bad(e.what());
  }
  if (n_points < 16) bad("grid.n_points must be at least 16");
  if (!(kernel.dk > 0.0) || !(kernel.k_max >= kernel.dk) || !on_grid(kernel.k_max, kernel.dk)) {
    bad("grid.k_max must be a positive multiple of grid.dk");
  }
  try {
    evolution.validate();
  } catch (const Error& e) {
    bad(e.what());
  }
  auto check_k = [&](double k, const std::string& what) {
    if (!on_grid(k, kernel.dk) || std::abs(k) > kernel.k_max + 1e-12) {
      bad(what + " " + num(k) + " is not on the wavenumber grid");
    }
  };
  std::set<std::string> labels;
  for (const InitialCondition& ic : runs) {
    if (ic.label.empty() || ic.label.find_first_of("/\\ ") != std::string::npos) bad("run labels must be words");
    if (!labels.insert(ic.label).second) bad("duplicate run label " + ic.label);
    if (ic.uniform < 0.0 || ic.background < 0.0) bad("densities must be non-negative");
    if (ic.uniform > 0.0 && !ic.seeds.empty()) bad("a run takes seeds or a uniform density, not both");
    for (const SeedSpec& s : ic.seeds) {
      check_k(s.k, "seed");
      if (s.density < 0.0) bad("seed densities must be non-negative");
    }
  }
  for (const SelectionGroup& g : selection) {
    if (g.background < 0.0) bad("selection background must be non-negative");
    for (double k : g.seeds) check_k(k, "selection seed");
  }
  for (double k : torque_k) check_k(k, "torque wavenumber");
  if (selection_density < 0.0 || torque_density < 0.0 || sweep_density < 0.0 || torque_background < 0.0) {
    bad("densities must be non-negative");
  }
  for (double k : sweep_envelope) check_k(k, "envelope seed");
  if (threads < 0) bad("threads must be non-negative");
  switch (kind) {
    case ScenarioKind::Evolve:
      if (runs.empty()) bad("an evolve scenario needs at least one run");
      break;
    case ScenarioKind::Selection:
      if (selection.empty()) bad("a selection scenario needs selection groups");
      break;
    case ScenarioKind::Torque:
      if (torque_k.empty()) bad("a torque scenario needs torque.k_f");
      break;
    case ScenarioKind::TorqueSweep:
      if (sweep_reynolds.empty()) bad("a torque sweep needs sweep.reynolds");
      check_k(sweep_seed_k, "sweep seed");
      for (double R : sweep_reynolds) {
        if (!(R > 0.0)) bad("sweep Reynolds numbers must be positive");
      }
      break;
    case ScenarioKind::Landau:
      break;
  }
}

RunConfig parse_config(const std::string& yaml) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml);
  } catch (const YAML::Exception& e) {
    bad(e.what());
  }
  if (!root || root.IsNull()) bad("empty configuration");
  RunConfig c = from_node(root);
  c.validate();
  return c;
}

RunConfig load_config(const fs::path& file) {
  std::ifstream is(file);
  if (!is) fail(ErrorKind::Config, "cannot open config " + file.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const RunConfig& c) {
  YAML::Emitter e;
  emit_config(e, c, true);
  return std::string(e.c_str()) + "\n";
}

std::vector<std::string> preset_names() {
  return {"fig1", "fig2", "fig3", "fig4", "fig5a", "fig5b", "fig6", "fig7", "table1", "broadband"};
}

RunConfig preset(const std::string& name) {
  constexpr double kNoise = 1e-5;
  RunConfig c;
  if (name == "fig1") {
    c.scenario = name;
    c.kind = ScenarioKind::Landau;
  } else if (name == "fig2") {
    c = evolve_preset(name, {seeded("k3", {{3.0, 0.125}})}, 60.0);
  } else if (name == "fig3") {
    c = evolve_preset(name, {seeded("k2", {{2.0, 0.1}}, kNoise)}, 60.0);
  } else if (name == "fig4") {
    c.scenario = name;
    c.kind = ScenarioKind::Selection;
    c.selection_density = 0.1;
    c.selection = {{kNoise, range(1.75, 5.5, 0.25)}, {0.0, {5.25, 5.5}}};
    c.evolution.t_max = 60.0;
  } else if (name == "fig5a") {
    c = evolve_preset(name, {seeded("pair", {{3.25, 0.2}, {3.75, 0.2}})}, 60.0);
  } else if (name == "fig5b") {
    c = evolve_preset(name, {seeded("pair", {{3.25, 0.1}, {3.75, 0.2}})}, 60.0);
  } else if (name == "fig6") {
    c = evolve_preset(name,
                      {seeded("d0.1", {{0.75, 0.1}}), seeded("d0.05", {{0.75, 0.05}}),
                       seeded("d0.01", {{0.75, 0.01}})},
                      60.0);
  } else if (name == "fig7") {
    c.scenario = name;
    c.kind = ScenarioKind::TorqueSweep;
    c.sweep_reynolds = {69.0, 72.0, 76.0, 80.0, 84.0, 88.1};
    c.sweep_seed_k = 3.25;
    c.sweep_density = 0.1;
    c.sweep_envelope = range(2.75, 5.0, 0.25);
    c.evolution.t_max = 60.0;
  } else if (name == "table1") {
    c.scenario = name;
    c.kind = ScenarioKind::Torque;
    c.torque_k = range(2.75, 5.0, 0.25);
    c.torque_density = 0.1;
    c.evolution.t_max = 60.0;
  } else if (name == "broadband") {
    c = evolve_preset(name, {uniform("u0.01", 0.01), uniform("u0.05", 0.05), uniform("u0.1", 0.1)}, 60.0);
  } else {
    fail(ErrorKind::Config, "unknown preset '" + name + "'");
  }
  c.validate();
  return c;
}

fs::path resolve_cache_dir(const RunConfig& c) {
  if (const char* env = std::getenv("COUETTE_SPECTRUM_CACHE"); env && *env) return env;
  if (!c.cache_dir.empty()) return c.cache_dir;
  if (const char* xdg = std::getenv("XDG_CACHE_HOME"); xdg && *xdg) return fs::path(xdg) / "couette-spectrum";
  if (const char* home = std::getenv("HOME"); home && *home) return fs::path(home) / ".cache" / "couette-spectrum";
  return ".couette-cache";
}

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::Config:
    case ErrorKind::Domain:
      return 2;
    case ErrorKind::Numerical:
    case ErrorKind::Regime:
      return 3;
    case ErrorKind::Dependency:
    case ErrorKind::Cache:
      return 4;
  }
  return 1;
}

RunOutcome run_scenario(const RunConfig& c, const fs::path& resume) {
  RunOutcome out;
  json man;
  const auto t0 = std::chrono::steady_clock::now();
  std::string hash;
  try {
    hash = c.hash();
  } catch (const std::exception& e) {
    out.exit_code = 2;
    out.error = e.what();
    return out;
  }
  const std::string stem = c.scenario + "-" + hash;
  man["format"] = "couette-spectrum-manifest";
  man["scenario"] = c.scenario;
  man["kind"] = to_string(c.kind);
  man["config_hash"] = hash;
  man["config"] = dump_config(c);
  man["versions"] = {{"library", COUETTE_SPECTRUM_VERSION},
                     {"table_format", KernelTables::kFormatVersion},
                     {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_MINOR)}};
  man["resume"] = resume.empty() ? json(nullptr) : json(resume.string());
  man["tables"] = json::array();
  man["summary"] = json::object();

  const int threads = c.threads > 0 ? c.threads : detail::hardware_threads();
  man["threads"] = threads;
  const fs::path cache = resolve_cache_dir(c);
  man["cache_dir"] = cache.string();
  Ctx x{c, stem, cache, threads, man, out.files};
  try {
    std::error_code ec;
    fs::create_directories(c.out_dir, ec);
    if (ec) fail(ErrorKind::Cache, "cannot create output directory " + c.out_dir.string() + ": " + ec.message());
    c.validate();
    if (!resume.empty() && c.kind != ScenarioKind::Evolve) {
      fail(ErrorKind::Config, "resume applies to evolve scenarios only");
    }
    switch (c.kind) {
      case ScenarioKind::Evolve:
        run_evolve(x, resume);
        break;
      case ScenarioKind::Landau:
        run_landau(x);
        break;
      case ScenarioKind::Selection:
        run_selection(x);
        break;
      case ScenarioKind::Torque:
        run_torque(x);
        break;
      case ScenarioKind::TorqueSweep:
        run_sweep(x);
        break;
    }
    man["status"] = "ok";
  } catch (const Error& e) {
    out.exit_code = exit_code(e.kind());
    out.error = e.what();
    man["status"] = "error";
    man["error"] = {{"kind", to_string(e.kind())}, {"message", e.what()}, {"exit_code", out.exit_code}};
  } catch (const std::exception& e) {
    out.exit_code = 1;
    out.error = e.what();
    man["status"] = "error";
    man["error"] = {{"kind", "internal"}, {"message", e.what()}, {"exit_code", 1}};
  }
  man["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json names = json::array();
  for (const fs::path& f : out.files) names.push_back(f.filename().string());
  man["outputs"] = names;
  out.summary = man["summary"].dump();
  out.manifest = c.out_dir / (stem + "-manifest.json");
  try {
    write_file(out.manifest, man.dump(2) + "\n");
  } catch (const Error& e) {
    if (out.exit_code == 0) {
      out.exit_code = exit_code(e.kind());
      out.error = e.what();
    }
    out.manifest.clear();
  }
  return out;
}

CacheOutcome build_cache(const RunConfig& c) {
  CacheOutcome out;
  try {
    c.validate();
    const fs::path cache = resolve_cache_dir(c);
    KernelOptions o = c.kernel;
    o.threads = c.threads > 0 ? c.threads : detail::hardware_threads();
    std::vector<double> rs = c.kind == ScenarioKind::TorqueSweep ? c.sweep_reynolds : std::vector<double>{c.reynolds};
    out.cache_hit = true;
    for (double R : rs) {
      TableBuildInfo info;
      cached_tables(FlowConfig::make(c.eta, c.mu, R), c.n_points, o, cache, c.force_rebuild, &info);
      out.cache_hit = out.cache_hit && info.cache_hit;
      out.files.push_back(info.file);
    }
  } catch (const Error& e) {
    out.exit_code = exit_code(e.kind());
    out.error = e.what();
  } catch (const std::exception& e) {
    out.exit_code = 1;
    out.error = e.what();
  }
  return out;
}

}  // namespace couette

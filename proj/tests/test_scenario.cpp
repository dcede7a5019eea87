#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "couette/couette.h"
#include "couette/scenario.hpp"
#include "oracles.hpp"

using namespace couette;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CacheEnv {
  CacheEnv() { setenv("COUETTE_SPECTRUM_CACHE", oracle::cache_dir().c_str(), 1); }
};
const CacheEnv cache_env;

fs::path scratch(const std::string& name) {
  const fs::path p = oracle::cache_dir().parent_path() / "scenario-out" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

RunConfig short_evolve(double t_max) {
  RunConfig c;
  c.scenario = "short";
  c.n_points = 32;
  c.kernel.k_max = 3.0;
  c.evolution.t_max = t_max;
  c.evolution.equil_tol = 1e-14;
  c.evolution.sample_every = 50;
  InitialCondition ic;
  ic.label = "two";
  ic.seeds = {{2.0, 0.1, 0.0}, {1.5, 0.05, 0.0}};
  ic.background = 1e-4;
  c.runs = {ic};
  return c;
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

}  // namespace

TEST_CASE("YAML round trip is a fixed point for every preset") {
  for (const std::string& name : preset_names()) {
    CAPTURE(name);
    const RunConfig c = preset(name);
    CHECK_NOTHROW(c.validate());
    const std::string y = dump_config(c);
    const RunConfig back = parse_config(y);
    CHECK(dump_config(back) == y);
    CHECK(back.hash() == c.hash());
  }
  CHECK_THROWS_AS(preset("fig9"), Error);
}

TEST_CASE("shipped config files match their presets") {
  const fs::path dir = COUETTE_CONFIG_DIR;
  for (const std::string& name : preset_names()) {
    CAPTURE(name);
    const fs::path f = dir / (name + ".yaml");
    REQUIRE(fs::exists(f));
    CHECK(load_config(f).hash() == preset(name).hash());
  }
}

TEST_CASE("config errors") {
  const std::string good = dump_config(short_evolve(1.0));
  CHECK_NOTHROW(parse_config(good));
  try {
    parse_config(good + "bogus: 1\n");
    FAIL("unknown key accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
    CHECK(exit_code(e.kind()) == 2);
  }
  RunConfig off = short_evolve(1.0);
  off.runs[0].seeds[0].k = 2.1;
  CHECK_THROWS_AS(off.validate(), Error);
  RunConfig neg = short_evolve(1.0);
  neg.runs[0].seeds[0].density = -1.0;
  CHECK_THROWS_AS(neg.validate(), Error);
  CHECK_THROWS_AS(parse_config("flow: [1, 2"), Error);

  RunConfig out_only = short_evolve(1.0);
  out_only.out_dir = "elsewhere";
  out_only.threads = 3;
  CHECK(out_only.hash() == short_evolve(1.0).hash());
  RunConfig other = short_evolve(1.0);
  other.reynolds = 80.0;
  CHECK(other.hash() != short_evolve(1.0).hash());

  CHECK(exit_code(ErrorKind::Numerical) == 3);
  CHECK(exit_code(ErrorKind::Cache) == 4);
}

TEST_CASE("cache directory precedence") {
  RunConfig c;
  c.cache_dir = "/tmp/from-config";
  CHECK(resolve_cache_dir(c) == oracle::cache_dir());
  unsetenv("COUETTE_SPECTRUM_CACHE");
  CHECK(resolve_cache_dir(c) == fs::path("/tmp/from-config"));
  c.cache_dir.clear();
  setenv("XDG_CACHE_HOME", "/tmp/xdg", 1);
  CHECK(resolve_cache_dir(c) == fs::path("/tmp/xdg/couette-spectrum"));
  setenv("COUETTE_SPECTRUM_CACHE", oracle::cache_dir().c_str(), 1);
}

TEST_CASE("evolve outputs are named by hash and deterministic") {
  RunConfig c = short_evolve(2.0);
  c.out_dir = scratch("det-a");
  const RunOutcome a = run_scenario(c);
  REQUIRE(a.exit_code == 0);
  c.out_dir = scratch("det-b");
  const RunOutcome b = run_scenario(c);
  REQUIRE(b.exit_code == 0);
  REQUIRE(a.files.size() == b.files.size());
  for (std::size_t i = 0; i < a.files.size(); ++i) {
    const std::string name = a.files[i].filename().string();
    CAPTURE(name);
    CHECK(name.find("short-" + c.hash()) == 0);
    CHECK(slurp(a.files[i]) == slurp(b.files[i]));
  }
  const json m = read_json(a.manifest);
  CHECK(m["status"] == "ok");
  CHECK(m["config_hash"] == c.hash());
  CHECK(m["tables"][0]["cache_hit"] == true);
  CHECK(m["outputs"].size() == a.files.size());
  CHECK(parse_config(m["config"].get<std::string>()).hash() == c.hash());
  CHECK(json::parse(a.summary)["runs"][0]["label"] == "two");
}

TEST_CASE("resumed run matches an uninterrupted one") {
  RunConfig full = short_evolve(10.0);
  full.out_dir = scratch("resume-full");
  const RunOutcome f = run_scenario(full);
  REQUIRE(f.exit_code == 0);

  RunConfig half = short_evolve(5.0);
  half.out_dir = scratch("resume-half");
  const RunOutcome h = run_scenario(half);
  REQUIRE(h.exit_code == 0);
  const fs::path snap = half.out_dir / ("short-" + half.hash() + "-two-snapshot.json");
  REQUIRE(fs::exists(snap));

  RunConfig rest = short_evolve(10.0);
  rest.out_dir = scratch("resume-rest");
  const RunOutcome r = run_scenario(rest, snap);
  REQUIRE(r.exit_code == 0);
  const json ef = read_json(full.out_dir / ("short-" + full.hash() + "-two-equilibrium.json"));
  const json er = read_json(rest.out_dir / ("short-" + rest.hash() + "-two-equilibrium.json"));
  CHECK(ef["t"].get<double>() == doctest::Approx(er["t"].get<double>()).epsilon(1e-12));
  const auto af = ef["amplitudes"].get<std::vector<double>>();
  const auto ar = er["amplitudes"].get<std::vector<double>>();
  REQUIRE(af.size() == ar.size());
  for (std::size_t i = 0; i < af.size(); ++i) CHECK(ar[i] == doctest::Approx(af[i]).epsilon(1e-12).scale(1e-3));
  CHECK(read_json(r.manifest)["resume"] == snap.string());

  // a snapshot from different tables is refused before anything is written
  RunConfig other = short_evolve(10.0);
  other.reynolds = 80.0;
  other.out_dir = scratch("resume-mismatch");
  const RunOutcome bad = run_scenario(other, snap);
  CHECK(bad.exit_code == 4);
  CHECK(bad.files.empty());
  CHECK(read_json(bad.manifest)["status"] == "error");

  RunConfig multi = preset("fig6");
  multi.out_dir = scratch("resume-multi");
  CHECK(run_scenario(multi, snap).exit_code == 2);
}

TEST_CASE("build_cache finds existing tables and rebuilds on request") {
  RunConfig c = short_evolve(1.0);
  c.kernel.k_max = 1.0;
  c.n_points = 24;
  c.runs[0].seeds = {{0.5, 0.1, 0.0}};
  const fs::path dir = scratch("cache");
  c.cache_dir = dir;
  unsetenv("COUETTE_SPECTRUM_CACHE");
  const CacheOutcome first = build_cache(c);
  INFO(first.error);
  REQUIRE(first.exit_code == 0);
  CHECK_FALSE(first.cache_hit);
  REQUIRE(first.files.size() == 1);
  CHECK(fs::exists(first.files[0]));
  const CacheOutcome second = build_cache(c);
  CHECK(second.cache_hit);
  c.force_rebuild = true;
  CHECK_FALSE(build_cache(c).cache_hit);
  c.force_rebuild = false;
  c.reynolds = -1.0;
  CHECK(build_cache(c).exit_code == 2);
  setenv("COUETTE_SPECTRUM_CACHE", oracle::cache_dir().c_str(), 1);
}

TEST_CASE("C API") {
  CHECK(std::string(cs_version()).size() > 0);
  REQUIRE(cs_preset_count() == preset_names().size());
  CHECK(std::string(cs_preset_name(0)) == preset_names()[0]);
  CHECK(cs_preset_name(cs_preset_count()) == nullptr);

  cs_config* cfg = nullptr;
  CHECK(cs_config_from_preset("nope", &cfg) == CS_ERR_CONFIG);
  CHECK(std::string(cs_last_error()).size() > 0);
  CHECK(cs_config_from_string("grid: {n_points: -3}\n", &cfg) == CS_ERR_CONFIG);

  const std::string yaml = dump_config(short_evolve(1.0));
  REQUIRE(cs_config_from_string(yaml.c_str(), &cfg) == CS_OK);
  CHECK(std::string(cs_config_hash(cfg)) == short_evolve(1.0).hash());
  CHECK(std::string(cs_config_yaml(cfg)) == yaml);
  CHECK(cs_config_set_threads(cfg, -1) == CS_ERR_CONFIG);
  CHECK(cs_config_set_t_max(cfg, -1.0) == CS_ERR_CONFIG);
  const fs::path out = scratch("capi");
  REQUIRE(cs_config_set_output_dir(cfg, out.c_str()) == CS_OK);
  cs_result* res = nullptr;
  REQUIRE(cs_run(cfg, nullptr, &res) == CS_OK);
  REQUIRE(res != nullptr);
  CHECK(fs::exists(cs_result_manifest(res)));
  CHECK(cs_result_file_count(res) == 4);
  CHECK(json::parse(cs_result_summary(res))["runs"].size() == 1);
  cs_result_free(res);

  // failed runs still report their manifest
  REQUIRE(cs_run(cfg, (out / "missing.json").c_str(), &res) == CS_ERR_CACHE);
  REQUIRE(res != nullptr);
  CHECK(read_json(cs_result_manifest(res))["status"] == "error");
  cs_result_free(res);
  cs_config_free(cfg);

  double sigma = 0.0, R = 0.0, k = 0.0, E = 0.0;
  REQUIRE(cs_growth_rate(0.5, 0.0, 88.1, 3.0, 32, &sigma) == CS_OK);
  CHECK(sigma == doctest::Approx(leading_eigenvalue(oracle::flow88(), oracle::grid48(), 3.0)).epsilon(1e-6));
  CHECK(cs_growth_rate(1.5, 0.0, 88.1, 3.0, 32, &sigma) == CS_ERR_CONFIG);
  CHECK(cs_growth_rate(0.5, 0.0, 88.1, 3.0, 32, nullptr) == CS_ERR_CONFIG);
  REQUIRE(cs_critical_point(0.5, 0.0, 32, &R, &k) == CS_OK);
  CHECK(R == doctest::Approx(68.19).epsilon(0.01));
  REQUIRE(cs_base_kinetic_energy(0.5, 0.0, &E) == CS_OK);
  CHECK(E == doctest::Approx(couette_base_kinetic_energy(oracle::flow88())));
}

TEST_CASE("command-line exit codes") {
  const std::string cli = COUETTE_CLI;
  auto rc = [&](const std::string& args) {
    const int s = std::system((cli + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  CHECK(rc("presets") == 0);
  CHECK(rc("show --preset fig2") == 0);
  CHECK(rc("show --preset fig9") == 2);
  CHECK(rc("run") == 2);
  CHECK(rc("run --bogus") == 2);
  CHECK(rc("frobnicate") == 2);

  const fs::path dir = scratch("cli");
  const fs::path cfg = dir / "short.yaml";
  RunConfig c = short_evolve(1.0);
  std::ofstream(cfg) << dump_config(c);
  CHECK(rc("run --config " + cfg.string() + " --out " + (dir / "o").string()) == 0);
  CHECK(fs::exists(dir / "o" / ("short-" + c.hash() + "-manifest.json")));
  CHECK(rc("run --config " + cfg.string() + " --out " + (dir / "o").string() + " --t-max -2") == 2);

  RunConfig tiny = c;
  tiny.evolution.picard_tol = 1e-30;
  tiny.evolution.picard_max = 1;
  std::ofstream(dir / "blowup.yaml") << dump_config(tiny);
  CHECK(rc("run --config " + (dir / "blowup.yaml").string() + " --out " + (dir / "b").string()) == 3);
}

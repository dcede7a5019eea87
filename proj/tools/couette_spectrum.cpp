#include <CLI11.hpp>
#include <cstdio>
#include <string>

#include "couette/couette.h"

namespace {

struct ConfigHandle {
  cs_config* p = nullptr;
  ~ConfigHandle() { cs_config_free(p); }
};

int report(cs_status st) {
  if (st != CS_OK) std::fprintf(stderr, "error: %s\n", cs_last_error());
  return static_cast<int>(st);
}

cs_status load(const std::string& config, const std::string& preset, ConfigHandle& h) {
  if (!config.empty()) return cs_config_from_file(config.c_str(), &h.p);
  return cs_config_from_preset(preset.c_str(), &h.p);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continuous-spectrum weakly nonlinear Taylor-Couette runs"};
  app.set_version_flag("--version", std::string(cs_version()));
  app.require_subcommand(1);

  std::string config, preset, out, resume, cache_dir;
  bool force = false;
  int threads = 0;
  double t_max = 0.0;

  auto source = [&](CLI::App* sub) {
    auto* c = sub->add_option("--config", config, "YAML run configuration")->check(CLI::ExistingFile);
    auto* p = sub->add_option("--preset", preset, "named preset (see `presets`)");
    c->excludes(p);
    p->excludes(c);
    sub->add_option("--cache-dir", cache_dir, "kernel cache directory (COUETTE_SPECTRUM_CACHE wins)");
    sub->add_flag("--force-rebuild", force, "rebuild kernel tables even on a hash match");
    sub->add_option("--threads", threads, "worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
  };

  auto* run = app.add_subcommand("run", "run a scenario and write its outputs");
  source(run);
  run->add_option("--out", out, "output directory");
  run->add_option("--resume", resume, "continue from a snapshot")->check(CLI::ExistingFile);
  run->add_option("--t-max", t_max, "override the evolution horizon")->check(CLI::PositiveNumber);

  auto* cache = app.add_subcommand("build-cache", "build the kernel tables a scenario needs");
  source(cache);

  auto* presets = app.add_subcommand("presets", "list presets");
  auto* show = app.add_subcommand("show", "print the YAML of a preset or config");
  source(show);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : CS_ERR_CONFIG;
  }

  if (presets->parsed()) {
    for (size_t i = 0; i < cs_preset_count(); ++i) std::printf("%s\n", cs_preset_name(i));
    return 0;
  }
  if (config.empty() && preset.empty()) {
    std::fprintf(stderr, "error: one of --config or --preset is required\n");
    return CS_ERR_CONFIG;
  }

  ConfigHandle h;
  if (cs_status st = load(config, preset, h); st != CS_OK) return report(st);
  if (!cache_dir.empty()) cs_config_set_cache_dir(h.p, cache_dir.c_str());
  if (force) cs_config_set_force_rebuild(h.p, 1);
  if (threads > 0) cs_config_set_threads(h.p, threads);

  if (show->parsed()) {
    std::fputs(cs_config_yaml(h.p), stdout);
    return 0;
  }

  if (cache->parsed()) {
    int hit = 0;
    const cs_status st = cs_build_cache(h.p, &hit);
    if (st == CS_OK) std::printf("%s\n", hit ? "cache hit" : "tables built");
    return report(st);
  }

  if (!out.empty()) cs_config_set_output_dir(h.p, out.c_str());
  if (t_max > 0.0) {
    if (cs_status st = cs_config_set_t_max(h.p, t_max); st != CS_OK) return report(st);
  }
  cs_result* res = nullptr;
  const cs_status st = cs_run(h.p, resume.empty() ? nullptr : resume.c_str(), &res);
  if (res) {
    if (*cs_result_manifest(res)) std::printf("manifest: %s\n", cs_result_manifest(res));
    if (st == CS_OK) std::printf("%s\n", cs_result_summary(res));
    cs_result_free(res);
  }
  return report(st);
}

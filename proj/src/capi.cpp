#include "couette/couette.h"

#include <string>

#include "couette/linear_stability.hpp"
#include "couette/scenario.hpp"

#ifndef COUETTE_SPECTRUM_VERSION
#define COUETTE_SPECTRUM_VERSION "unknown"
#endif

struct cs_config {
  couette::RunConfig cfg;
  std::string yaml;
  std::string hash;
};

struct cs_result {
  std::string manifest;
  std::string summary;
  std::vector<std::string> files;
};

namespace {

thread_local std::string last_error;

cs_status status_of(int code) {
  switch (code) {
    case 0:
      return CS_OK;
    case 2:
      return CS_ERR_CONFIG;
    case 3:
      return CS_ERR_NUMERICAL;
    case 4:
      return CS_ERR_CACHE;
    default:
      return CS_ERR_INTERNAL;
  }
}

template <class F>
cs_status guard(F&& f) {
  try {
    last_error.clear();
    f();
    return CS_OK;
  } catch (const couette::Error& e) {
    last_error = e.what();
    return status_of(couette::exit_code(e.kind()));
  } catch (const std::exception& e) {
    last_error = e.what();
    return CS_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return CS_ERR_INTERNAL;
  }
}

cs_status null_arg(const char* what) {
  last_error = std::string("null argument: ") + what;
  return CS_ERR_CONFIG;
}

const std::vector<std::string>& presets() {
  static const std::vector<std::string> names = couette::preset_names();
  return names;
}

}  // namespace

extern "C" {

const char* cs_version(void) { return COUETTE_SPECTRUM_VERSION; }

const char* cs_last_error(void) { return last_error.c_str(); }

size_t cs_preset_count(void) { return presets().size(); }

const char* cs_preset_name(size_t i) { return i < presets().size() ? presets()[i].c_str() : nullptr; }

cs_status cs_config_from_preset(const char* name, cs_config** out) {
  if (!name || !out) return null_arg("name/out");
  return guard([&] { *out = new cs_config{couette::preset(name), {}, {}}; });
}

cs_status cs_config_from_file(const char* path, cs_config** out) {
  if (!path || !out) return null_arg("path/out");
  return guard([&] { *out = new cs_config{couette::load_config(path), {}, {}}; });
}

cs_status cs_config_from_string(const char* yaml, cs_config** out) {
  if (!yaml || !out) return null_arg("yaml/out");
  return guard([&] { *out = new cs_config{couette::parse_config(yaml), {}, {}}; });
}

void cs_config_free(cs_config* cfg) { delete cfg; }

cs_status cs_config_set_output_dir(cs_config* cfg, const char* dir) {
  if (!cfg || !dir) return null_arg("cfg/dir");
  cfg->cfg.out_dir = dir;
  return CS_OK;
}

cs_status cs_config_set_cache_dir(cs_config* cfg, const char* dir) {
  if (!cfg || !dir) return null_arg("cfg/dir");
  cfg->cfg.cache_dir = dir;
  return CS_OK;
}

cs_status cs_config_set_threads(cs_config* cfg, int threads) {
  if (!cfg) return null_arg("cfg");
  if (threads < 0) {
    last_error = "threads must be non-negative";
    return CS_ERR_CONFIG;
  }
  cfg->cfg.threads = threads;
  return CS_OK;
}

cs_status cs_config_set_force_rebuild(cs_config* cfg, int force) {
  if (!cfg) return null_arg("cfg");
  cfg->cfg.force_rebuild = force != 0;
  return CS_OK;
}

cs_status cs_config_set_t_max(cs_config* cfg, double t_max) {
  if (!cfg) return null_arg("cfg");
  return guard([&] {
    couette::RunConfig c = cfg->cfg;
    c.evolution.t_max = t_max;
    c.validate();
    cfg->cfg = c;
  });
}

const char* cs_config_yaml(cs_config* cfg) {
  if (!cfg) return nullptr;
  cfg->yaml = couette::dump_config(cfg->cfg);
  return cfg->yaml.c_str();
}

const char* cs_config_hash(cs_config* cfg) {
  if (!cfg) return nullptr;
  cfg->hash = cfg->cfg.hash();
  return cfg->hash.c_str();
}

cs_status cs_run(const cs_config* cfg, const char* resume_snapshot, cs_result** out) {
  if (!cfg || !out) return null_arg("cfg/out");
  *out = nullptr;
  couette::RunOutcome r;
  const cs_status st = guard([&] {
    r = couette::run_scenario(cfg->cfg, resume_snapshot ? std::filesystem::path(resume_snapshot)
                                                        : std::filesystem::path());
    auto* res = new cs_result{r.manifest.string(), r.summary, {}};
    for (const auto& f : r.files) res->files.push_back(f.string());
    *out = res;
  });
  if (st != CS_OK) return st;
  last_error = r.error;
  return status_of(r.exit_code);
}

const char* cs_result_manifest(const cs_result* r) { return r ? r->manifest.c_str() : nullptr; }

const char* cs_result_summary(const cs_result* r) { return r ? r->summary.c_str() : nullptr; }

size_t cs_result_file_count(const cs_result* r) { return r ? r->files.size() : 0; }

const char* cs_result_file(const cs_result* r, size_t i) {
  return r && i < r->files.size() ? r->files[i].c_str() : nullptr;
}

void cs_result_free(cs_result* r) { delete r; }

cs_status cs_build_cache(const cs_config* cfg, int* cache_hit) {
  if (!cfg) return null_arg("cfg");
  couette::CacheOutcome r;
  const cs_status st = guard([&] { r = couette::build_cache(cfg->cfg); });
  if (st != CS_OK) return st;
  if (cache_hit) *cache_hit = r.cache_hit ? 1 : 0;
  last_error = r.error;
  return status_of(r.exit_code);
}

cs_status cs_growth_rate(double eta, double mu, double reynolds, double k, int n_points, double* sigma) {
  if (!sigma) return null_arg("sigma");
  return guard([&] {
    const auto cfg = couette::FlowConfig::make(eta, mu, reynolds);
    *sigma = couette::leading_eigenvalue(cfg, couette::build_grid(n_points, cfg.r_inner, cfg.r_outer), k);
  });
}

cs_status cs_critical_point(double eta, double mu, int n_points, double* reynolds, double* k) {
  if (!reynolds || !k) return null_arg("reynolds/k");
  return guard([&] {
    const auto cfg = couette::FlowConfig::make(eta, mu, 1.0);
    const couette::CriticalPoint cp =
        couette::critical_point(eta, mu, couette::build_grid(n_points, cfg.r_inner, cfg.r_outer));
    *reynolds = cp.reynolds;
    *k = cp.k;
  });
}

cs_status cs_base_kinetic_energy(double eta, double mu, double* energy) {
  if (!energy) return null_arg("energy");
  return guard([&] { *energy = couette::couette_base_kinetic_energy(couette::FlowConfig::make(eta, mu, 1.0)); });
}

}  // extern "C"

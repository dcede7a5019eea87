#ifndef COUETTE_COUETTE_H
#define COUETTE_COUETTE_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  CS_OK = 0,
  CS_ERR_INTERNAL = 1,
  CS_ERR_CONFIG = 2,
  CS_ERR_NUMERICAL = 3,
  CS_ERR_CACHE = 4
} cs_status;

typedef struct cs_config cs_config;
typedef struct cs_result cs_result;

const char* cs_version(void);

/* Message of the last failed call on this thread; empty after success. */
const char* cs_last_error(void);

size_t cs_preset_count(void);
const char* cs_preset_name(size_t i);

cs_status cs_config_from_preset(const char* name, cs_config** out);
cs_status cs_config_from_file(const char* path, cs_config** out);
cs_status cs_config_from_string(const char* yaml, cs_config** out);
void cs_config_free(cs_config* cfg);

cs_status cs_config_set_output_dir(cs_config* cfg, const char* dir);
cs_status cs_config_set_cache_dir(cs_config* cfg, const char* dir);
cs_status cs_config_set_threads(cs_config* cfg, int threads);
cs_status cs_config_set_force_rebuild(cs_config* cfg, int force);
cs_status cs_config_set_t_max(cs_config* cfg, double t_max);

/* YAML text of the configuration; owned by cfg, valid until the next call on it. */
const char* cs_config_yaml(cs_config* cfg);
/* Short hash that appears in every output file name. */
const char* cs_config_hash(cs_config* cfg);

/* Runs the scenario. resume_snapshot may be NULL. *out is set whenever a
   result exists, including failed runs that wrote a manifest. */
cs_status cs_run(const cs_config* cfg, const char* resume_snapshot, cs_result** out);
const char* cs_result_manifest(const cs_result* r);
const char* cs_result_summary(const cs_result* r);
size_t cs_result_file_count(const cs_result* r);
const char* cs_result_file(const cs_result* r, size_t i);
void cs_result_free(cs_result* r);

/* Builds the kernel tables the scenario needs; *cache_hit is 1 when nothing
   was recomputed. */
cs_status cs_build_cache(const cs_config* cfg, int* cache_hit);

cs_status cs_growth_rate(double eta, double mu, double reynolds, double k, int n_points, double* sigma);
cs_status cs_critical_point(double eta, double mu, int n_points, double* reynolds, double* k);
cs_status cs_base_kinetic_energy(double eta, double mu, double* energy);

#ifdef __cplusplus
}
#endif

#endif

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "couette/diagnostics.hpp"
#include "couette/error.hpp"

namespace couette {

enum class ScenarioKind { Evolve, Landau, Selection, Torque, TorqueSweep };

std::string to_string(ScenarioKind k);
ScenarioKind scenario_kind_from_string(const std::string& s);

struct SeedSpec {
  double k = 0.0;
  double density = 0.0;
  double phase = 0.0;  // radians
};

struct InitialCondition {
  std::string label = "main";
  std::vector<SeedSpec> seeds;
  double uniform = 0.0;  // density on every k != 0 when > 0
  bool include_zero = false;
  double background = 0.0;  // density on every other k != 0
};

struct SelectionGroup {
  double background = 0.0;
  std::vector<double> seeds;
};

struct RunConfig {
  std::string scenario = "custom";
  ScenarioKind kind = ScenarioKind::Evolve;

  double eta = 0.5;
  double mu = 0.0;
  double reynolds = 88.1;

  int n_points = 48;
  KernelOptions kernel;
  EvolutionParams evolution;

  std::vector<InitialCondition> runs;

  double selection_density = 0.1;
  std::vector<SelectionGroup> selection;

  std::vector<double> torque_k;
  double torque_density = 0.1;
  double torque_background = 0.0;

  std::vector<double> sweep_reynolds;
  double sweep_seed_k = 3.25;
  double sweep_density = 0.1;
  std::vector<double> sweep_envelope;

  std::filesystem::path out_dir = "out";
  std::filesystem::path cache_dir;  // empty: environment or default
  bool force_rebuild = false;
  int threads = 0;  // 0: hardware concurrency

  FlowConfig flow() const;
  /// Hash of everything that affects results (output section excluded).
  std::string hash() const;
  /// Throws Config on invalid combinations.
  void validate() const;
};

RunConfig parse_config(const std::string& yaml);
RunConfig load_config(const std::filesystem::path& file);
std::string dump_config(const RunConfig& c);

std::vector<std::string> preset_names();
RunConfig preset(const std::string& name);

/// COUETTE_SPECTRUM_CACHE, then the config value, then XDG_CACHE_HOME or
/// ~/.cache, then ./.couette-cache.
std::filesystem::path resolve_cache_dir(const RunConfig& c);

int exit_code(ErrorKind k);

struct RunOutcome {
  int exit_code = 0;
  std::filesystem::path manifest;
  std::vector<std::filesystem::path> files;
  std::string summary;  // JSON
  std::string error;
};

/// Runs the scenario and writes its files into c.out_dir. Never throws; errors
/// are recorded in the manifest and the outcome.
RunOutcome run_scenario(const RunConfig& c, const std::filesystem::path& resume = {});

struct CacheOutcome {
  int exit_code = 0;
  bool cache_hit = false;
  std::vector<std::filesystem::path> files;
  std::string error;
};

/// Builds (or finds) every table set the scenario needs.
CacheOutcome build_cache(const RunConfig& c);

}  // namespace couette

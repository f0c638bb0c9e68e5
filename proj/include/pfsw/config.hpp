#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pfsw/filter.hpp"
#include "pfsw/lorenz63.hpp"
#include "pfsw/obs.hpp"
#include "pfsw/srsw.hpp"

namespace pfsw {

enum class ModelKind { lorenz63, srsw };

std::string to_string(ModelKind k);

/// SRSW experiment knobs. Heights and lengths are dimensional (metres);
/// make_params() maps them into the solver's units.
struct SrswSettings {
  SrswPhysical physical;
  bool noise = true;
  /// Pointwise std of the stochastic height field R^p (m).
  double noise_amplitude_m = 200.0;
  /// Gaussian correlation length of R^p (m).
  double noise_correlation_m = 5.0e5;
  /// Strength of the balanced transport velocities relative to the
  /// dynamically consistent g/f scaling (1 = consistent).
  double noise_balance = 0.01;
  /// Height drop across the zonal jet (m) and its half-width (m).
  double jet_amplitude_m = 50.0;
  double jet_width_m = 6.0e5;
  /// Balanced random perturbation added to the truth's initial jet.
  double ic_perturbation_m = 10.0;
  double ic_correlation_m = 1.0e6;
  /// Observed height sites, drawn once from the truth seed.
  std::size_t obs_count = 1;
};

struct ExperimentConfig {
  std::string name = "custom";
  ModelKind model = ModelKind::lorenz63;
  Lorenz63Params lorenz;
  std::vector<double> lorenz_initial{1.508870, -1.531271, 25.46091};
  SrswSettings srsw;
  FilterConfig filter = FilterConfig::defaults_for(50);
  ObsModel obs;
  long steps = 500;
  long assimilation_interval = 20;
  bool assimilate = true;
  /// Lorenz: std of the per-component Gaussian perturbation. SRSW: pointwise
  /// std (m) of the balanced height perturbation of each particle.
  double initial_uncertainty = 1.0;
  std::uint64_t truth_seed = 1;
  std::uint64_t ensemble_seed = 2;
  std::string output_dir = "out";

  void validate() const;
};

/// Parses a config document. Keys mirror the struct fields; missing keys keep
/// their defaults, unknown keys are an error. If `base` is given, it supplies
/// the defaults instead.
ExperimentConfig config_from_json(const std::string& text, const ExperimentConfig* base = nullptr);
std::string config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::string& path, const ExperimentConfig* base = nullptr);

std::vector<ExperimentConfig> scenario_presets();
/// Throws ConfigError for an unknown name.
ExperimentConfig preset(const std::string& name);

}  // namespace pfsw

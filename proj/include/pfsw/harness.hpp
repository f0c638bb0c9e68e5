#pragma once

#include <memory>
#include <string>
#include <vector>

#include "pfsw/config.hpp"
#include "pfsw/core.hpp"
#include "pfsw/filter.hpp"
#include "pfsw/obs.hpp"

namespace pfsw {

/// The model, observation operator and initial state an experiment runs on.
struct Setup {
  std::shared_ptr<const ForwardModel> model;
  ObsModel obs;
  StateVector initial_truth;
  /// Nondimensional initial pressure (SRSW only).
  std::vector<double> initial_pressure;
  /// Entries entering RMSE/ES: all of Lorenz, the h block of SRSW.
  std::size_t metric_offset = 0;
  std::size_t metric_size = 0;
  /// Seconds (SRSW) or model time units (Lorenz) per step.
  double time_per_step = 1.0;
  /// Named state entries written as ensemble bands.
  std::vector<std::pair<std::string, std::size_t>> bands;
};

/// `inner` selects whether a single SRSW step may use threads; ensemble
/// forecasts parallelize over particles instead.
Setup make_setup(const ExperimentConfig& cfg, Execution inner = Execution::serial);

struct Truth {
  /// States at steps 0..steps.
  std::vector<StateVector> states;
  std::vector<Observation> observations;
};

Truth generate_truth(const ExperimentConfig& cfg, const Setup& setup);

Ensemble init_ensemble(const ExperimentConfig& cfg, const Setup& setup);

struct BandRow {
  long step = 0;
  double time = 0.0;
  double truth = 0.0;
  double mean = 0.0;
  double std = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct RunMetrics {
  /// Steps 1..steps.
  std::vector<long> step;
  std::vector<double> time;
  std::vector<double> rmse;
  std::vector<double> es;
  std::vector<TemperingTrace> traces;
  std::vector<std::string> band_names;
  std::vector<std::vector<BandRow>> bands;
  /// Ensemble mean after the last completed step.
  StateVector final_mean;
  std::size_t cfl_warnings = 0;
};

/// sqrt(mean_k (mean_k - truth_k)^2) over [offset, offset + size).
double rmse(const StateVector& mean, const StateVector& truth, std::size_t offset,
            std::size_t size);
/// sqrt(mean_k s_k^2) with s_k^2 the unbiased variance of entry k.
double ensemble_spread(const Ensemble& e, std::size_t offset, std::size_t size);

struct RunResult {
  Truth truth;
  RunMetrics metrics;
};

/// Twin experiment: truth, forecast, assimilation and metrics. When
/// `output_dir` is non-empty the outputs are written there, including partial
/// outputs if the run fails; the failure is then rethrown.
RunResult run_experiment(const ExperimentConfig& cfg, const std::string& output_dir = "");

}  // namespace pfsw

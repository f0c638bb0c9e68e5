#pragma once

#include <string>
#include <vector>

#include "pfsw/filter.hpp"
#include "pfsw/harness.hpp"
#include "pfsw/obs.hpp"
#include "pfsw/srsw.hpp"

namespace pfsw {

// All numbers are written with 17 significant digits so files round-trip and
// are byte-stable for a given run.

/// step,time,rmse,es
void write_metrics_csv(const std::string& path, const RunMetrics& m);
/// step,time,truth,mean,std,mean_minus_std,mean_plus_std,min,max
void write_band_csv(const std::string& path, const std::vector<BandRow>& rows);
/// time_index,z0,z1,...
void write_obs_csv(const std::string& path, const std::vector<Observation>& obs);
/// step,time,x0,x1,...
void write_truth_csv(const std::string& path, const std::vector<StateVector>& states,
                     double time_per_step);
/// [{step, stages:[{delta_phi, phi, ess_pre, ess_post, accept_rate, duplicates, ...}]}]
void write_trace_json(const std::string& path, const std::vector<TemperingTrace>& traces);

/// `<stem>.bin` holds v1, v2, h as little-endian float64; `<stem>.json` the
/// sidecar {nx, ny, dx, dy, time_index}.
void write_snapshot(const std::string& stem, const SrswState& s, const GridSpec& g,
                    long time_index);
SrswState read_snapshot(const std::string& stem, GridSpec* g = nullptr, long* time_index = nullptr);

/// Re-checks a trace.json against the tempering invariants: positive
/// increments, increments telescoping to exactly 1, pre-resample ESS at
/// least ess_threshold - bisection_tol. Returns one message per violation.
std::vector<std::string> check_trace_file(const std::string& path, const FilterConfig& cfg);

/// Everything run_experiment writes, in `dir` (created if missing).
void write_run_outputs(const std::string& dir, const ExperimentConfig& cfg, const Setup& setup,
                       const Truth& truth, const RunMetrics& m);

}  // namespace pfsw

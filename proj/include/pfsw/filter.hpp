#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pfsw/core.hpp"
#include "pfsw/error.hpp"
#include "pfsw/parallel.hpp"
#include "pfsw/rng.hpp"

namespace pfsw {

/// Which particles the MCMC step moves once a resampling has produced
/// duplicates: every particle, or only the duplicated ones.
enum class JitterScope { all, duplicates };

std::string to_string(JitterScope s);
JitterScope jitter_scope_from_string(const std::string& s);

struct FilterConfig {
  std::size_t n_particles = 50;
  /// Absolute ESS count below which a tempering stage is split.
  double ess_threshold = 25.0;
  double jitter_rho = 0.99;
  int mcmc_steps = 5;
  JitterScope jitter_scope = JitterScope::all;
  int max_tempering_iters = 100;
  /// Tolerance on ESS (a particle count) for the temperature bisection.
  double bisection_tol = 0.5;

  /// Threshold N/2, tolerance 0.01 N, five MCMC steps, rho 0.99.
  static FilterConfig defaults_for(std::size_t n);
  void validate() const;
};

struct TemperingStage {
  double delta_phi = 0.0;
  double phi = 0.0;  ///< cumulative temperature after this stage
  double ess_pre = 0.0;
  double ess_post = 0.0;
  std::vector<std::size_t> ancestors;
  std::size_t duplicates = 0;
  std::size_t proposals = 0;
  std::size_t accepted = 0;
  std::size_t failed = 0;  ///< proposals rejected because the model failed
  double accept_rate() const {
    return proposals ? static_cast<double>(accepted) / static_cast<double>(proposals) : 0.0;
  }
};

struct TemperingTrace {
  long step = 0;
  std::vector<TemperingStage> stages;
};

using LogLikelihood = std::function<double(const StateVector&)>;

/// The filter's working set at an assimilation time: current states with
/// their weights, the states at the previous assimilation time, and the noise
/// that carried each anchor to its current state.
struct ParticleSet {
  Ensemble ensemble;
  std::vector<StateVector> anchors;
  std::vector<NoisePath> paths;

  void validate(const ForwardModel& model) const;
};

/// Keys every random draw of one assimilation.
struct FilterRng {
  std::uint64_t seed = 0;
  long step = 0;
};

double ess(std::span<const double> weights);

/// Normalized w ∝ exp(delta_phi * log_lik), via log-sum-exp.
std::vector<double> tempered_weights(std::span<const double> log_lik, double delta_phi);

/// Largest admissible temperature increment from phi_done: the whole
/// remainder 1 - phi_done when its ESS clears the threshold, otherwise the
/// increment whose ESS is within bisection_tol of ess_threshold.
double find_temperature(std::span<const double> log_lik, double phi_done,
                        const FilterConfig& cfg);

/// Systematic resampling; returns sorted ancestor indices.
std::vector<std::size_t> systematic_resample(std::span<const double> weights, RngStream& rng);

/// True for every slot whose ancestor was selected more than once.
std::vector<char> duplicate_flags(std::span<const std::size_t> ancestors);

struct JitterResult {
  std::size_t duplicates = 0;
  std::size_t proposals = 0;
  std::size_t accepted = 0;
  std::size_t failed = 0;
};

/// Metropolis-Hastings rejuvenation of duplicated particles. Each move mixes
/// the stored path with fresh noise (rho), replays it from the anchor and
/// accepts with min(1, exp(phi_cum * (loglik(new) - loglik(old)))).
/// `log_lik` holds the current log-likelihood of every slot and is updated on
/// acceptance. `stage` separates the random streams of successive stages.
JitterResult jitter_mcmc(ParticleSet& set, std::span<const char> duplicate,
                         std::vector<double>& log_lik, const ForwardModel& model,
                         const LogLikelihood& loglik, double phi_cum, const FilterConfig& cfg,
                         const FilterRng& rng, std::size_t stage,
                         Execution ex = Execution::parallel);

/// Full tempering-and-jittering update at one assimilation time. On return
/// the weights are uniform and every stage is recorded in the trace. An empty
/// `loglik` (no observation in the window) is a no-op.
TemperingTrace assimilate(ParticleSet& set, const ForwardModel& model,
                          const LogLikelihood& loglik, const FilterConfig& cfg,
                          const FilterRng& rng, Execution ex = Execution::parallel);

/// Thrown when the tempering loop cannot finish; carries the partial trace.
class TemperingFailure : public DegeneracyError {
 public:
  TemperingFailure(const std::string& what, TemperingTrace trace)
      : DegeneracyError(what), trace_(std::move(trace)) {}
  const TemperingTrace& trace() const { return trace_; }

 private:
  TemperingTrace trace_;
};

}  // namespace pfsw

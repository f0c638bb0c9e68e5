#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "pfsw/core.hpp"
#include "pfsw/filter.hpp"

namespace pfsw {

enum class ObsOperator {
  identity,               ///< H(x) = x
  square_first,           ///< (x0^2, x1, x2, ...)
  square_all,             ///< (x0^2, x1^2, x2^2, ...)
  select,                 ///< listed state entries
};

std::string to_string(ObsOperator op);
ObsOperator obs_operator_from_string(const std::string& name);

struct ObsModel {
  ObsOperator op = ObsOperator::identity;
  double obs_error_std = 1.0;
  /// State indices for ObsOperator::select.
  std::vector<std::size_t> indices;

  /// Observation dimension for a state of dimension d_x.
  std::size_t obs_dim(std::size_t d_x) const;
  void validate(std::size_t d_x) const;
};

struct Observation {
  long time_index = 0;
  std::vector<double> values;
};

std::vector<double> apply_h(const StateVector& x, const ObsModel& m);

Observation synthesize_obs(const StateVector& truth, const ObsModel& m, long time_index,
                           RngStream& rng);

/// Gaussian log density of z given x, normalization constant included.
double log_likelihood(const StateVector& x, const Observation& z, const ObsModel& m);

/// Binds an observation into the filter's likelihood callback.
LogLikelihood make_log_likelihood(Observation z, ObsModel m);

/// Distinct sites drawn without replacement from `candidates` (seeded).
std::vector<std::size_t> choose_sites(const std::vector<std::size_t>& candidates,
                                      std::size_t count, RngStream& rng);

}  // namespace pfsw

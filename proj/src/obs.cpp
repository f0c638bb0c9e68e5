#include "pfsw/obs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "pfsw/error.hpp"

namespace pfsw {

std::string to_string(ObsOperator op) {
  switch (op) {
    case ObsOperator::identity: return "identity";
    case ObsOperator::square_first: return "square_first";
    case ObsOperator::square_all: return "square_all";
    case ObsOperator::select: return "select";
  }
  return "unknown";
}

ObsOperator obs_operator_from_string(const std::string& name) {
  if (name == "identity") return ObsOperator::identity;
  if (name == "square_first") return ObsOperator::square_first;
  if (name == "square_all") return ObsOperator::square_all;
  if (name == "select") return ObsOperator::select;
  throw ConfigError("unknown observation operator '" + name + "'");
}

std::size_t ObsModel::obs_dim(std::size_t d_x) const {
  return op == ObsOperator::select ? indices.size() : d_x;
}

void ObsModel::validate(std::size_t d_x) const {
  require(obs_error_std > 0.0, "obs: obs_error_std must be > 0");
  if (op == ObsOperator::select) {
    require(!indices.empty(), "obs: select operator needs at least one index");
    std::set<std::size_t> seen;
    for (std::size_t i : indices) {
      require(i < d_x, "obs: index out of range");
      require(seen.insert(i).second, "obs: duplicate index");
    }
  }
}

std::vector<double> apply_h(const StateVector& x, const ObsModel& m) {
  switch (m.op) {
    case ObsOperator::identity: return x.values;
    case ObsOperator::square_first: {
      auto out = x.values;
      if (!out.empty()) out[0] *= out[0];
      return out;
    }
    case ObsOperator::square_all: {
      auto out = x.values;
      for (double& v : out) v *= v;
      return out;
    }
    case ObsOperator::select: {
      std::vector<double> out;
      out.reserve(m.indices.size());
      for (std::size_t i : m.indices) {
        if (i >= x.size()) throw ConfigError("obs: index out of range");
        out.push_back(x[i]);
      }
      return out;
    }
  }
  return {};
}

Observation synthesize_obs(const StateVector& truth, const ObsModel& m, long time_index,
                           RngStream& rng) {
  Observation z{time_index, apply_h(truth, m)};
  for (double& v : z.values) v += m.obs_error_std * rng.normal();
  return z;
}

double log_likelihood(const StateVector& x, const Observation& z, const ObsModel& m) {
  const auto hx = apply_h(x, m);
  require(hx.size() == z.values.size(), "obs: observation dimension mismatch");
  std::vector<double> sq(hx.size());
  for (std::size_t i = 0; i < hx.size(); ++i) {
    const double r = z.values[i] - hx[i];
    sq[i] = r * r;
  }
  const double var = m.obs_error_std * m.obs_error_std;
  const double d = static_cast<double>(hx.size());
  return -pairwise_sum(sq) / (2.0 * var) - 0.5 * d * std::log(2.0 * std::numbers::pi * var);
}

LogLikelihood make_log_likelihood(Observation z, ObsModel m) {
  return [z = std::move(z), m = std::move(m)](const StateVector& x) {
    return log_likelihood(x, z, m);
  };
}

std::vector<std::size_t> choose_sites(const std::vector<std::size_t>& candidates,
                                      std::size_t count, RngStream& rng) {
  require(count <= candidates.size(), "obs: more sites requested than candidates");
  // Partial Fisher-Yates.
  auto pool = candidates;
  for (std::size_t i = 0; i < count; ++i) {
    const auto span = pool.size() - i;
    const auto j = i + static_cast<std::size_t>(rng.uniform() * static_cast<double>(span));
    std::swap(pool[i], pool[std::min(j, pool.size() - 1)]);
  }
  pool.resize(count);
  return pool;
}

}  // namespace pfsw

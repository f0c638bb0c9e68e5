#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "pfsw/rng.hpp"

namespace pfsw {

/// Flat real vector with a phantom tag, so a state can never be passed where
/// a noise increment is expected.
template <class Tag>
struct TaggedVector {
  std::vector<double> values;

  TaggedVector() = default;
  explicit TaggedVector(std::size_t n, double fill = 0.0) : values(n, fill) {}
  explicit TaggedVector(std::vector<double> v) : values(std::move(v)) {}
  TaggedVector(std::initializer_list<double> v) : values(v) {}

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  std::span<double> span() { return values; }
  std::span<const double> span() const { return values; }

  bool operator==(const TaggedVector&) const = default;
};

using StateVector = TaggedVector<struct StateTag>;

/// Standard-normal draws consumed by one model step. Layout is owned by the
/// model; the filter only mixes and replays them.
using NoiseIncrement = TaggedVector<struct NoiseTag>;

/// Increments for every model step between two assimilation times.
using NoisePath = std::vector<NoiseIncrement>;

bool all_finite(std::span<const double> v);

struct Ensemble {
  std::vector<StateVector> particles;
  std::vector<double> weights;
  long time_index = 0;

  static Ensemble uniform(std::vector<StateVector> particles, long time_index = 0);

  std::size_t size() const { return particles.size(); }
  std::size_t dim() const { return particles.empty() ? 0 : particles.front().size(); }

  /// Throws ConfigError unless N >= 2, all particles share a dimension, all
  /// entries are finite and the weights are a probability vector (1e-12).
  void validate() const;
};

/// One-step stochastic propagator x_{k+1} = M(x_k, w_k). Implementations
/// must be safe to call concurrently from several threads.
class ForwardModel {
 public:
  virtual ~ForwardModel() = default;

  virtual std::size_t state_dim() const = 0;
  virtual std::size_t noise_dim() const = 0;
  virtual double dt() const = 0;

  /// Deterministic given (x, noise). Throws ModelError on a non-finite or
  /// non-physical result.
  virtual StateVector step(const StateVector& x, const NoiseIncrement& noise) const = 0;
  virtual NoiseIncrement sample_noise(RngStream& rng) const = 0;
};

/// Replays a stored path from an anchor state.
StateVector propagate(const ForwardModel& model, StateVector anchor, const NoisePath& path);

/// Fixed-order pairwise summation. Result depends only on the input order.
double pairwise_sum(std::span<const double> v);

StateVector ensemble_mean(const Ensemble& e);

/// rho * w + sqrt(1 - rho^2) * z, entrywise. Preserves the standard normal
/// law when w and z are independent standard normal.
NoiseIncrement mix_noise(const NoiseIncrement& w, const NoiseIncrement& z, double rho);

}  // namespace pfsw

#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace pfsw {

/// What a stream of random numbers is used for. Part of the stream key, so
/// two purposes never share draws even with equal particle/step indices.
enum class Purpose : std::uint32_t {
  truth_init = 1,
  truth_noise = 2,
  observation = 3,
  ensemble_init = 4,
  forecast = 5,
  resample = 6,
  jitter = 7,
  obs_sites = 8,
  test = 99,
};

struct StreamId {
  std::uint64_t particle = 0;
  std::uint64_t step = 0;
  Purpose purpose = Purpose::test;
  std::uint64_t sub = 0;
};

/// Counter-based keyed random stream. The output sequence depends only on
/// (seed, StreamId), never on which thread or in which order streams are
/// created, so particle-parallel code stays reproducible.
///
/// Satisfies UniformRandomBitGenerator.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, const StreamId& id);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double normal();

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace pfsw

#pragma once

#include "pfsw/core.hpp"

namespace pfsw {

/// Scalar autoregression x' = a x + q w, w ~ N(0, 1). Small enough that the
/// exact (Kalman) posterior is available in closed form; used to check the
/// filter.
class LinearGaussian1D final : public ForwardModel {
 public:
  LinearGaussian1D(double a, double q) : a_(a), q_(q) {}

  std::size_t state_dim() const override { return 1; }
  std::size_t noise_dim() const override { return 1; }
  double dt() const override { return 1.0; }

  StateVector step(const StateVector& x, const NoiseIncrement& noise) const override;
  NoiseIncrement sample_noise(RngStream& rng) const override;

  double a() const { return a_; }
  double q() const { return q_; }

 private:
  double a_;
  double q_;
};

struct GaussianMoments {
  double mean = 0.0;
  double var = 0.0;
};

/// Kalman update of N(prior) with a direct observation z of noise variance r.
GaussianMoments kalman_update(GaussianMoments prior, double z, double r);

}  // namespace pfsw

#include "pfsw/linear_gaussian.hpp"

#include "pfsw/error.hpp"

namespace pfsw {

StateVector LinearGaussian1D::step(const StateVector& x, const NoiseIncrement& noise) const {
  require(x.size() == 1 && noise.size() == 1, "linear-gaussian: dimension mismatch");
  return {a_ * x[0] + q_ * noise[0]};
}

NoiseIncrement LinearGaussian1D::sample_noise(RngStream& rng) const { return {rng.normal()}; }

GaussianMoments kalman_update(GaussianMoments prior, double z, double r) {
  const double gain = prior.var / (prior.var + r);
  return {prior.mean + gain * (z - prior.mean), (1.0 - gain) * prior.var};
}

}  // namespace pfsw

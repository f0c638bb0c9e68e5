#include "pfsw/core.hpp"

#include <cmath>
#include <omp.h>

#include "pfsw/error.hpp"
#include "pfsw/parallel.hpp"

namespace pfsw {

bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

Ensemble Ensemble::uniform(std::vector<StateVector> particles, long time_index) {
  Ensemble e;
  const std::size_t n = particles.size();
  e.particles = std::move(particles);
  e.weights.assign(n, n ? 1.0 / static_cast<double>(n) : 0.0);
  e.time_index = time_index;
  return e;
}

void Ensemble::validate() const {
  require(particles.size() >= 2, "ensemble needs at least 2 particles");
  require(weights.size() == particles.size(), "weights/particles length mismatch");
  const std::size_t d = particles.front().size();
  for (const auto& p : particles) {
    require(p.size() == d, "particles differ in dimension");
    require(all_finite(p.span()), "non-finite particle entry");
  }
  for (double w : weights) require(w >= 0.0 && std::isfinite(w), "negative or non-finite weight");
  require(std::abs(pairwise_sum(weights) - 1.0) <= 1e-12, "weights do not sum to 1");
}

StateVector propagate(const ForwardModel& model, StateVector anchor, const NoisePath& path) {
  for (const auto& w : path) anchor = model.step(anchor, w);
  return anchor;
}

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

StateVector ensemble_mean(const Ensemble& e) {
  e.validate();
  const std::size_t n = e.size();
  StateVector mean(e.dim());
  std::vector<double> terms(n);
  for (std::size_t k = 0; k < mean.size(); ++k) {
    for (std::size_t l = 0; l < n; ++l) terms[l] = e.weights[l] * e.particles[l][k];
    mean[k] = pairwise_sum(terms);
  }
  return mean;
}

NoiseIncrement mix_noise(const NoiseIncrement& w, const NoiseIncrement& z, double rho) {
  require(w.size() == z.size(), "mix_noise: length mismatch");
  require(rho >= 0.0 && rho <= 1.0, "mix_noise: rho outside [0, 1]");
  const double c = std::sqrt(1.0 - rho * rho);
  NoiseIncrement out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = rho * w[i] + c * z[i];
  return out;
}

void set_thread_count(int n) {
  if (n > 0) omp_set_num_threads(n);
}

int thread_count() { return omp_get_max_threads(); }

}  // namespace pfsw

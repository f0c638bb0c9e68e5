#include "pfsw/lorenz63.hpp"

#include <cmath>

#include "pfsw/error.hpp"

namespace pfsw {

void Lorenz63Params::validate() const {
  require(alpha > 0.0 && beta > 0.0 && gamma > 0.0, "lorenz63: alpha, beta, gamma must be > 0");
  require(dt > 0.0, "lorenz63: dt must be > 0");
  require(model_error_std >= 0.0, "lorenz63: model_error_std must be >= 0");
}

StateVector lorenz63_rhs(const StateVector& x, const Lorenz63Params& p) {
  return {p.alpha * (x[1] - x[0]), (p.beta - x[2]) * x[0] - x[1], x[0] * x[1] - p.gamma * x[2]};
}

StateVector rk4_step(const StateVector& x, const Lorenz63Params& p) {
  if (x.size() != 3) throw ConfigError("lorenz63: state must have 3 components");
  const double h = p.dt;
  auto axpy = [](const StateVector& a, double s, const StateVector& b) {
    return StateVector{a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]};
  };
  const auto k1 = lorenz63_rhs(x, p);
  const auto k2 = lorenz63_rhs(axpy(x, 0.5 * h, k1), p);
  const auto k3 = lorenz63_rhs(axpy(x, 0.5 * h, k2), p);
  const auto k4 = lorenz63_rhs(axpy(x, h, k3), p);
  StateVector out(3);
  for (std::size_t i = 0; i < 3; ++i)
    out[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  if (!all_finite(out.span())) throw ModelError("lorenz63: non-finite state after RK4 step");
  return out;
}

Lorenz63Model::Lorenz63Model(Lorenz63Params p) : params_(p) { params_.validate(); }

StateVector Lorenz63Model::step(const StateVector& x, const NoiseIncrement& noise) const {
  if (noise.size() != 3) throw ConfigError("lorenz63: noise must have 3 components");
  auto out = rk4_step(x, params_);
  const double scale = params_.model_error_std * std::sqrt(params_.dt);
  if (scale != 0.0)
    for (std::size_t i = 0; i < 3; ++i) out[i] += scale * noise[i];
  return out;
}

NoiseIncrement Lorenz63Model::sample_noise(RngStream& rng) const {
  return {rng.normal(), rng.normal(), rng.normal()};
}

}  // namespace pfsw

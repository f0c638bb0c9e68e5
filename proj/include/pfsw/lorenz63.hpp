#pragma once

#include "pfsw/core.hpp"

namespace pfsw {

struct Lorenz63Params {
  double alpha = 10.0;
  double beta = 28.0;
  double gamma = 8.0 / 3.0;
  double dt = 0.01;
  /// Diffusion scale: each step adds model_error_std * sqrt(dt) * N(0, I).
  double model_error_std = 0.1;

  void validate() const;
};

/// Right-hand side of the Lorenz '63 system.
StateVector lorenz63_rhs(const StateVector& x, const Lorenz63Params& p);

/// One classical fourth-order Runge-Kutta step of size p.dt.
StateVector rk4_step(const StateVector& x, const Lorenz63Params& p);

class Lorenz63Model final : public ForwardModel {
 public:
  explicit Lorenz63Model(Lorenz63Params p);

  std::size_t state_dim() const override { return 3; }
  std::size_t noise_dim() const override { return 3; }
  double dt() const override { return params_.dt; }
  const Lorenz63Params& params() const { return params_; }

  /// rk4_step(x) + model_error_std * sqrt(dt) * noise
  StateVector step(const StateVector& x, const NoiseIncrement& noise) const override;
  NoiseIncrement sample_noise(RngStream& rng) const override;

 private:
  Lorenz63Params params_;
};

}  // namespace pfsw

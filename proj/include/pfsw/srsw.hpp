#pragma once

#include <atomic>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "pfsw/core.hpp"
#include "pfsw/grid.hpp"
#include "pfsw/noise_spectral.hpp"
#include "pfsw/parallel.hpp"

namespace pfsw {

/// Dimensional description of the channel. make_params() turns it into the
/// nondimensional solver parameters: lengths in units of length_scale_m,
/// velocities in velocity_scale, time in length_scale_m / velocity_scale.
/// Heights stay in metres; the pressure scale is epsilon * froude metres.
struct SrswPhysical {
  std::size_t nx = 64;
  std::size_t ny = 32;
  double lat_south_deg = 30.0;
  double lat_north_deg = 60.0;
  /// Channel length over channel width.
  double aspect = 2.0;
  double earth_radius_m = 6.371e6;
  double omega = 7.292e-5;
  double gravity = 9.81;
  double length_scale_m = 1.0e6;
  double velocity_scale = 10.0;
  double mean_depth_m = 1000.0;
  double dt_s = 90.0;

  double f0() const;
  double beta() const;
  double width_m() const;
  void validate() const;
};

struct SrswParams {
  GridSpec grid;
  /// Rossby number U / (f0 L).
  double epsilon = 0.1;
  /// f0^2 L^2 / g in metres, so epsilon * froude = f0 U L / g.
  double froude = 1000.0;
  double dt = 1e-3;
  /// f / f0 on centre rows (ny) and v2 rows (ny + 1).
  std::vector<double> f_center;
  std::vector<double> f_face;
  /// Bottom reference height b at centres (m).
  std::vector<double> b;
  /// Rotation potential R = (R1(y), R2(y)). r1 holds the centre rows with one
  /// ghost row on each side (index j + 1); r2 holds the v2 rows.
  std::vector<double> r1;
  std::vector<double> r2;
  double cfl_limit = 0.5;

  double pressure_scale() const { return epsilon * froude; }
  void validate() const;
};

SrswParams make_params(const SrswPhysical& phys);

struct SrswState {
  std::vector<double> v1;
  std::vector<double> v2;
  std::vector<double> h;

  static SrswState zeros(const GridSpec& g);
  bool operator==(const SrswState&) const = default;
};

/// Flat layout [v1, v2, h].
StateVector pack(const SrswState& s);
SrswState unpack(const StateVector& x, const GridSpec& g);

/// p = (h - b) / (epsilon * froude).
std::vector<double> pressure(std::span<const double> h, std::span<const double> b,
                             const SrswParams& params);

/// Fluid velocity u = (v - R) / epsilon on both velocity grids.
VelocityPair fluid_velocity(const SrswState& s, const SrswParams& params);

struct Tendencies {
  std::vector<double> dv1;
  std::vector<double> dv2;
  std::vector<double> dh;
};

/// Right-hand side of the discrete equations. `xi`, when given, is the
/// effective transport velocity on (v1, v2) points. Rows are independent, so
/// the parallel and serial paths return identical bits.
void tendencies(const SrswState& s, const SrswParams& params, const VelocityPair* xi,
                Tendencies& out, Execution ex = Execution::serial);

/// Point-by-point implementation of the same discretization, kept as the
/// reference for the kernel above.
Tendencies tendencies_reference(const SrswState& s, const SrswParams& params,
                                const VelocityPair* xi);

/// One classical RK4 step with xi held fixed over the four stages. Throws
/// ModelError if h <= 0 or any entry is non-finite afterwards.
SrswState rk4_step(const SrswState& s, const SrswParams& params, const VelocityPair* xi,
                   Execution ex = Execution::serial);

/// Balanced state for a nondimensional pressure field on centres.
SrswState geostrophic_init(std::span<const double> p0, const SrswParams& params);

double total_mass(std::span<const double> h, const GridSpec& g);

/// max |u| dt / min(dx, dy).
double cfl_number(const SrswState& s, const SrswParams& params);

/// SRSW as a ForwardModel. Noise increments are the spectral latents of one
/// step; without a noise spec the model is deterministic and noise_dim() is 0.
class SrswModel final : public ForwardModel {
 public:
  SrswModel(SrswParams params, std::optional<SpectralNoiseSpec> noise,
            Execution inner = Execution::serial);

  std::size_t state_dim() const override { return params_.grid.n_state(); }
  std::size_t noise_dim() const override { return gen_ ? gen_->latent_dim() : 0; }
  double dt() const override { return params_.dt; }

  StateVector step(const StateVector& x, const NoiseIncrement& noise) const override;
  NoiseIncrement sample_noise(RngStream& rng) const override;

  const SrswParams& params() const { return params_; }
  const SpectralFieldGenerator* generator() const { return gen_.get(); }
  /// Effective transport velocity for one step's latents.
  VelocityPair noise_velocity(const NoiseIncrement& noise) const;

  /// Steps whose CFL number exceeded params().cfl_limit.
  std::size_t cfl_warnings() const { return cfl_warnings_->load(); }

 private:
  SrswParams params_;
  std::shared_ptr<const SpectralFieldGenerator> gen_;
  Execution inner_;
  std::shared_ptr<std::atomic<std::size_t>> cfl_warnings_;
};

}  // namespace pfsw

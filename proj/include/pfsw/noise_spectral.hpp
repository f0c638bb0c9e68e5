#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "pfsw/core.hpp"
#include "pfsw/grid.hpp"
#include "pfsw/rng.hpp"

namespace pfsw {

struct SpectralNoiseSpec {
  /// Extended periodic grid the field is synthesized on.
  std::size_t ext_nx = 128;
  std::size_t ext_ny = 64;
  /// Physical window cut out of the extended grid.
  std::size_t offset_x = 0;
  std::size_t offset_y = 0;
  std::size_t nx = 64;
  std::size_t ny = 32;
  double dx = 1.0;
  double dy = 1.0;
  /// Spectral width: the spectrum is exp(-(mu_x^2 + mu_y^2) / sigma^2).
  double sigma = 1.0;
  /// Pointwise standard deviation of the truncated field.
  double amplitude = 1.0;
  /// Constant in R^v1 = -(gamma_b / f) dRp/dy, R^v2 = (gamma_b / f) dRp/dx.
  double balance_constant = 1.0;
  /// Width (cells) of a sin^2 ramp that takes the field to zero at the first
  /// and last rows of the window, so balanced velocities respect channel
  /// walls. 0 disables it.
  double wall_taper_cells = 0.0;

  /// Extended grid of the next powers of two at least twice nx, ny. With
  /// periodic_x the x extent is left at nx (which must be a power of two), so
  /// the field stays periodic along a channel.
  static SpectralNoiseSpec for_grid(const GridSpec& g, double sigma, double amplitude,
                                    double balance_constant, bool periodic_x = false);
  void validate() const;
};

/// Gaussian random fields by random-phase synthesis in Fourier space.
///
/// Each representative wavenumber (j, k) gets the coefficient
/// A_jk exp(2 pi i phi_jk) and its mirror (-j, -k) the conjugate, so the
/// inverse transform is real. Self-conjugate modes carry sqrt(2) A cos(2 pi phi)
/// to keep their variance contribution at A^2. The phases come from standard
/// normal latents through the normal CDF, which lets the filter mix latents
/// with rho and still obtain uniform phases.
///
/// Immutable after construction and safe to share between threads.
class SpectralFieldGenerator {
 public:
  explicit SpectralFieldGenerator(SpectralNoiseSpec spec);

  const SpectralNoiseSpec& spec() const { return spec_; }
  /// One latent per extended-grid mode.
  std::size_t latent_dim() const { return spec_.ext_nx * spec_.ext_ny; }

  /// A_jk on the extended grid, FFT ordering (index k * ext_nx + j).
  const std::vector<double>& spectrum() const { return spectrum_; }
  /// Factor applied after truncation so the pointwise std equals the amplitude.
  double scale() const { return scale_; }

  NoiseIncrement sample_latents(RngStream& rng) const;
  std::vector<double> phases_from_latents(std::span<const double> latents) const;

  /// Unscaled inverse transform on the extended grid (complex, so the
  /// imaginary residue can be inspected). Phases are indexed like spectrum().
  std::vector<std::complex<double>> inverse_transform(std::span<const double> phases) const;

  /// Physical-window field from phases; multiplied by scale() when rescale.
  std::vector<double> field_from_phases(std::span<const double> phases, bool rescale = true) const;
  std::vector<double> field_from_latents(std::span<const double> latents) const;
  std::vector<double> sample(RngStream& rng) const;

  /// Analytic covariance of the scaled field at lag (lx, ly) grid cells.
  double covariance(long lx, long ly) const;

 private:
  struct Plan;

  SpectralNoiseSpec spec_;
  std::vector<double> spectrum_;
  std::vector<std::size_t> partner_;
  double scale_ = 1.0;
  std::vector<double> taper_;
  std::shared_ptr<Plan> plan_;
};

/// Geostrophically balanced velocity-point fields derived from a scalar on
/// cell centres: v1 = -(gamma / f) d_y p, v2 = (gamma / f) d_x p. Wall rows of
/// v2 are zero. f_center has ny entries, f_face ny + 1.
struct VelocityPair {
  std::vector<double> v1;
  std::vector<double> v2;
};

VelocityPair balanced_velocity_fields(std::span<const double> p, const GridSpec& g,
                                      std::span<const double> f_center,
                                      std::span<const double> f_face, double gamma);

/// Per-step transport fields: increments over one step, i.e. already scaled
/// by sqrt(dt). The effective velocity used in a step is xi / dt.
struct NoiseFields {
  std::vector<double> xi_v1;
  std::vector<double> xi_v2;
  /// The scalar field the velocities were derived from (diagnostic).
  std::vector<double> xi_stretch;
};

NoiseFields per_step_noise(const SpectralFieldGenerator& gen, const GridSpec& g,
                           std::span<const double> f_center, std::span<const double> f_face,
                           std::span<const double> latents, double dt);

}  // namespace pfsw

#include "pfsw/noise_spectral.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "pfsw/error.hpp"

namespace pfsw {

namespace {

// FFTW's planner is not thread-safe; execution of an existing plan is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n) : ptr(fftw_alloc_complex(n)) {
    if (!ptr) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(ptr); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  fftw_complex* ptr;
};

double signed_wavenumber(std::size_t j, std::size_t n, double spacing) {
  const double js = j <= n / 2 ? static_cast<double>(j) : static_cast<double>(j) - static_cast<double>(n);
  return 2.0 * std::numbers::pi * js / (static_cast<double>(n) * spacing);
}

}  // namespace

struct SpectralFieldGenerator::Plan {
  fftw_plan plan = nullptr;
  ~Plan() {
    std::lock_guard lock(planner_mutex());
    if (plan) fftw_destroy_plan(plan);
  }
};

SpectralNoiseSpec SpectralNoiseSpec::for_grid(const GridSpec& g, double sigma, double amplitude,
                                              double balance_constant, bool periodic_x) {
  SpectralNoiseSpec s;
  s.nx = g.nx;
  s.ny = g.ny;
  s.ext_nx = periodic_x ? g.nx : std::bit_ceil(2 * g.nx);
  s.ext_ny = std::bit_ceil(2 * g.ny);
  s.dx = g.dx;
  s.dy = g.dy;
  s.sigma = sigma;
  s.amplitude = amplitude;
  s.balance_constant = balance_constant;
  return s;
}

void SpectralNoiseSpec::validate() const {
  require(std::has_single_bit(ext_nx) && std::has_single_bit(ext_ny),
          "noise: extended grid sizes must be powers of two");
  require(nx >= 1 && ny >= 1, "noise: empty physical window");
  require(offset_x + nx <= ext_nx && offset_y + ny <= ext_ny,
          "noise: physical window exceeds the extended grid");
  require(nx * ny < ext_nx * ext_ny, "noise: extended grid must strictly contain the window");
  require(dx > 0.0 && dy > 0.0, "noise: spacings must be > 0");
  require(sigma > 0.0, "noise: sigma must be > 0");
  require(amplitude > 0.0, "noise: amplitude must be > 0");
  require(std::isfinite(balance_constant), "noise: balance constant must be finite");
  require(wall_taper_cells >= 0.0, "noise: wall taper must be >= 0");
}

SpectralFieldGenerator::SpectralFieldGenerator(SpectralNoiseSpec spec) : spec_(spec) {
  spec_.validate();
  const std::size_t n = spec_.ext_nx, m = spec_.ext_ny;
  spectrum_.resize(n * m);
  partner_.resize(n * m);
  std::vector<double> power(n * m);
  for (std::size_t k = 0; k < m; ++k) {
    const double my = signed_wavenumber(k, m, spec_.dy);
    for (std::size_t j = 0; j < n; ++j) {
      const double mx = signed_wavenumber(j, n, spec_.dx);
      const std::size_t idx = k * n + j;
      spectrum_[idx] = std::exp(-(mx * mx + my * my) / (spec_.sigma * spec_.sigma));
      power[idx] = spectrum_[idx] * spectrum_[idx];
      partner_[idx] = ((m - k) % m) * n + (n - j) % n;
    }
  }
  const double total = pairwise_sum(power);
  require(total > 0.0, "noise: spectrum underflows; increase sigma");
  scale_ = spec_.amplitude / std::sqrt(total);

  taper_.assign(spec_.ny, 1.0);
  const double width = spec_.wall_taper_cells;
  if (width > 0.0)
    for (std::size_t j = 0; j < spec_.ny; ++j) {
      const double d = std::min(static_cast<double>(j), static_cast<double>(spec_.ny - 1 - j));
      if (d < width) taper_[j] = std::pow(std::sin(0.5 * std::numbers::pi * d / width), 2);
    }

  plan_ = std::make_shared<Plan>();
  FftwBuffer in(n * m), out(n * m);
  std::lock_guard lock(planner_mutex());
  plan_->plan = fftw_plan_dft_2d(static_cast<int>(m), static_cast<int>(n), in.ptr, out.ptr,
                                 FFTW_BACKWARD, FFTW_ESTIMATE);
  if (!plan_->plan) throw ConfigError("noise: FFTW planning failed");
}

NoiseIncrement SpectralFieldGenerator::sample_latents(RngStream& rng) const {
  NoiseIncrement z(latent_dim());
  for (double& v : z.values) v = rng.normal();
  return z;
}

std::vector<double> SpectralFieldGenerator::phases_from_latents(
    std::span<const double> latents) const {
  require(latents.size() == latent_dim(), "noise: latent length mismatch");
  std::vector<double> phases(latents.size());
  for (std::size_t i = 0; i < latents.size(); ++i)
    phases[i] = 0.5 * std::erfc(-latents[i] / std::numbers::sqrt2);
  return phases;
}

std::vector<std::complex<double>> SpectralFieldGenerator::inverse_transform(
    std::span<const double> phases) const {
  const std::size_t nm = spec_.ext_nx * spec_.ext_ny;
  require(phases.size() == nm, "noise: phase array length mismatch");
  FftwBuffer in(nm), out(nm);
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t idx = 0; idx < nm; ++idx) {
    const std::size_t mate = partner_[idx];
    const double a = spectrum_[idx];
    if (mate == idx) {
      in.ptr[idx][0] = std::numbers::sqrt2 * a * std::cos(two_pi * phases[idx]);
      in.ptr[idx][1] = 0.0;
    } else if (idx < mate) {
      in.ptr[idx][0] = a * std::cos(two_pi * phases[idx]);
      in.ptr[idx][1] = a * std::sin(two_pi * phases[idx]);
    } else {
      in.ptr[idx][0] = a * std::cos(two_pi * phases[mate]);
      in.ptr[idx][1] = -a * std::sin(two_pi * phases[mate]);
    }
  }
  fftw_execute_dft(plan_->plan, in.ptr, out.ptr);
  std::vector<std::complex<double>> field(nm);
  for (std::size_t i = 0; i < nm; ++i) field[i] = {out.ptr[i][0], out.ptr[i][1]};
  return field;
}

std::vector<double> SpectralFieldGenerator::field_from_phases(std::span<const double> phases,
                                                              bool rescale) const {
  const auto full = inverse_transform(phases);
  const double s = rescale ? scale_ : 1.0;
  std::vector<double> out(spec_.nx * spec_.ny);
  for (std::size_t j = 0; j < spec_.ny; ++j) {
    const double w = s * taper_[j];
    for (std::size_t i = 0; i < spec_.nx; ++i)
      out[j * spec_.nx + i] =
          w * full[(spec_.offset_y + j) * spec_.ext_nx + spec_.offset_x + i].real();
  }
  return out;
}

std::vector<double> SpectralFieldGenerator::field_from_latents(
    std::span<const double> latents) const {
  return field_from_phases(phases_from_latents(latents));
}

std::vector<double> SpectralFieldGenerator::sample(RngStream& rng) const {
  return field_from_latents(sample_latents(rng).span());
}

double SpectralFieldGenerator::covariance(long lx, long ly) const {
  const std::size_t n = spec_.ext_nx, m = spec_.ext_ny;
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<double> terms(n * m);
  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t j = 0; j < n; ++j) {
      const double a = spectrum_[k * n + j];
      const double arg = two_pi * (static_cast<double>(j) * static_cast<double>(lx) / static_cast<double>(n) +
                                   static_cast<double>(k) * static_cast<double>(ly) / static_cast<double>(m));
      terms[k * n + j] = a * a * std::cos(arg);
    }
  return scale_ * scale_ * pairwise_sum(terms);
}

VelocityPair balanced_velocity_fields(std::span<const double> p, const GridSpec& g,
                                      std::span<const double> f_center,
                                      std::span<const double> f_face, double gamma) {
  require(p.size() == g.n_center(), "balance: field size mismatch");
  require(f_center.size() == g.ny && f_face.size() == g.ny + 1, "balance: f size mismatch");
  for (double f : f_center) require(f != 0.0, "balance: f = 0 makes the balance singular");
  for (double f : f_face) require(f != 0.0, "balance: f = 0 makes the balance singular");
  require(g.ny >= 3, "balance: need at least 3 rows");

  const std::size_t nx = g.nx, ny = g.ny;
  VelocityPair out{std::vector<double>(g.n_v1()), std::vector<double>(g.n_v2(), 0.0)};

  // p averaged onto the v1 column (west face), one value per row.
  auto pf = [&](std::size_t i, std::size_t j) {
    return 0.5 * (p[g.at(g.west(i), j)] + p[g.at(i, j)]);
  };
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      double dpdy;
      if (j == 0)
        dpdy = (-3.0 * pf(i, 0) + 4.0 * pf(i, 1) - pf(i, 2)) / (2.0 * g.dy);
      else if (j == ny - 1)
        dpdy = (3.0 * pf(i, j) - 4.0 * pf(i, j - 1) + pf(i, j - 2)) / (2.0 * g.dy);
      else
        dpdy = (pf(i, j + 1) - pf(i, j - 1)) / (2.0 * g.dy);
      out.v1[g.at(i, j)] = -(gamma / f_center[j]) * dpdy;
    }
  }
  // p averaged onto the v2 row (south face).
  auto ps = [&](std::size_t i, std::size_t j) { return 0.5 * (p[g.at(i, j - 1)] + p[g.at(i, j)]); };
  for (std::size_t j = 1; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      const double dpdx = (ps(g.east(i), j) - ps(g.west(i), j)) / (2.0 * g.dx);
      out.v2[g.at(i, j)] = (gamma / f_face[j]) * dpdx;
    }
  return out;
}

NoiseFields per_step_noise(const SpectralFieldGenerator& gen, const GridSpec& g,
                           std::span<const double> f_center, std::span<const double> f_face,
                           std::span<const double> latents, double dt) {
  require(dt > 0.0, "noise: dt must be > 0");
  require(gen.spec().nx == g.nx && gen.spec().ny == g.ny, "noise: generator/grid mismatch");
  auto rp = gen.field_from_latents(latents);
  auto vel = balanced_velocity_fields(rp, g, f_center, f_face, gen.spec().balance_constant);
  const double s = std::sqrt(dt);
  for (double& v : vel.v1) v *= s;
  for (double& v : vel.v2) v *= s;
  for (double& v : rp) v *= s;
  return {std::move(vel.v1), std::move(vel.v2), std::move(rp)};
}

}  // namespace pfsw

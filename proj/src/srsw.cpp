#include "pfsw/srsw.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pfsw/error.hpp"

namespace pfsw {

void GridSpec::validate() const {
  require(nx >= 8 && ny >= 8, "grid: nx and ny must be >= 8");
  require(dx > 0.0 && dy > 0.0, "grid: dx and dy must be > 0");
}

namespace {
constexpr double deg = std::numbers::pi / 180.0;
}

double SrswPhysical::f0() const { return 2.0 * omega * std::sin(45.0 * deg); }
double SrswPhysical::beta() const { return 2.0 * omega * std::cos(45.0 * deg) / earth_radius_m; }
double SrswPhysical::width_m() const {
  return earth_radius_m * (lat_north_deg - lat_south_deg) * deg;
}

void SrswPhysical::validate() const {
  require(nx >= 8 && ny >= 8, "srsw: nx and ny must be >= 8");
  require(lat_north_deg > lat_south_deg, "srsw: latitude band is empty");
  require(aspect > 0.0, "srsw: aspect must be > 0");
  require(earth_radius_m > 0.0 && omega > 0.0 && gravity > 0.0,
          "srsw: radius, omega and gravity must be > 0");
  require(length_scale_m > 0.0 && velocity_scale > 0.0, "srsw: scales must be > 0");
  require(mean_depth_m > 0.0, "srsw: mean depth must be > 0");
  require(dt_s > 0.0, "srsw: dt must be > 0");
}

void SrswParams::validate() const {
  grid.validate();
  require(epsilon > 0.0 && froude > 0.0, "srsw: epsilon and froude must be > 0");
  require(dt > 0.0, "srsw: dt must be > 0");
  require(f_center.size() == grid.ny && f_face.size() == grid.ny + 1, "srsw: f size mismatch");
  for (double f : f_center) require(f > 0.0, "srsw: f must be > 0 on the band");
  for (double f : f_face) require(f > 0.0, "srsw: f must be > 0 on the band");
  require(b.size() == grid.n_center(), "srsw: b size mismatch");
  require(r1.size() == grid.ny + 2 && r2.size() == grid.ny + 1, "srsw: R size mismatch");
  require(cfl_limit > 0.0, "srsw: cfl_limit must be > 0");
}

SrswParams make_params(const SrswPhysical& phys) {
  phys.validate();
  SrswParams p;
  const double f0 = phys.f0();
  const double L = phys.length_scale_m;
  const double width = phys.width_m() / L;
  p.grid.nx = phys.nx;
  p.grid.ny = phys.ny;
  p.grid.dy = width / static_cast<double>(phys.ny);
  p.grid.dx = phys.aspect * width / static_cast<double>(phys.nx);
  p.epsilon = phys.velocity_scale / (f0 * L);
  p.froude = f0 * f0 * L * L / phys.gravity;
  p.dt = phys.dt_s * phys.velocity_scale / L;

  // beta-plane centred on the channel: f / f0 = 1 + bhat (y - yc).
  const double bhat = phys.beta() * L / f0;
  const double yc = 0.5 * width;
  auto f = [&](double y) { return 1.0 + bhat * (y - yc); };
  // R1 = -int_yc^y f, so -dR1/dy = f and R1(yc) = 0.
  auto r1 = [&](double y) { return -((y - yc) + 0.5 * bhat * (y - yc) * (y - yc)); };

  const auto ny = phys.ny;
  p.f_center.resize(ny);
  p.f_face.resize(ny + 1);
  p.r1.resize(ny + 2);
  p.r2.assign(ny + 1, 0.0);
  for (std::size_t j = 0; j < ny; ++j) p.f_center[j] = f((static_cast<double>(j) + 0.5) * p.grid.dy);
  for (std::size_t j = 0; j <= ny; ++j) p.f_face[j] = f(static_cast<double>(j) * p.grid.dy);
  for (std::size_t j = 0; j < ny + 2; ++j)
    p.r1[j] = r1((static_cast<double>(j) - 0.5) * p.grid.dy);
  p.b.assign(p.grid.n_center(), phys.mean_depth_m);
  p.validate();
  return p;
}

SrswState SrswState::zeros(const GridSpec& g) {
  return {std::vector<double>(g.n_v1()), std::vector<double>(g.n_v2()),
          std::vector<double>(g.n_center())};
}

StateVector pack(const SrswState& s) {
  StateVector x(s.v1.size() + s.v2.size() + s.h.size());
  auto it = std::copy(s.v1.begin(), s.v1.end(), x.values.begin());
  it = std::copy(s.v2.begin(), s.v2.end(), it);
  std::copy(s.h.begin(), s.h.end(), it);
  return x;
}

SrswState unpack(const StateVector& x, const GridSpec& g) {
  require(x.size() == g.n_state(), "srsw: state length mismatch");
  auto b = x.values.begin();
  const auto n1 = static_cast<std::ptrdiff_t>(g.n_v1());
  const auto n2 = static_cast<std::ptrdiff_t>(g.n_v2());
  return {std::vector<double>(b, b + n1), std::vector<double>(b + n1, b + n1 + n2),
          std::vector<double>(b + n1 + n2, x.values.end())};
}

std::vector<double> pressure(std::span<const double> h, std::span<const double> b,
                             const SrswParams& params) {
  require(h.size() == b.size(), "srsw: h/b size mismatch");
  const double s = params.pressure_scale();
  std::vector<double> p(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) p[i] = (h[i] - b[i]) / s;
  return p;
}

VelocityPair fluid_velocity(const SrswState& s, const SrswParams& params) {
  const auto& g = params.grid;
  VelocityPair u{std::vector<double>(g.n_v1()), std::vector<double>(g.n_v2())};
  for (std::size_t j = 0; j < g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i)
      u.v1[g.at(i, j)] = (s.v1[g.at(i, j)] - params.r1[j + 1]) / params.epsilon;
  for (std::size_t j = 0; j <= g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i)
      u.v2[g.at(i, j)] = (s.v2[g.at(i, j)] - params.r2[j]) / params.epsilon;
  return u;
}

namespace {

void check_shapes(const SrswState& s, const GridSpec& g, const VelocityPair* xi) {
  require(s.v1.size() == g.n_v1() && s.v2.size() == g.n_v2() && s.h.size() == g.n_center(),
          "srsw: state shape mismatch");
  if (xi)
    require(xi->v1.size() == g.n_v1() && xi->v2.size() == g.n_v2(), "srsw: noise shape mismatch");
}

}  // namespace

void tendencies(const SrswState& s, const SrswParams& prm, const VelocityPair* xi,
                Tendencies& out, Execution ex) {
  const GridSpec& g = prm.grid;
  check_shapes(s, g, xi);
  const std::size_t nx = g.nx, ny = g.ny;
  const long rows = static_cast<long>(ny);
  const bool par = ex == Execution::parallel;
  const double eps = prm.epsilon, dx = g.dx, dy = g.dy;
  const double inv_ps = 1.0 / prm.pressure_scale();

  out.dv1.assign(g.n_v1(), 0.0);
  out.dv2.assign(g.n_v2(), 0.0);
  out.dh.assign(g.n_center(), 0.0);

  // u1 with a free-slip ghost row on each side: row j lives at (j + 1) * nx.
  std::vector<double> u1((ny + 2) * nx), u2(g.n_v2()), p(g.n_center());
  std::vector<double> f1(g.n_v1()), f2(g.n_v2(), 0.0);

#pragma omp parallel for if (par)
  for (long jj = 0; jj < rows; ++jj) {
    const auto j = static_cast<std::size_t>(jj);
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t c = j * nx + i;
      u1[(j + 1) * nx + i] = (s.v1[c] - prm.r1[j + 1]) / eps;
      p[c] = (s.h[c] - prm.b[c]) * inv_ps;
    }
  }
  for (std::size_t i = 0; i < nx; ++i) {
    u1[i] = u1[nx + i];
    u1[(ny + 1) * nx + i] = u1[ny * nx + i];
  }
  for (std::size_t j = 0; j <= ny; ++j)
    for (std::size_t i = 0; i < nx; ++i)
      u2[j * nx + i] = (s.v2[j * nx + i] - prm.r2[j]) / eps;

  // Mass fluxes on faces; walls carry none.
#pragma omp parallel for if (par)
  for (long jj = 0; jj < rows; ++jj) {
    const auto j = static_cast<std::size_t>(jj);
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t c = j * nx + i, w = j * nx + g.west(i);
      const double adv = u1[(j + 1) * nx + i] + (xi ? xi->v1[c] : 0.0);
      f1[c] = 0.5 * (s.h[w] + s.h[c]) * adv;
      if (j > 0) {
        const double adv2 = u2[c] + (xi ? xi->v2[c] : 0.0);
        f2[c] = 0.5 * (s.h[c - nx] + s.h[c]) * adv2;
      }
    }
  }

#pragma omp parallel for if (par)
  for (long jj = 0; jj < rows; ++jj) {
    const auto j = static_cast<std::size_t>(jj);
    const double fc = prm.f_center[j];
    const double dr1dy = (prm.r1[j + 2] - prm.r1[j]) / (2.0 * dy);
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t ip = g.east(i), im = g.west(i);
      const std::size_t c = j * nx + i;
      const double* u1r = &u1[(j + 1) * nx];

      // dh: flux divergence.
      out.dh[c] = -((f1[j * nx + ip] - f1[c]) / dx + (f2[c + nx] - f2[c]) / dy);

      // dv1 at the west face of cell (i, j).
      const double u2bar = 0.25 * (u2[j * nx + im] + u2[c] + u2[(j + 1) * nx + im] + u2[c + nx]);
      const double dudx = (u1r[ip] - u1r[im]) / (2.0 * dx);
      const double dudy = ((u1r + nx)[i] - (u1r - nx)[i]) / (2.0 * dy);
      const double adv = eps * (u1r[i] * dudx + u2bar * dudy);
      const double cor = -fc * u2bar;
      const double pgf = (p[c] - p[j * nx + im]) / dx;
      double d = -(adv + cor + pgf);
      if (xi) {
        const auto& x1 = xi->v1;
        const auto& x2 = xi->v2;
        const double xi2bar = 0.25 * (x2[j * nx + im] + x2[c] + x2[(j + 1) * nx + im] + x2[c + nx]);
        const double v2bar = 0.25 * (s.v2[j * nx + im] + s.v2[c] + s.v2[(j + 1) * nx + im] + s.v2[c + nx]);
        const double dv1dx = (s.v1[j * nx + ip] - s.v1[j * nx + im]) / (2.0 * dx);
        const double dv1dy = eps * dudy + dr1dy;
        const double dxi1dx = (x1[j * nx + ip] - x1[j * nx + im]) / (2.0 * dx);
        const double dxi2dx = 0.5 * ((x2[c] - x2[j * nx + im]) + (x2[c + nx] - x2[(j + 1) * nx + im])) / dx;
        d -= x1[c] * dv1dx + xi2bar * dv1dy + s.v1[c] * dxi1dx + v2bar * dxi2dx;
      }
      out.dv1[c] = d;
    }
  }

  // dv2 on interior rows; wall rows keep zero tendency.
#pragma omp parallel for if (par)
  for (long jj = 1; jj < rows; ++jj) {
    const auto j = static_cast<std::size_t>(jj);
    const double ff = prm.f_face[j];
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t ip = g.east(i), im = g.west(i);
      const std::size_t c = j * nx + i, s_ = c - nx;
      const double* u1s = &u1[j * nx];        // centre row j - 1
      const double* u1n = &u1[(j + 1) * nx];  // centre row j
      const double u1bar = 0.25 * (u1s[i] + u1s[ip] + u1n[i] + u1n[ip]);
      const double du2dx = (u2[j * nx + ip] - u2[j * nx + im]) / (2.0 * dx);
      const double du2dy = (u2[c + nx] - u2[s_]) / (2.0 * dy);
      const double adv = eps * (u1bar * du2dx + u2[c] * du2dy);
      const double cor = ff * u1bar;
      const double pgf = (p[c] - p[s_]) / dy;
      double d = -(adv + cor + pgf);
      if (xi) {
        const auto& x1 = xi->v1;
        const auto& x2 = xi->v2;
        const double xi1bar = 0.25 * (x1[s_] + x1[j * nx - nx + ip] + x1[c] + x1[j * nx + ip]);
        const double v1bar = 0.25 * (s.v1[s_] + s.v1[j * nx - nx + ip] + s.v1[c] + s.v1[j * nx + ip]);
        const double dv2dx = (s.v2[j * nx + ip] - s.v2[j * nx + im]) / (2.0 * dx);
        const double dv2dy = (s.v2[c + nx] - s.v2[s_]) / (2.0 * dy);
        const double dxi1dy = 0.5 * ((x1[c] - x1[s_]) + (x1[j * nx + ip] - x1[j * nx - nx + ip])) / dy;
        const double dxi2dy = (x2[c + nx] - x2[s_]) / (2.0 * dy);
        d -= xi1bar * dv2dx + x2[c] * dv2dy + v1bar * dxi1dy + s.v2[c] * dxi2dy;
      }
      out.dv2[c] = d;
    }
  }
}

namespace {

void axpy(SrswState& out, const SrswState& s, double a, const Tendencies& k) {
  out.v1.resize(s.v1.size());
  out.v2.resize(s.v2.size());
  out.h.resize(s.h.size());
  for (std::size_t i = 0; i < s.v1.size(); ++i) out.v1[i] = s.v1[i] + a * k.dv1[i];
  for (std::size_t i = 0; i < s.v2.size(); ++i) out.v2[i] = s.v2[i] + a * k.dv2[i];
  for (std::size_t i = 0; i < s.h.size(); ++i) out.h[i] = s.h[i] + a * k.dh[i];
}

void rk4_combine(std::vector<double>& y, const std::vector<double>& y0, double h,
                 const std::vector<double>& a, const std::vector<double>& b,
                 const std::vector<double>& c, const std::vector<double>& d) {
  y.resize(y0.size());
  for (std::size_t i = 0; i < y0.size(); ++i)
    y[i] = y0[i] + h / 6.0 * (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i]);
}

}  // namespace

SrswState rk4_step(const SrswState& s, const SrswParams& prm, const VelocityPair* xi,
                   Execution ex) {
  const double h = prm.dt;
  Tendencies k1, k2, k3, k4;
  SrswState tmp;
  tendencies(s, prm, xi, k1, ex);
  axpy(tmp, s, 0.5 * h, k1);
  tendencies(tmp, prm, xi, k2, ex);
  axpy(tmp, s, 0.5 * h, k2);
  tendencies(tmp, prm, xi, k3, ex);
  axpy(tmp, s, h, k3);
  tendencies(tmp, prm, xi, k4, ex);

  SrswState out;
  rk4_combine(out.v1, s.v1, h, k1.dv1, k2.dv1, k3.dv1, k4.dv1);
  rk4_combine(out.v2, s.v2, h, k1.dv2, k2.dv2, k3.dv2, k4.dv2);
  rk4_combine(out.h, s.h, h, k1.dh, k2.dh, k3.dh, k4.dh);

  if (!all_finite(out.v1) || !all_finite(out.v2) || !all_finite(out.h))
    throw ModelError("srsw: non-finite state after RK4 step");
  for (double v : out.h)
    if (v <= 0.0) throw ModelError("srsw: layer depth h <= 0");
  return out;
}

SrswState geostrophic_init(std::span<const double> p0, const SrswParams& prm) {
  const GridSpec& g = prm.grid;
  auto u = balanced_velocity_fields(p0, g, prm.f_center, prm.f_face, 1.0);
  SrswState s = SrswState::zeros(g);
  for (std::size_t j = 0; j < g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i)
      s.v1[g.at(i, j)] = prm.epsilon * u.v1[g.at(i, j)] + prm.r1[j + 1];
  for (std::size_t j = 0; j <= g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i)
      s.v2[g.at(i, j)] = prm.epsilon * u.v2[g.at(i, j)] + prm.r2[j];
  const double ps = prm.pressure_scale();
  for (std::size_t c = 0; c < g.n_center(); ++c) s.h[c] = ps * p0[c] + prm.b[c];
  return s;
}

double total_mass(std::span<const double> h, const GridSpec& g) {
  return pairwise_sum(h) * g.dx * g.dy;
}

double cfl_number(const SrswState& s, const SrswParams& prm) {
  const auto u = fluid_velocity(s, prm);
  double umax = 0.0;
  for (double v : u.v1) umax = std::max(umax, std::abs(v));
  for (double v : u.v2) umax = std::max(umax, std::abs(v));
  return umax * prm.dt / std::min(prm.grid.dx, prm.grid.dy);
}

SrswModel::SrswModel(SrswParams params, std::optional<SpectralNoiseSpec> noise, Execution inner)
    : params_(std::move(params)),
      inner_(inner),
      cfl_warnings_(std::make_shared<std::atomic<std::size_t>>(0)) {
  params_.validate();
  if (noise) {
    require(noise->nx == params_.grid.nx && noise->ny == params_.grid.ny,
            "srsw: noise window must match the grid");
    gen_ = std::make_shared<const SpectralFieldGenerator>(*noise);
  }
}

VelocityPair SrswModel::noise_velocity(const NoiseIncrement& noise) const {
  require(gen_ != nullptr, "srsw: model has no noise generator");
  auto f = per_step_noise(*gen_, params_.grid, params_.f_center, params_.f_face, noise.span(),
                          params_.dt);
  const double inv_dt = 1.0 / params_.dt;
  for (double& v : f.xi_v1) v *= inv_dt;
  for (double& v : f.xi_v2) v *= inv_dt;
  return {std::move(f.xi_v1), std::move(f.xi_v2)};
}

StateVector SrswModel::step(const StateVector& x, const NoiseIncrement& noise) const {
  require(noise.size() == noise_dim(), "srsw: noise length mismatch");
  const SrswState s = unpack(x, params_.grid);
  std::optional<VelocityPair> xi;
  if (gen_) xi = noise_velocity(noise);
  SrswState next = rk4_step(s, params_, xi ? &*xi : nullptr, inner_);
  if (cfl_number(next, params_) > params_.cfl_limit) cfl_warnings_->fetch_add(1);
  return pack(next);
}

NoiseIncrement SrswModel::sample_noise(RngStream& rng) const {
  return gen_ ? gen_->sample_latents(rng) : NoiseIncrement{};
}

}  // namespace pfsw

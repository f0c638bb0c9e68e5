#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "pfsw/config.hpp"
#include "pfsw/error.hpp"
#include "pfsw/harness.hpp"
#include "pfsw/parallel.hpp"
#include "pfsw/srsw.hpp"

using namespace pfsw;

namespace {

constexpr double pi = std::numbers::pi;

// Default channel with f held constant and R1 = -(y - yc).
SrswParams f_plane(std::size_t nx = 64, std::size_t ny = 32) {
  SrswPhysical phys;
  phys.nx = nx;
  phys.ny = ny;
  SrswParams p = make_params(phys);
  const double yc = 0.5 * p.grid.length_y();
  std::fill(p.f_center.begin(), p.f_center.end(), 1.0);
  std::fill(p.f_face.begin(), p.f_face.end(), 1.0);
  for (std::size_t j = 0; j < ny + 2; ++j) p.r1[j] = -((double(j) - 0.5) * p.grid.dy - yc);
  return p;
}

SrswState rest_state(const SrswParams& p, double depth) {
  SrswState s = SrswState::zeros(p.grid);
  for (std::size_t j = 0; j < p.grid.ny; ++j)
    for (std::size_t i = 0; i < p.grid.nx; ++i) s.v1[p.grid.at(i, j)] = p.r1[j + 1];
  for (std::size_t j = 0; j <= p.grid.ny; ++j)
    for (std::size_t i = 0; i < p.grid.nx; ++i) s.v2[p.grid.at(i, j)] = p.r2[j];
  std::fill(s.h.begin(), s.h.end(), depth);
  return s;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// The stochastic SRSW model and initial truth of the standard preset.
Setup noisy_setup() { return make_setup(preset("srsw-standard")); }

const SrswModel& as_srsw(const Setup& s) { return dynamic_cast<const SrswModel&>(*s.model); }

}  // namespace

TEST_CASE("pressure examples") {
  const SrswParams p = make_params(SrswPhysical{});
  const auto n = p.grid.n_center();
  std::vector<double> b(n), h(n);
  RngStream r(1, {0, 0, Purpose::test, 0});
  for (std::size_t c = 0; c < n; ++c) {
    b[c] = 1000.0 + 50.0 * r.normal();
    h[c] = b[c];
  }
  for (double x : pressure(h, b, p)) CHECK(x == 0.0);
  for (std::size_t c = 0; c < n; ++c) h[c] = b[c] + p.pressure_scale();
  for (double x : pressure(h, b, p)) CHECK(x == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t c = 0; c < n; ++c) h[c] = b[c] + 30.0 * r.normal();
  const auto q = pressure(h, b, p);
  for (std::size_t c = 0; c < n; ++c) {
    const double want = (h[c] - b[c]) / (p.epsilon * p.froude);
    CHECK(std::abs(q[c] - want) <= 1e-14 * std::max(1.0, std::abs(want)));
  }
}

TEST_CASE("parameters: units, walls and the rotation potential") {
  SrswPhysical phys;
  const SrswParams p = make_params(phys);
  CHECK(p.epsilon == doctest::Approx(10.0 / (phys.f0() * 1e6)));
  CHECK(p.dt == doctest::Approx(90.0 * 10.0 / 1e6));
  CHECK(p.grid.length_y() == doctest::Approx(phys.width_m() / 1e6));
  for (double f : p.f_center) CHECK(f > 0.0);
  // curl R = -dR1/dy must equal f on the centre rows.
  for (std::size_t j = 0; j < p.grid.ny; ++j) {
    const double curl = -(p.r1[j + 2] - p.r1[j]) / (2.0 * p.grid.dy);
    CHECK(curl == doctest::Approx(p.f_center[j]).epsilon(1e-10));
  }
  for (double r : p.r2) CHECK(r == 0.0);
  auto bad = phys;
  bad.lat_north_deg = 20.0;
  CHECK_THROWS_AS(make_params(bad), ConfigError);
  auto badp = p;
  badp.f_center[3] = 0.0;
  CHECK_THROWS_AS(badp.validate(), ConfigError);
}

TEST_CASE("rest state has zero tendencies") {
  const SrswParams p = make_params(SrswPhysical{});
  const SrswState s = rest_state(p, 1000.0);
  Tendencies t;
  tendencies(s, p, nullptr, t);
  CHECK(max_abs(t.dv1) == 0.0);
  CHECK(max_abs(t.dv2) == 0.0);
  CHECK(max_abs(t.dh) == 0.0);
  const auto next = rk4_step(s, p, nullptr);
  CHECK(next == s);
}

TEST_CASE("flux form: the height tendency sums to zero") {
  const Setup st = noisy_setup();
  const auto& m = as_srsw(st);
  const SrswState s = unpack(st.initial_truth, m.params().grid);
  RngStream r(2, {0, 0, Purpose::test, 0});
  const auto xi = m.noise_velocity(m.sample_noise(r));
  for (const VelocityPair* x : {static_cast<const VelocityPair*>(nullptr), &xi}) {
    Tendencies t;
    tendencies(s, m.params(), x, t);
    const double total = pairwise_sum(t.dh);
    CHECK(std::abs(total) <= 1e-12 * double(t.dh.size()) * max_abs(t.dh));
  }
}

TEST_CASE("mass is conserved and walls stay closed over 100 steps") {
  const Setup st = noisy_setup();
  const auto& m = as_srsw(st);
  const GridSpec& g = m.params().grid;
  const SrswModel quiet(m.params(), std::nullopt);
  const ForwardModel* models[] = {&quiet, &m};
  for (const ForwardModel* model : models) {
    StateVector x = st.initial_truth;
    const double m0 = total_mass(unpack(x, g).h, g);
    for (int k = 0; k < 100; ++k) {
      RngStream r(3, {0, static_cast<std::uint64_t>(k), Purpose::forecast, 0});
      x = model->step(x, model->sample_noise(r));
    }
    const SrswState s = unpack(x, g);
    const double drift = std::abs(total_mass(s.h, g) - m0) / m0;
    MESSAGE("relative mass drift " << drift << (model == &quiet ? " without" : " with") << " noise");
    CHECK(drift < 1e-10);
    const auto u = fluid_velocity(s, m.params());
    for (std::size_t i = 0; i < g.nx; ++i) {
      CHECK(u.v2[g.at(i, 0)] == 0.0);
      CHECK(u.v2[g.at(i, g.ny)] == 0.0);
    }
  }
}

TEST_CASE("row kernel matches the per-point reference and is thread-independent") {
  const Setup st = noisy_setup();
  const auto& m = as_srsw(st);
  SrswState s = unpack(st.initial_truth, m.params().grid);
  RngStream r(4, {0, 0, Purpose::test, 0});
  for (std::size_t c = 0; c < s.h.size(); ++c) s.h[c] += 5.0 * r.normal();
  for (std::size_t c = 0; c < s.v1.size(); ++c) s.v1[c] += 0.01 * r.normal();
  const auto xi = m.noise_velocity(m.sample_noise(r));
  for (const VelocityPair* x : {static_cast<const VelocityPair*>(nullptr), &xi}) {
    Tendencies a, b;
    tendencies(s, m.params(), x, a, Execution::serial);
    const Tendencies ref = tendencies_reference(s, m.params(), x);
    auto close = [](const std::vector<double>& u, const std::vector<double>& v) {
      const double scale = std::max(1.0, max_abs(v));
      for (std::size_t k = 0; k < u.size(); ++k)
        if (std::abs(u[k] - v[k]) > 1e-12 * scale) return false;
      return true;
    };
    CHECK(close(a.dv1, ref.dv1));
    CHECK(close(a.dv2, ref.dv2));
    CHECK(close(a.dh, ref.dh));

    set_thread_count(4);
    tendencies(s, m.params(), x, b, Execution::parallel);
    set_thread_count(1);
    CHECK(a.dv1 == b.dv1);
    CHECK(a.dv2 == b.dv2);
    CHECK(a.dh == b.dh);
  }
}

TEST_CASE("tendencies converge at second order on smooth fields") {
  // u1 = U cos(kx), u2 = 0, h = H (1 + a sin(kx)), f = 1, b = H.
  const double U = 0.3, H = 1000.0, a = 0.05;
  double err_h[2], err_v1[2], err_v2[2];
  for (int level = 0; level < 2; ++level) {
    const std::size_t nx = std::size_t{32} << level;
    SrswParams p = f_plane(nx, 8);
    const GridSpec& g = p.grid;
    const double k = 2.0 * pi / g.length_x();
    SrswState s = rest_state(p, H);
    for (std::size_t j = 0; j < g.ny; ++j)
      for (std::size_t i = 0; i < nx; ++i) {
        const double xf = double(i) * g.dx, xc = (double(i) + 0.5) * g.dx;
        s.v1[g.at(i, j)] += p.epsilon * U * std::cos(k * xf);
        s.h[g.at(i, j)] = H * (1.0 + a * std::sin(k * xc));
      }
    Tendencies t;
    tendencies(s, p, nullptr, t);
    double eh = 0, e1 = 0, e2 = 0;
    const double ps = p.pressure_scale();
    for (std::size_t j = 0; j < g.ny; ++j)
      for (std::size_t i = 0; i < nx; ++i) {
        const double xf = double(i) * g.dx, xc = (double(i) + 0.5) * g.dx;
        // -d/dx (h u) at centres.
        const double dh = -H * U * k * (a * std::cos(2.0 * k * xc) - std::sin(k * xc));
        eh = std::max(eh, std::abs(t.dh[g.at(i, j)] - dh));
        // -(eps u du/dx + dp/dx) at west faces.
        const double dv1 = -(p.epsilon * U * std::cos(k * xf) * (-U * k * std::sin(k * xf)) +
                             H * a * k * std::cos(k * xf) / ps);
        e1 = std::max(e1, std::abs(t.dv1[g.at(i, j)] - dv1));
      }
    for (std::size_t j = 1; j < g.ny; ++j)
      for (std::size_t i = 0; i < nx; ++i) {
        const double xc = (double(i) + 0.5) * g.dx;
        e2 = std::max(e2, std::abs(t.dv2[g.at(i, j)] + U * std::cos(k * xc)));
      }
    err_h[level] = eh;
    err_v1[level] = e1;
    err_v2[level] = e2;
  }
  const double oh = std::log2(err_h[0] / err_h[1]);
  const double o1 = std::log2(err_v1[0] / err_v1[1]);
  const double o2 = std::log2(err_v2[0] / err_v2[1]);
  MESSAGE("observed orders: dh " << oh << ", dv1 " << o1 << ", dv2 " << o2);
  CHECK(oh >= 1.9);
  CHECK(o1 >= 1.9);
  CHECK(o2 >= 1.9);
}

TEST_CASE("geostrophic initialisation") {
  SUBCASE("constant pressure gives v = R") {
    const SrswParams p = make_params(SrswPhysical{});
    const auto s = geostrophic_init(std::vector<double>(p.grid.n_center(), 0.3), p);
    CHECK(max_abs(fluid_velocity(s, p).v1) < 1e-12);
    CHECK(max_abs(fluid_velocity(s, p).v2) < 1e-12);
    for (std::size_t c = 0; c < s.h.size(); ++c)
      CHECK(s.h[c] == doctest::Approx(p.b[c] + 0.3 * p.pressure_scale()));
  }

  SUBCASE("meridional sine converges at second order") {
    double err[2];
    for (int level = 0; level < 2; ++level) {
      const std::size_t ny = std::size_t{16} << level;
      const SrswParams p = f_plane(16, ny);
      const GridSpec& g = p.grid;
      const double ly = g.length_y();
      std::vector<double> p0(g.n_center());
      for (std::size_t j = 0; j < ny; ++j)
        for (std::size_t i = 0; i < g.nx; ++i) p0[g.at(i, j)] = std::sin(2.0 * pi * (double(j) + 0.5) * g.dy / ly);
      const auto u = fluid_velocity(geostrophic_init(p0, p), p);
      double e = 0.0;
      for (std::size_t j = 1; j + 1 < ny; ++j)
        for (std::size_t i = 0; i < g.nx; ++i) {
          const double y = (double(j) + 0.5) * g.dy;
          e = std::max(e, std::abs(u.v1[g.at(i, j)] + 2.0 * pi / ly * std::cos(2.0 * pi * y / ly)));
        }
      CHECK(max_abs(u.v2) < 1e-12);
      err[level] = e;
    }
    const double order = std::log2(err[0] / err[1]);
    MESSAGE("u1 order " << order);
    CHECK(order >= 1.9);
  }

  SUBCASE("balanced velocities cut the velocity tendency tenfold") {
    const SrswParams p = make_params(SrswPhysical{});
    const GridSpec& g = p.grid;
    std::vector<double> p0(g.n_center());
    for (std::size_t j = 0; j < g.ny; ++j)
      for (std::size_t i = 0; i < g.nx; ++i)
        p0[g.at(i, j)] = 0.5 * std::sin(2.0 * pi * (double(i) + 0.5) / double(g.nx)) *
                         std::sin(pi * (double(j) + 0.5) / double(g.ny));
    const auto bal = geostrophic_init(p0, p);
    SrswState still = bal;
    still.v1 = rest_state(p, 1.0).v1;
    still.v2 = rest_state(p, 1.0).v2;
    Tendencies tb, ts;
    tendencies(bal, p, nullptr, tb);
    tendencies(still, p, nullptr, ts);
    const double rb = std::max(max_abs(tb.dv1), max_abs(tb.dv2));
    const double rs = std::max(max_abs(ts.dv1), max_abs(ts.dv2));
    MESSAGE("max |dv/dt|: balanced " << rb << ", u = 0 " << rs);
    CHECK(rb * 10.0 <= rs);
  }

  SUBCASE("f = 0 is rejected") {
    SrswParams p = f_plane(16, 16);
    p.f_center[2] = 0.0;
    CHECK_THROWS_AS(geostrophic_init(std::vector<double>(p.grid.n_center(), 0.0), p), ConfigError);
  }
}

TEST_CASE("balanced single mode has a small height tendency") {
  const SrswParams p = f_plane();
  const GridSpec& g = p.grid;
  const double lx = g.length_x(), ly = g.length_y(), amp = 0.5;
  auto pfun = [&](double x, double y) { return amp * std::sin(2.0 * pi * x / lx) * std::sin(pi * y / ly); };
  std::vector<double> p0(g.n_center());
  for (std::size_t j = 0; j < g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i) p0[g.at(i, j)] = pfun((double(i) + 0.5) * g.dx, (double(j) + 0.5) * g.dy);
  const auto bal = geostrophic_init(p0, p);

  // Down-gradient flow u = -grad p / f of the same magnitude, no flow through walls.
  SrswState down = bal;
  for (std::size_t j = 0; j < g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i) {
      const double x = double(i) * g.dx, y = (double(j) + 0.5) * g.dy;
      const double dpdx = amp * 2.0 * pi / lx * std::cos(2.0 * pi * x / lx) * std::sin(pi * y / ly);
      down.v1[g.at(i, j)] = p.r1[j + 1] - p.epsilon * dpdx;
    }
  for (std::size_t j = 1; j < g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i) {
      const double x = (double(i) + 0.5) * g.dx, y = double(j) * g.dy;
      const double dpdy = amp * pi / ly * std::sin(2.0 * pi * x / lx) * std::cos(pi * y / ly);
      down.v2[g.at(i, j)] = p.r2[j] - p.epsilon * dpdy;
    }
  Tendencies tb, td;
  tendencies(bal, p, nullptr, tb);
  tendencies(down, p, nullptr, td);
  MESSAGE("max |dh/dt|: balanced " << max_abs(tb.dh) << ", down-gradient " << max_abs(td.dh));
  CHECK(max_abs(tb.dh) < 0.01 * max_abs(td.dh));
}

TEST_CASE("small perturbations of a balanced state stay bounded for 500 steps") {
  const Setup st = noisy_setup();
  const auto& m = as_srsw(st);
  const SrswParams& p = m.params();
  SrswState a = unpack(st.initial_truth, p.grid);
  SrswState b = a;
  RngStream r(5, {0, 0, Purpose::test, 0});
  for (double& h : b.h) h += 1e-3 * r.normal();
  const double d0 = 1e-3;
  for (int k = 0; k < 500; ++k) {
    a = rk4_step(a, p, nullptr);
    b = rk4_step(b, p, nullptr);
    REQUIRE(cfl_number(b, p) <= 0.5);
  }
  double d = 0.0;
  for (std::size_t c = 0; c < a.h.size(); ++c) d = std::max(d, std::abs(a.h[c] - b.h[c]));
  MESSAGE("max height difference after 500 steps " << d << " from " << d0);
  CHECK(d < 100.0 * d0);
}

TEST_CASE("replaying stored noise reproduces 50 particles bit for bit") {
  const Setup st = noisy_setup();
  const auto& m = *st.model;
  for (std::uint64_t particle = 0; particle < 50; ++particle) {
    NoisePath path;
    StateVector x = st.initial_truth;
    for (std::uint64_t k = 0; k < 3; ++k) {
      RngStream r(6, {particle, k, Purpose::forecast, 0});
      path.push_back(m.sample_noise(r));
      x = m.step(x, path.back());
    }
    REQUIRE(propagate(m, st.initial_truth, path) == x);
  }
}

TEST_CASE("failures: non-positive depth and CFL warnings") {
  const SrswParams p = make_params(SrswPhysical{});
  CHECK_THROWS_AS(rk4_step(rest_state(p, -1.0), p, nullptr), ModelError);
  CHECK_THROWS_AS(rk4_step(rest_state(p, 0.0), p, nullptr), ModelError);

  const SrswModel model(p, std::nullopt);
  SrswState fast = rest_state(p, 1000.0);
  const double u = 0.9 * std::min(p.grid.dx, p.grid.dy) / p.dt;
  for (std::size_t j = 0; j < p.grid.ny; ++j)
    for (std::size_t i = 0; i < p.grid.nx; ++i) fast.v1[p.grid.at(i, j)] += p.epsilon * u;
  model.step(pack(fast), NoiseIncrement{});
  CHECK(model.cfl_warnings() == 1);
  CHECK_THROWS_AS(model.step(pack(fast), NoiseIncrement{1.0}), ConfigError);
}

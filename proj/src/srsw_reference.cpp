// Straightforward per-point evaluation of the SRSW right-hand side. No
// scratch arrays, no threading; every quantity is recomputed where needed.

#include "pfsw/error.hpp"
#include "pfsw/srsw.hpp"

namespace pfsw {

Tendencies tendencies_reference(const SrswState& s, const SrswParams& prm,
                                const VelocityPair* xi) {
  const GridSpec& g = prm.grid;
  require(s.v1.size() == g.n_v1() && s.v2.size() == g.n_v2() && s.h.size() == g.n_center(),
          "srsw: state shape mismatch");
  const long nx = static_cast<long>(g.nx), ny = static_cast<long>(g.ny);
  const double eps = prm.epsilon, dx = g.dx, dy = g.dy;

  auto wrap = [nx](long i) { return static_cast<std::size_t>(((i % nx) + nx) % nx); };
  auto idx = [&](long i, long j) { return static_cast<std::size_t>(j) * g.nx + wrap(i); };
  // Free-slip: rows outside the channel mirror the nearest interior row.
  auto clamp_row = [ny](long j) { return j < 0 ? 0 : (j >= ny ? ny - 1 : j); };

  auto u1 = [&](long i, long j) {
    const long jc = clamp_row(j);
    return (s.v1[idx(i, jc)] - prm.r1[static_cast<std::size_t>(jc) + 1]) / eps;
  };
  auto u2 = [&](long i, long j) { return (s.v2[idx(i, j)] - prm.r2[static_cast<std::size_t>(j)]) / eps; };
  auto v1 = [&](long i, long j) { return s.v1[idx(i, j)]; };
  auto v2 = [&](long i, long j) { return s.v2[idx(i, j)]; };
  auto h = [&](long i, long j) { return s.h[idx(i, j)]; };
  auto p = [&](long i, long j) {
    return (s.h[idx(i, j)] - prm.b[idx(i, j)]) * (1.0 / prm.pressure_scale());
  };
  auto x1 = [&](long i, long j) { return xi ? xi->v1[idx(i, j)] : 0.0; };
  auto x2 = [&](long i, long j) { return xi ? xi->v2[idx(i, j)] : 0.0; };

  auto flux_x = [&](long i, long j) { return 0.5 * (h(i - 1, j) + h(i, j)) * (u1(i, j) + x1(i, j)); };
  auto flux_y = [&](long i, long j) {
    if (j == 0 || j == ny) return 0.0;
    return 0.5 * (h(i, j - 1) + h(i, j)) * (u2(i, j) + x2(i, j));
  };

  Tendencies t{std::vector<double>(g.n_v1(), 0.0), std::vector<double>(g.n_v2(), 0.0),
               std::vector<double>(g.n_center(), 0.0)};

  for (long j = 0; j < ny; ++j) {
    for (long i = 0; i < nx; ++i) {
      t.dh[idx(i, j)] =
          -((flux_x(i + 1, j) - flux_x(i, j)) / dx + (flux_y(i, j + 1) - flux_y(i, j)) / dy);

      const double u2bar = 0.25 * (u2(i - 1, j) + u2(i, j) + u2(i - 1, j + 1) + u2(i, j + 1));
      const double dudx = (u1(i + 1, j) - u1(i - 1, j)) / (2.0 * dx);
      const double dudy = (u1(i, j + 1) - u1(i, j - 1)) / (2.0 * dy);
      double d = -(eps * (u1(i, j) * dudx + u2bar * dudy) + -prm.f_center[static_cast<std::size_t>(j)] * u2bar +
                   (p(i, j) - p(i - 1, j)) / dx);
      if (xi) {
        const auto jr = static_cast<std::size_t>(j);
        const double dr1dy = (prm.r1[jr + 2] - prm.r1[jr]) / (2.0 * dy);
        const double xi2bar = 0.25 * (x2(i - 1, j) + x2(i, j) + x2(i - 1, j + 1) + x2(i, j + 1));
        const double v2bar = 0.25 * (v2(i - 1, j) + v2(i, j) + v2(i - 1, j + 1) + v2(i, j + 1));
        const double dv1dx = (v1(i + 1, j) - v1(i - 1, j)) / (2.0 * dx);
        const double dv1dy = eps * dudy + dr1dy;
        const double dxi1dx = (x1(i + 1, j) - x1(i - 1, j)) / (2.0 * dx);
        const double dxi2dx = 0.5 * ((x2(i, j) - x2(i - 1, j)) + (x2(i, j + 1) - x2(i - 1, j + 1))) / dx;
        d -= x1(i, j) * dv1dx + xi2bar * dv1dy + v1(i, j) * dxi1dx + v2bar * dxi2dx;
      }
      t.dv1[idx(i, j)] = d;
    }
  }

  for (long j = 1; j < ny; ++j) {
    for (long i = 0; i < nx; ++i) {
      const double u1bar = 0.25 * (u1(i, j - 1) + u1(i + 1, j - 1) + u1(i, j) + u1(i + 1, j));
      const double du2dx = (u2(i + 1, j) - u2(i - 1, j)) / (2.0 * dx);
      const double du2dy = (u2(i, j + 1) - u2(i, j - 1)) / (2.0 * dy);
      double d = -(eps * (u1bar * du2dx + u2(i, j) * du2dy) +
                   prm.f_face[static_cast<std::size_t>(j)] * u1bar + (p(i, j) - p(i, j - 1)) / dy);
      if (xi) {
        const double xi1bar = 0.25 * (x1(i, j - 1) + x1(i + 1, j - 1) + x1(i, j) + x1(i + 1, j));
        const double v1bar = 0.25 * (v1(i, j - 1) + v1(i + 1, j - 1) + v1(i, j) + v1(i + 1, j));
        const double dv2dx = (v2(i + 1, j) - v2(i - 1, j)) / (2.0 * dx);
        const double dv2dy = (v2(i, j + 1) - v2(i, j - 1)) / (2.0 * dy);
        const double dxi1dy = 0.5 * ((x1(i, j) - x1(i, j - 1)) + (x1(i + 1, j) - x1(i + 1, j - 1))) / dy;
        const double dxi2dy = (x2(i, j + 1) - x2(i, j - 1)) / (2.0 * dy);
        d -= xi1bar * dv2dx + x2(i, j) * dv2dy + v1bar * dxi1dy + v2(i, j) * dxi2dy;
      }
      t.dv2[idx(i, j)] = d;
    }
  }
  return t;
}

}  // namespace pfsw

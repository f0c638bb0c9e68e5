#pragma once

#include <cstddef>

namespace pfsw {

/// Arakawa C-grid on a channel: periodic in x, solid walls at y = 0 and
/// y = ny * dy. Spacings are in the solver's nondimensional length unit.
///
/// Index conventions (row-major, i fastest):
///   h  at cell centres  (i + 1/2, j + 1/2)  -> j * nx + i,  j in [0, ny)
///   v1 at west faces    (i,       j + 1/2)  -> j * nx + i,  j in [0, ny)
///   v2 at south faces   (i + 1/2, j      )  -> j * nx + i,  j in [0, ny]
/// Rows j = 0 and j = ny of v2 lie on the walls.
struct GridSpec {
  std::size_t nx = 64;
  std::size_t ny = 32;
  double dx = 1.0;
  double dy = 1.0;

  std::size_t n_center() const { return nx * ny; }
  std::size_t n_v1() const { return nx * ny; }
  std::size_t n_v2() const { return nx * (ny + 1); }
  std::size_t n_state() const { return n_v1() + n_v2() + n_center(); }

  std::size_t at(std::size_t i, std::size_t j) const { return j * nx + i; }
  std::size_t east(std::size_t i) const { return i + 1 == nx ? 0 : i + 1; }
  std::size_t west(std::size_t i) const { return i == 0 ? nx - 1 : i - 1; }

  double length_x() const { return static_cast<double>(nx) * dx; }
  double length_y() const { return static_cast<double>(ny) * dy; }

  /// Throws ConfigError unless nx, ny >= 8 and dx, dy > 0.
  void validate() const;
};

}  // namespace pfsw

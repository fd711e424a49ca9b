#include "cicontrol/grid.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <string>

#include "cicontrol/errors.hpp"

namespace cic {

std::vector<double> fft_wavenumbers(int n, double spacing) {
  std::vector<double> k(n);
  const double scale = 2.0 * std::numbers::pi / (n * spacing);
  for (int m = 0; m < n; ++m) k[m] = scale * (m < n / 2 ? m : m - n);
  return k;
}

Grid2D make_grid(const Extents& e, int nx, int nz) {
  auto check_count = [](int n, const char* name) {
    if (n < 16 || !std::has_single_bit(static_cast<unsigned>(n)))
      throw ConfigError(std::string("grid count ") + name + " = " + std::to_string(n) +
                        " must be a power of two >= 16");
  };
  check_count(nx, "nx");
  check_count(nz, "nz");
  for (double v : {e.qx_min, e.qx_max, e.qz_min, e.qz_max})
    if (!std::isfinite(v)) throw ConfigError("grid extents must be finite");
  if (!(e.qx_max > e.qx_min) || !(e.qz_max > e.qz_min))
    throw ConfigError("grid extents must satisfy min < max");

  Grid2D g;
  g.nx = nx;
  g.nz = nz;
  g.qx_min = e.qx_min;
  g.qx_max = e.qx_max;
  g.qz_min = e.qz_min;
  g.qz_max = e.qz_max;
  g.dx = (e.qx_max - e.qx_min) / nx;
  g.dz = (e.qz_max - e.qz_min) / nz;
  g.qx.resize(nx);
  g.qz.resize(nz);
  for (int i = 0; i < nx; ++i) g.qx[i] = e.qx_min + i * g.dx;
  for (int j = 0; j < nz; ++j) g.qz[j] = e.qz_min + j * g.dz;
  g.kx = fft_wavenumbers(nx, g.dx);
  g.kz = fft_wavenumbers(nz, g.dz);
  return g;
}

}  // namespace cic

#pragma once

#include <cstddef>
#include <vector>

namespace cic {

struct Extents {
  double qx_min, qx_max, qz_min, qz_max;
};

/// Uniform periodic grid over the relative-coordinate plane. Node (i, j)
/// sits at (qx[i], qz[j]); fields are stored row-major with index i * nz + j.
struct Grid2D {
  int nx = 0, nz = 0;
  double qx_min = 0, qx_max = 0, qz_min = 0, qz_max = 0;
  double dx = 0, dz = 0;
  std::vector<double> qx, qz;  // node coordinates
  std::vector<double> kx, kz;  // conjugate wavenumbers in FFT order

  std::size_t size() const { return static_cast<std::size_t>(nx) * nz; }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * nz + j; }
  double cell_area() const { return dx * dz; }
};

/// Throws ConfigError unless both counts are powers of two >= 16 and the
/// extents are finite and non-empty.
Grid2D make_grid(const Extents& extents, int nx, int nz);

/// Wavenumbers 2 pi m / (n d) in the standard DFT ordering (0, 1, ...,
/// n/2 - 1, -n/2, ..., -1). The most negative entry equals -pi / d.
std::vector<double> fft_wavenumbers(int n, double spacing);

}  // namespace cic

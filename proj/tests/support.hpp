#pragma once

#include <cmath>
#include <complex>
#include <random>

#include "cicontrol/grid.hpp"
#include "cicontrol/params.hpp"
#include "cicontrol/wavefunction.hpp"

namespace testing {

using cic::complex;

/// Model with hand-picked constants in the internal unit system (nm, us,
/// hbar = 1), for tests that should not depend on the equilibrium solver.
inline cic::InternalModel toy_model(double mu = 1e-3, double wx = 4.0, double wz = 8.0,
                                    double G_slope = 0.0, double F0 = 0.1, double U_ex = 0.0) {
  cic::InternalModel m;
  m.units = cic::UnitSystem::nm_us();
  m.mu = mu;
  m.omega_bar_x = wx;
  m.omega_bar_z = wz;
  m.z0 = 4000.0;
  m.X0 = -24.0;
  m.U_ex = U_ex;
  m.F0 = F0;
  m.G_slope = G_slope;
  m.charge = 1.5;
  return m;
}

/// Independent Gaussian builder: exp(-(x-x0)^2/(4 sx^2) - (z-z0)^2/(4 sz^2))
/// times a plane wave exp(i kx0 x), normalised by the analytic constant.
inline void fill_gaussian(std::span<complex> out, const cic::Grid2D& g, double x0, double z0,
                          double sx, double sz, double kx0 = 0.0) {
  const double pi = 3.14159265358979323846;
  const double amp = 1.0 / std::sqrt(2.0 * pi * sx * sz);
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.nz; ++j) {
      const double dx = g.qx[i] - x0, dz = g.qz[j] - z0;
      out[g.index(i, j)] = amp * std::exp(-dx * dx / (4 * sx * sx) - dz * dz / (4 * sz * sz)) *
                           std::polar(1.0, kx0 * g.qx[i]);
    }
}

inline double riemann_norm(const cic::WaveFunction& psi, const cic::Grid2D& g) {
  double s = 0.0;
  for (const complex& v : psi.data()) s += std::norm(v);
  return s * g.dx * g.dz;
}

inline std::mt19937_64 rng(unsigned long long seed) { return std::mt19937_64(seed); }

}  // namespace testing

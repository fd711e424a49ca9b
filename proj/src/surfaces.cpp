#include "cicontrol/surfaces.hpp"

#include <cmath>
#include <limits>

#include "cicontrol/errors.hpp"

namespace cic {

double harmonic_energy(const InternalModel& m, double qx, double qz) {
  return 0.5 * m.mu *
         (m.omega_bar_x * m.omega_bar_x * qx * qx + m.omega_bar_z * m.omega_bar_z * qz * qz);
}

double exchange_coupling(const InternalModel& m, double qz) { return m.U_ex + m.F0 * qz; }

double polarizability_splitting(const InternalModel& m, double qx) { return m.G_slope * qx; }

CoefficientFields eval_coefficients(const InternalModel& model, const Grid2D& grid) {
  CoefficientFields c;
  c.S.resize(grid.size());
  c.W.resize(grid.size());
  c.G.resize(grid.size());
  for (int i = 0; i < grid.nx; ++i) {
    const double qx = grid.qx[i];
    const double g = polarizability_splitting(model, qx);
    for (int j = 0; j < grid.nz; ++j) {
      const double qz = grid.qz[j];
      const auto n = grid.index(i, j);
      c.S[n] = harmonic_energy(model, qx, qz);
      c.W[n] = exchange_coupling(model, qz);
      c.G[n] = g;
    }
  }
  return c;
}

AdiabaticSurfaces eval_surfaces(const CoefficientFields& c) {
  AdiabaticSurfaces s;
  s.ci = {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  s.E_plus.resize(c.S.size());
  s.E_minus.resize(c.S.size());
  for (std::size_t n = 0; n < c.S.size(); ++n) {
    const double gap = std::hypot(c.G[n], c.W[n]);
    s.E_plus[n] = c.S[n] + gap;
    s.E_minus[n] = c.S[n] - gap;
  }
  return s;
}

AdiabaticSurfaces eval_surfaces(const CoefficientFields& c, const InternalModel& model) {
  AdiabaticSurfaces s = eval_surfaces(c);
  s.ci = ci_location(model);
  return s;
}

CiPoint ci_location(const InternalModel& model) {
  if (model.F0 == 0.0)
    throw ModelError("F_z(r0) = 0: exchange coupling is constant, no conical intersection");
  return {0.0, -model.U_ex / model.F0 + 0.0};  // + 0.0 folds -0 into +0
}

double mixing_angle(double W, double G) {
  if (W == 0.0 && G == 0.0) return 0.0;
  return 0.5 * std::atan2(W == 0.0 ? 0.0 : W, G);
}

MixingAngle mixing_angle(const CoefficientFields& c) {
  MixingAngle m;
  m.angle.resize(c.W.size());
  m.degenerate.assign(c.W.size(), 0);
  for (std::size_t n = 0; n < c.W.size(); ++n) {
    m.angle[n] = mixing_angle(c.W[n], c.G[n]);
    if (c.W[n] == 0.0 && c.G[n] == 0.0) m.degenerate[n] = 1;
  }
  return m;
}

AdiabaticStates adiabatic_states(const CoefficientFields& c) {
  AdiabaticStates s;
  s.plus.resize(c.W.size());
  s.minus.resize(c.W.size());
  for (std::size_t n = 0; n < c.W.size(); ++n) {
    const double L = mixing_angle(c.W[n], c.G[n]);
    const double cl = std::cos(L), sl = std::sin(L);
    s.plus[n] = {cl, sl};
    s.minus[n] = {-sl, cl};
  }
  return s;
}

}  // namespace cic

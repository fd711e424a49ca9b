#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "cicontrol/grid.hpp"
#include "cicontrol/params.hpp"

namespace cic {

/// Coefficients of H_spin = S I + W Sx + G Sz tabulated on a grid (dense,
/// row-major like every field). Energies in the model's units.
struct CoefficientFields {
  std::vector<double> S, W, G;
};

struct CiPoint {
  double qx;
  double qz;
};

struct AdiabaticSurfaces {
  std::vector<double> E_plus, E_minus;
  CiPoint ci;
};

struct MixingAngle {
  std::vector<double> angle;          // Lambda in (-pi/2, pi/2]
  std::vector<std::uint8_t> degenerate;  // 1 where W = G = 0 (angle set to 0)
};

/// Pointwise adiabatic eigenvectors in the {|pi1>, |pi2>} basis:
/// phi+ = (cos L, sin L), phi- = (-sin L, cos L).
struct AdiabaticStates {
  std::vector<std::array<double, 2>> plus, minus;
};

/// Harmonic part S = mu/2 (wx^2 qx^2 + wz^2 qz^2).
double harmonic_energy(const InternalModel& m, double qx, double qz);
/// Exchange coupling W = U_ex + F0 qz.
double exchange_coupling(const InternalModel& m, double qz);
/// Polarizability splitting G = alpha^2 rho- X0 qx.
double polarizability_splitting(const InternalModel& m, double qx);

CoefficientFields eval_coefficients(const InternalModel& model, const Grid2D& grid);

/// E+- = S +- sqrt(G^2 + W^2). The overload taking the model also attaches
/// the CI location; without it the location is NaN.
AdiabaticSurfaces eval_surfaces(const CoefficientFields& c, const InternalModel& model);
AdiabaticSurfaces eval_surfaces(const CoefficientFields& c);

/// (0, -U_ex / F0). Throws ModelError when F0 = 0.
CiPoint ci_location(const InternalModel& model);

/// Lambda = atan2(W, G) / 2 with W = 0 treated as +0, so the angle stays in
/// (-pi/2, pi/2] and the eigenvector sign convention is fixed globally.
double mixing_angle(double W, double G);
MixingAngle mixing_angle(const CoefficientFields& c);

AdiabaticStates adiabatic_states(const CoefficientFields& c);

}  // namespace cic

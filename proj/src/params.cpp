#include "cicontrol/params.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "cicontrol/errors.hpp"

namespace cic {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require(bool ok, const std::string& what) {
  if (!ok) throw ModelError(what);
}

}  // namespace

void PhysicalParams::validate() const {
  require(std::isfinite(m) && m > 0.0, "mass must be positive");
  require(std::isfinite(omega_x) && omega_x > 0.0, "omega_x must be positive");
  require(std::isfinite(omega_z) && omega_z > 0.0, "omega_z must be positive");
  require(omega_x > omega_z, "model requires omega_x > omega_z");
  require(std::isfinite(rho_down) && std::isfinite(rho_up), "polarizabilities must be finite");
  require(std::isfinite(u0) && std::isfinite(alpha), "fields must be finite");
  require(std::isfinite(U_ex_r0) && std::isfinite(F0), "exchange parameters must be finite");
  require(constants.hbar > 0.0 && constants.e > 0.0 && constants.k > 0.0,
          "physical constants must be positive");
  if (X0_override) require(std::isfinite(*X0_override), "X0 override must be finite");
}

PhysicalParams PhysicalParams::strontium_reference() {
  PhysicalParams p;
  p.m = 87.9 * 1.66e-27;
  p.rho_down = 8.9e-30;
  p.rho_up = -3.8e-31;
  p.omega_x = kTwoPi * 1.6e6;
  p.omega_z = kTwoPi * 1.0e6;
  p.u0 = 2.529;
  p.alpha = 8.17e8;
  p.U_ex_r0 = 0.0;
  p.F0 = p.constants.hbar * kTwoPi * 20e6 / 1e-6;
  p.X0_override = -0.024e-6;
  return p;
}

double equilibrium_separation(double coulomb, double stiffness, double lo, double hi) {
  if (!(coulomb > 0.0) || !(stiffness > 0.0))
    throw ModelError("equilibrium separation requires positive Coulomb and trap terms");
  // dV/dz = stiffness z - coulomb / z^2 is strictly increasing for z > 0.
  auto slope = [&](double z) { return stiffness * z - coulomb / (z * z); };
  constexpr int kMaxWiden = 60;
  int widen = 0;
  while (slope(lo) > 0.0 && widen++ < kMaxWiden) lo *= 0.1;
  while (slope(hi) < 0.0 && widen++ < kMaxWiden) hi *= 10.0;
  if (!(slope(lo) <= 0.0 && slope(hi) >= 0.0))
    throw ModelError("no positive root of dV_rel/dz could be bracketed");

  // Runs to machine precision, well below the 1e-12 relative requirement.
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (slope(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double com_equilibrium(double drive, double stiffness) {
  if (stiffness == 0.0 || !std::isfinite(stiffness))
    throw ModelError("degenerate trap: M wx^2 - 2 alpha^2 rho+ vanishes");
  return -drive / stiffness;
}

double relative_potential_axial(const PhysicalParams& p, double z) {
  const double mu = 0.5 * p.m;
  const double ke2 = p.constants.k * p.constants.e * p.constants.e;
  return 0.5 * mu * p.omega_z * p.omega_z * z * z + ke2 / std::abs(z);
}

double solve_z0(const PhysicalParams& p) {
  p.validate();
  const double mu = 0.5 * p.m;
  const double ke2 = p.constants.k * p.constants.e * p.constants.e;
  const double stiffness = mu * p.omega_z * p.omega_z;
  const double z0 = equilibrium_separation(ke2, stiffness, 0.1e-6, 100e-6);
  const double closed = std::cbrt(ke2 / stiffness);
  if (std::abs(z0 - closed) > 1e-9 * closed)
    throw ModelError("z0 bisection disagrees with the closed form");
  return z0;
}

double solve_X0(const PhysicalParams& p) {
  p.validate();
  const double M = 2.0 * p.m;
  const double rho_plus = p.rho_up + p.rho_down;
  const double stiffness = M * p.omega_x * p.omega_x - 2.0 * p.alpha * p.alpha * rho_plus;
  return com_equilibrium(2.0 * p.constants.e * p.u0, stiffness);
}

EffectiveFrequencies effective_frequencies(const PhysicalParams& p, double z0) {
  if (!(z0 > 0.0)) throw ModelError("z0 must be positive");
  const double mu = 0.5 * p.m;
  const double rho_plus = p.rho_up + p.rho_down;
  const double coulomb = p.constants.k * p.constants.e * p.constants.e / (mu * z0 * z0 * z0);
  const double wx2 =
      p.omega_x * p.omega_x - p.alpha * p.alpha * rho_plus / (2.0 * mu) - coulomb;
  const double wz2 = p.omega_z * p.omega_z + 2.0 * coulomb;
  if (!(wx2 > 0.0)) throw ModelError("effective transverse frequency squared is not positive");
  if (!(wz2 > 0.0)) throw ModelError("effective axial frequency squared is not positive");
  return {std::sqrt(wx2), std::sqrt(wz2)};
}

DerivedGeometry derive_geometry(const PhysicalParams& p) {
  p.validate();
  DerivedGeometry g;
  g.mu = 0.5 * p.m;
  g.M = 2.0 * p.m;
  g.rho_plus = p.rho_up + p.rho_down;
  g.rho_minus = p.rho_up - p.rho_down;
  g.z0 = solve_z0(p);
  g.X0_solved = solve_X0(p);
  g.X0_from_override = p.X0_override.has_value();
  g.X0 = g.X0_from_override ? *p.X0_override : g.X0_solved;
  const auto w = effective_frequencies(p, g.z0);
  g.omega_bar_x = w.omega_bar_x;
  g.omega_bar_z = w.omega_bar_z;
  return g;
}

InternalModel InternalModel::in_units(const UnitSystem& to) const {
  const UnitSystem& from = units;
  const double L = from.length / to.length;
  const double T = from.time / to.time;
  const double E = from.energy / to.energy;
  const double Mass = from.mass() / to.mass();

  InternalModel out;
  out.units = to;
  out.mu = mu * Mass;
  out.omega_bar_x = omega_bar_x / T;
  out.omega_bar_z = omega_bar_z / T;
  out.z0 = z0 * L;
  out.X0 = X0 * L;
  out.U_ex = U_ex * E;
  out.F0 = F0 * E / L;
  out.G_slope = G_slope * E / L;
  out.charge = charge * E / L;
  return out;
}

InternalModel to_internal(const PhysicalParams& p, const DerivedGeometry& g,
                          const UnitSystem& units) {
  InternalModel si;
  si.units = UnitSystem::si();
  si.mu = g.mu;
  si.omega_bar_x = g.omega_bar_x;
  si.omega_bar_z = g.omega_bar_z;
  si.z0 = g.z0;
  si.X0 = g.X0;
  si.U_ex = p.U_ex_r0;
  si.F0 = p.F0;
  si.G_slope = p.alpha * p.alpha * g.rho_minus * g.X0;
  si.charge = p.constants.e;
  return si.in_units(units);
}

InternalModel from_internal(const InternalModel& model) {
  return model.in_units(UnitSystem::si());
}

}  // namespace cic

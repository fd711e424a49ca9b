#pragma once

#include <optional>

namespace cic {

/// CODATA 2018 values. Pinned so that outputs are bit-reproducible.
struct PhysicalConstants {
  double hbar = 1.054571817e-34;    // J s
  double e = 1.602176634e-19;       // C
  double k = 8.9875517923e9;        // N m^2 / C^2
};

/// Raw trap/ion parameters in SI units.
struct PhysicalParams {
  double m = 0.0;          // ion mass [kg]
  double rho_down = 0.0;   // polarizability of |nS> [C^2 m^2 / J]
  double rho_up = 0.0;     // polarizability of |nP> [C^2 m^2 / J]
  double omega_x = 0.0;    // transverse trap frequency [rad/s]
  double omega_z = 0.0;    // axial trap frequency [rad/s]
  double u0 = 0.0;         // static transverse field [V/m]
  double alpha = 0.0;      // rf field gradient [V/m^2]
  double U_ex_r0 = 0.0;    // exchange energy at the equilibrium separation [J]
  double F0 = 0.0;         // exchange gradient dU_ex/dz at r0 [J/m]
  /// When set, used as the transverse centre-of-mass equilibrium instead of
  /// the value solved from u0.
  std::optional<double> X0_override;
  PhysicalConstants constants;

  /// Throws ModelError when an invariant is violated.
  void validate() const;

  /// 88Sr+ n=50 parameter set of the reference configuration (X0 override
  /// set to -0.024 um).
  static PhysicalParams strontium_reference();
};

struct DerivedGeometry {
  double mu = 0.0;           // reduced mass [kg]
  double M = 0.0;            // total mass [kg]
  double z0 = 0.0;           // axial equilibrium separation [m]
  double X0 = 0.0;           // transverse CoM equilibrium used by the model [m]
  double X0_solved = 0.0;    // stationary point of V_CoM for the given u0 [m]
  bool X0_from_override = false;
  double omega_bar_x = 0.0;  // [rad/s]
  double omega_bar_z = 0.0;  // [rad/s]
  double rho_plus = 0.0;
  double rho_minus = 0.0;
};

/// Positive root of d/dz [stiffness z^2 / 2 + coulomb / z] = 0, found by
/// bisection. Unit-agnostic; `lo`/`hi` are the initial bracket which is
/// widened geometrically if it does not contain the root.
double equilibrium_separation(double coulomb, double stiffness, double lo, double hi);

/// Stationary point of stiffness X^2 / 2 + drive X.
double com_equilibrium(double drive, double stiffness);

/// Axial equilibrium separation z0 [m]. Bisection on dV_rel/dz over
/// [0.1, 100] um, cross-checked against (k e^2 / (mu wz^2))^(1/3).
double solve_z0(const PhysicalParams& p);

/// Transverse centre-of-mass equilibrium X0 = -2 e u0 / (M wx^2 - 2 alpha^2 rho+).
double solve_X0(const PhysicalParams& p);

struct EffectiveFrequencies {
  double omega_bar_x;
  double omega_bar_z;
};

EffectiveFrequencies effective_frequencies(const PhysicalParams& p, double z0);

DerivedGeometry derive_geometry(const PhysicalParams& p);

/// Relative-coordinate potential along x = 0: mu wz^2 z^2 / 2 + k e^2 / |z|.
double relative_potential_axial(const PhysicalParams& p, double z);

/// Unit system for model constants. The internal systems set hbar = 1, so
/// their energy unit is hbar / time and their mass unit hbar * time / length^2.
struct UnitSystem {
  double length = 1.0;  // [m]
  double time = 1.0;    // [s]
  double energy = 1.0;  // [J]

  double mass() const { return energy * time * time / (length * length); }

  static UnitSystem si() { return {}; }
  static UnitSystem natural(double length, double time,
                            double hbar = PhysicalConstants{}.hbar) {
    return {length, time, hbar / time};
  }
  /// nm, us, hbar = 1 (energies in hbar/us, i.e. rad/us).
  static UnitSystem nm_us() { return natural(1e-9, 1e-6); }
};

/// All constants of the effective relative-coordinate model expressed in a
/// given unit system. The control field stays in V/m at every level; the
/// charge coupling carries the conversion.
struct InternalModel {
  UnitSystem units;
  double mu = 0.0;            // mass
  double omega_bar_x = 0.0;   // 1/time
  double omega_bar_z = 0.0;   // 1/time
  double z0 = 0.0;            // length
  double X0 = 0.0;            // length
  double U_ex = 0.0;          // energy
  double F0 = 0.0;            // energy / length
  double G_slope = 0.0;       // alpha^2 rho- X0, energy / length
  double charge = 0.0;        // e, energy / (length * V/m)

  /// Re-express every field in another unit system.
  InternalModel in_units(const UnitSystem& target) const;
};

InternalModel to_internal(const PhysicalParams& p, const DerivedGeometry& g,
                          const UnitSystem& units = UnitSystem::nm_us());

/// SI view of an internal model (energies in J, masses in kg, ...).
InternalModel from_internal(const InternalModel& model);

}  // namespace cic

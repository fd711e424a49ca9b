#pragma once

#include <functional>
#include <span>
#include <vector>

#include "cicontrol/fft.hpp"
#include "cicontrol/grid.hpp"
#include "cicontrol/params.hpp"
#include "cicontrol/surfaces.hpp"
#include "cicontrol/wavefunction.hpp"

namespace cic {

/// Real control field sampled at the midpoints of a uniform time grid:
/// sample n acts on [n dt, (n + 1) dt]. Values are in V/m.
class ControlField {
 public:
  ControlField() = default;
  /// nt = round(t_final / dt) zero samples; the horizon is adjusted to nt dt.
  ControlField(double t_final, double dt);
  ControlField(std::vector<double> samples, double dt);

  template <class F>
  static ControlField sampled(F&& f, double t_final, double dt) {
    ControlField u(t_final, dt);
    for (long n = 0; n < u.steps(); ++n) u.samples_[n] = f(u.midpoint(n));
    return u;
  }

  long steps() const { return static_cast<long>(samples_.size()); }
  double dt() const { return dt_; }
  double t_final() const { return dt_ * static_cast<double>(samples_.size()); }
  double t_requested() const { return t_requested_; }
  double midpoint(long n) const { return (static_cast<double>(n) + 0.5) * dt_; }
  double time(long n) const { return static_cast<double>(n) * dt_; }

  double& operator[](long n) { return samples_[n]; }
  double operator[](long n) const { return samples_[n]; }
  std::span<const double> samples() const { return samples_; }
  std::span<double> samples() { return samples_; }

  /// sum u_n^2 dt.
  double fluence() const;

 private:
  std::vector<double> samples_;
  double dt_ = 0.0;
  double t_requested_ = 0.0;
};

/// Position dependence of the control Hamiltonian H_u = u c(qx) with
/// c(qx) = offset + slope qx. For a field on the first ion,
/// offset = e X0 and slope = -e / 2.
struct ControlCoupling {
  double offset = 0.0;
  double slope = 0.0;

  static ControlCoupling single_ion(const InternalModel& m) {
    return {m.charge * m.X0, -0.5 * m.charge};
  }
  double at(double qx) const { return offset + slope * qx; }
};

enum class Direction { forward, backward };

/// exp(-i (kx^2 + kz^2) dt / (2 mu)) on the FFT-ordered wavenumber grid.
ComplexBuffer kinetic_phase(const Grid2D& grid, double mu, double dt);

/// exp(-i dt [(S + u c) I + W Sx + G Sz]) applied pointwise in closed form.
/// Reference implementation; the propagator uses precomputed tables.
void potential_step(WaveFunction& psi, const CoefficientFields& coeffs, const Grid2D& grid,
                    const ControlCoupling& coupling, double u_mid, double dt);

/// Scalar counterpart: exp(-i dt (V + u c)).
void potential_step(WaveFunction& phi, std::span<const double> potential, const Grid2D& grid,
                    const ControlCoupling& coupling, double u_mid, double dt);

/// Second-order Strang split-operator propagator on a periodic grid, for the
/// two-component spinor model or a single adiabatic surface.
///
/// One step is K/2 P(u) K/2, where K is the kinetic propagator applied in
/// momentum space and P(u) the pointwise potential propagator including the
/// control term at the midpoint field value. Every operation is unitary and
/// has an exact inverse (Direction::backward).
class SplitOperatorPropagator {
 public:
  /// Spinor model with coefficient fields S, W, G.
  SplitOperatorPropagator(const Grid2D& grid, double mu, double dt,
                          const CoefficientFields& coeffs, ControlCoupling coupling);
  /// Single-surface model with potential V (e.g. E-).
  SplitOperatorPropagator(const Grid2D& grid, double mu, double dt,
                          std::vector<double> potential, ControlCoupling coupling);

  int components() const { return components_; }
  const Grid2D& grid() const { return grid_; }
  double dt() const { return dt_; }
  double mu() const { return mu_; }
  const ControlCoupling& coupling() const { return coupling_; }
  /// c(qx_i) for each grid row.
  std::span<const double> control_row() const { return control_row_; }

  /// Kinetic propagator for `fraction` of a step (0.5 or 1).
  void kinetic(WaveFunction& psi, double fraction, Direction d) const;
  /// Field-independent pointwise propagator exp(-i H_spin dt).
  void static_potential(WaveFunction& psi, Direction d) const;
  /// exp(-/+ i u c(qx) dt). Commutes with static_potential.
  void control_phase(WaveFunction& psi, double u, Direction d) const;
  /// static_potential followed by control_phase in one pass.
  void potential(WaveFunction& psi, double u, Direction d) const;

  void step(WaveFunction& psi, double u) const;
  /// Exact inverse of step(psi, u).
  void step_backward(WaveFunction& psi, double u) const;

  /// Optional cos^8 absorbing mask over `width` (length units) at every edge,
  /// applied after each full step. Breaks unitarity; off by default.
  void enable_absorbing_mask(double width);
  void apply_mask(WaveFunction& psi) const;
  bool has_mask() const { return !mask_.empty(); }

 private:
  void check(const WaveFunction& psi) const;
  void build_kinetic();

  Grid2D grid_;
  double mu_;
  double dt_;
  int components_;
  ControlCoupling coupling_;
  FftPlan2D plan_;
  ComplexBuffer kin_half_, kin_full_;  // include the 1/(nx nz) FFT normalisation
  // Spinor: P = phase * [[c - i sg, -i sw], [-i sw, c + i sg]]. Scalar: P = phase.
  ComplexBuffer phase_;
  std::vector<double> cos_, sin_w_, sin_g_;
  std::vector<double> control_row_;
  std::vector<double> mask_;
};

/// Snapshot hook: called with (step index n, time n dt, state at t_n).
using SnapshotObserver = std::function<void(long, double, const WaveFunction&)>;

struct RecordSpec {
  long every = 0;                 // snapshot cadence in steps; 0 = endpoints only
  SnapshotObserver observer;      // optional
};

struct PropagationRecord {
  std::vector<double> t;
  std::vector<double> qx_mean;
  std::vector<double> norm;
};

struct PropagationResult {
  WaveFunction final_state;
  PropagationRecord record;
};

/// Applies field.steps() Strang steps to psi0. Snapshots (record + observer)
/// at t = 0, every `spec.every` steps and at t_f. Throws NumericalBlowup
/// naming the step when a non-finite norm is detected (checked every 100 steps).
PropagationResult propagate_forward(const SplitOperatorPropagator& prop, WaveFunction psi0,
                                    const ControlField& field, const RecordSpec& spec = {});

/// Inverse evolution from t_f back to 0 under the same field. Snapshots are
/// reported in decreasing time order.
PropagationResult propagate_backward(const SplitOperatorPropagator& prop, WaveFunction psi_tf,
                                     const ControlField& field, const RecordSpec& spec = {});

/// Backward costate evolution from lambda(t_f). For a Hermitian generator and
/// real diagonal control operator this is the inverse evolution under u_bar.
inline PropagationResult propagate_costate_backward(const SplitOperatorPropagator& prop,
                                                    WaveFunction lambda_tf,
                                                    const ControlField& u_bar,
                                                    const RecordSpec& spec = {}) {
  return propagate_backward(prop, std::move(lambda_tf), u_bar, spec);
}

}  // namespace cic

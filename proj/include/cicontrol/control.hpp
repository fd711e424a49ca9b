#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cicontrol/grid.hpp"
#include "cicontrol/params.hpp"
#include "cicontrol/propagator.hpp"
#include "cicontrol/wavefunction.hpp"

namespace cic {

enum class Mode { spinor, bo };

/// Centre of a motional Gaussian in internal length units. The widths follow
/// from (mu, omega_bar_x, omega_bar_z).
struct PacketCenter {
  double qx = 0.0;
  double qz = 0.0;
};
using TargetSpec = PacketCenter;

/// Position standard deviations sqrt(hbar / (2 mu omega_bar)) of the
/// harmonic ground-state density.
struct PacketWidths {
  double x, z;
};
PacketWidths packet_widths(const InternalModel& model);

/// One-component Gaussian
///   l_xz exp[-mu/2 (wx (qx - qx0)^2 + wz (qz - qz0)^2)],
/// renormalised with the grid quadrature. Throws ConfigError when the centre
/// is closer than 4 sigma to an edge.
WaveFunction gaussian_packet(const InternalModel& model, const Grid2D& grid, PacketCenter c);

/// Initial state: the Gaussian on |pi2> (spinor) or the Gaussian itself (BO).
WaveFunction initial_packet(const InternalModel& model, const Grid2D& grid, PacketCenter c,
                            Mode mode);

/// O psi: every spin component replaced by phi_d <phi_d|psi_c>.
WaveFunction apply_target_operator(const WaveFunction& psi, const WaveFunction& target,
                                   const Grid2D& grid);

/// <psi|O|psi> = sum_c |<phi_d|psi_c>|^2.
double j1_terminal(const WaveFunction& psi, const WaveFunction& target, const Grid2D& grid);

/// alpha0 sum u_n^2 dt (fields in V/m, time in the model's time unit).
double j2_fluence(const ControlField& u, double alpha0);

struct McaConfig {
  double eta = 1.0;
  double zeta = 1.0;
  double alpha0 = 0.01;
  int max_iters = 200;
  double stop_tol = 1e-6;     // on J^k - J^(k-1)
  int stop_patience = 5;      // consecutive iterations below stop_tol
  double fixed_point_tol = 1e-9;  // max |u^k - u^(k-1)| [V/m] for immediate stop
  double monotonicity_tol = 1e-6;

  /// Throws ConfigError unless eta, zeta in [0, 2] and alpha0 > 0.
  void validate() const;
};

/// Im <lambda|N|psi> with N = -c(qx) (internal units, hbar = 1), evaluated
/// by grid quadrature over both spin components.
double control_overlap_imag(const WaveFunction& lambda, const WaveFunction& psi,
                            std::span<const double> control_row, const Grid2D& grid);

/// u_bar = (1 - eta) u_prev - (eta / alpha0) Im <lambda|N|psi_prev>.
double backward_field_update(const WaveFunction& lambda, const WaveFunction& psi_prev,
                             double u_prev, const McaConfig& cfg,
                             std::span<const double> control_row, const Grid2D& grid);

/// u = (1 - zeta) u_bar - (zeta / alpha0) Im <lambda|N|psi>.
double forward_field_update(const WaveFunction& lambda, const WaveFunction& psi, double u_bar,
                            const McaConfig& cfg, std::span<const double> control_row,
                            const Grid2D& grid);

/// Time-discrete counterpart of the field updates used by run_mca.
///
/// For one Strang step the objective gained by replacing the reference field
/// v with w is 2 Re[g(w - v) - g(0)] - alpha0 dt (w^2 - v^2), where
/// g(d) = sum_i z_i exp(-i d c_i dt) and z_i are the row sums of
/// conj(lambda) psi taken at the point of the step where the control phase
/// acts. The update solves
///     w = (1 - mix) v + mix Re[g(w - v) - g(0)] / (alpha0 dt (w - v)),
/// which gains alpha0 dt (2/mix - 1) (w - v)^2 >= 0 for mix in (0, 2], and
/// reduces to the continuous update formula as dt -> 0 (its explicit
/// first iterate is exactly that formula).
class StepFieldSolver {
 public:
  StepFieldSolver(std::span<const double> control_row, double dt, double alpha0);

  /// Row sums z_i = dx dz sum_{j, spin} conj(lambda) psi.
  void accumulate(const WaveFunction& lambda, const WaveFunction& psi, const Grid2D& grid);
  /// Continuous-time value (1 - mix) v + (mix / alpha0) sum_i c_i Im z_i.
  double explicit_update(double v, double mix) const;
  /// A root of the discrete equation, bracketed by walking away from the
  /// explicit value against the sign of the residual and refined with
  /// TOMS 748. Every root satisfies the gain bound above. The root is unique
  /// when mix * lipschitz_bound() < 1.
  double solve(double v, double mix) const;
  /// Upper bound on |dh/dw|: dt sum_i |z_i| c_i^2 / (2 alpha0).
  double lipschitz_bound() const;
  /// 2 Re[g(w - v) - g(0)] - alpha0 dt (w^2 - v^2).
  double gain(double w, double v) const;

 private:
  double h(double delta) const;  // Re[g(d) - g(0)] / (alpha0 dt d)

  std::vector<double> c_;
  std::vector<complex> z_;
  double dt_;
  double alpha0_;
};

struct McaState {
  int iteration = 0;
  ControlField u;       // u^k
  ControlField u_bar;   // u_bar^k
  std::vector<double> J, J1, J2;
  bool converged = false;
  std::string stop_reason;
  double reconstruction_error = 0.0;  // max |psi(0) recovered - psi0| over backward sweeps
};

using IterationCallback = std::function<void(const McaState&)>;

/// Monotonically convergent optimisation of the terminal projector
/// expectation minus the fluence penalty. The propagator fixes the model
/// (spinor or single surface); `target` is the one-component motional target
/// phi_d. Iteration 0 evaluates the guess. Throws MonotonicityFault when J
/// decreases by more than cfg.monotonicity_tol and NumericalBlowup on
/// non-finite J.
McaState run_mca(const SplitOperatorPropagator& prop, const WaveFunction& psi0,
                 const WaveFunction& target, const ControlField& guess, const McaConfig& cfg,
                 const IterationCallback& on_iteration = {});

/// Smallest k with J^k - J^0 >= fraction (max J - J^0); 0 for a flat history.
int plateau_iteration(std::span<const double> J, double fraction = 0.99);

/// `amplitude` on [start, start + duration], zero elsewhere.
ControlField rectangular_pulse(double amplitude, double start, double duration, double t_final,
                               double dt);

/// E0 exp(-(t - t0)^2 / (2 sigma^2)).
ControlField gaussian_pulse(double E0, double t0, double sigma, double t_final, double dt);

}  // namespace cic

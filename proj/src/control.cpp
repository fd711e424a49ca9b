#include "cicontrol/control.hpp"

#include <algorithm>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <cstdint>
#include <numbers>

#include "cicontrol/errors.hpp"

namespace cic {

PacketWidths packet_widths(const InternalModel& m) {
  // hbar = 1 in the internal unit system.
  return {std::sqrt(1.0 / (2.0 * m.mu * m.omega_bar_x)),
          std::sqrt(1.0 / (2.0 * m.mu * m.omega_bar_z))};
}

WaveFunction gaussian_packet(const InternalModel& m, const Grid2D& g, PacketCenter c) {
  const PacketWidths w = packet_widths(m);
  const double last_x = g.qx_max - g.dx;
  const double last_z = g.qz_max - g.dz;
  if (c.qx - 4.0 * w.x < g.qx_min || c.qx + 4.0 * w.x > last_x || c.qz - 4.0 * w.z < g.qz_min ||
      c.qz + 4.0 * w.z > last_z)
    throw ConfigError("packet centre lies within 4 sigma of the grid edge");

  const double pi = std::numbers::pi;
  const double ell =
      std::pow(m.mu * m.mu * m.omega_bar_x * m.omega_bar_z / (pi * pi), 0.25);
  WaveFunction phi = WaveFunction::scalar(g);
  auto comp = phi.component(0);
  for (int i = 0; i < g.nx; ++i) {
    const double dx = g.qx[i] - c.qx;
    for (int j = 0; j < g.nz; ++j) {
      const double dz = g.qz[j] - c.qz;
      comp[g.index(i, j)] =
          ell * std::exp(-0.5 * m.mu * (m.omega_bar_x * dx * dx + m.omega_bar_z * dz * dz));
    }
  }
  normalize(phi, g);
  return phi;
}

WaveFunction initial_packet(const InternalModel& m, const Grid2D& g, PacketCenter c, Mode mode) {
  WaveFunction phi = gaussian_packet(m, g, c);
  if (mode == Mode::bo) return phi;
  WaveFunction psi = WaveFunction::spinor(g);
  std::ranges::copy(phi.component(0), psi.component(1).begin());
  return psi;
}

namespace {

complex overlap(std::span<const complex> a, std::span<const complex> b, double area) {
  complex s = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) s += std::conj(a[n]) * b[n];
  return s * area;
}

void check_target(const WaveFunction& psi, const WaveFunction& target) {
  if (target.components() != 1 || target.nx() != psi.nx() || target.nz() != psi.nz())
    throw std::invalid_argument("target must be a one-component state on the same grid");
}

}  // namespace

WaveFunction apply_target_operator(const WaveFunction& psi, const WaveFunction& target,
                                   const Grid2D& g) {
  check_target(psi, target);
  WaveFunction out(psi.components(), psi.nx(), psi.nz());
  const auto phi = target.component(0);
  for (int c = 0; c < psi.components(); ++c) {
    const complex amp = overlap(phi, psi.component(c), g.cell_area());
    auto dst = out.component(c);
    for (std::size_t n = 0; n < phi.size(); ++n) dst[n] = amp * phi[n];
  }
  return out;
}

double j1_terminal(const WaveFunction& psi, const WaveFunction& target, const Grid2D& g) {
  check_target(psi, target);
  double s = 0.0;
  for (int c = 0; c < psi.components(); ++c)
    s += std::norm(overlap(target.component(0), psi.component(c), g.cell_area()));
  return s;
}

double j2_fluence(const ControlField& u, double alpha0) { return alpha0 * u.fluence(); }

void McaConfig::validate() const {
  if (!(eta >= 0.0 && eta <= 2.0)) throw ConfigError("eta must lie in [0, 2]");
  if (!(zeta >= 0.0 && zeta <= 2.0)) throw ConfigError("zeta must lie in [0, 2]");
  if (!(alpha0 > 0.0)) throw ConfigError("alpha0 must be positive");
  if (max_iters < 0) throw ConfigError("max_iters must be non-negative");
  if (stop_patience < 1) throw ConfigError("stop_patience must be at least 1");
}

double control_overlap_imag(const WaveFunction& lambda, const WaveFunction& psi,
                            std::span<const double> row, const Grid2D& g) {
  if (!lambda.same_shape(psi)) throw std::invalid_argument("lambda/psi shape mismatch");
  complex s = 0.0;
  for (int c = 0; c < psi.components(); ++c) {
    const auto l = lambda.component(c);
    const auto p = psi.component(c);
    for (int i = 0; i < g.nx; ++i) {
      complex r = 0.0;
      for (int j = 0; j < g.nz; ++j) {
        const auto n = g.index(i, j);
        r += std::conj(l[n]) * p[n];
      }
      s -= row[i] * r;  // N = -c
    }
  }
  return (s * g.cell_area()).imag();
}

double backward_field_update(const WaveFunction& lambda, const WaveFunction& psi_prev,
                             double u_prev, const McaConfig& cfg, std::span<const double> row,
                             const Grid2D& g) {
  return (1.0 - cfg.eta) * u_prev -
         cfg.eta / cfg.alpha0 * control_overlap_imag(lambda, psi_prev, row, g);
}

double forward_field_update(const WaveFunction& lambda, const WaveFunction& psi, double u_bar,
                            const McaConfig& cfg, std::span<const double> row,
                            const Grid2D& g) {
  return (1.0 - cfg.zeta) * u_bar -
         cfg.zeta / cfg.alpha0 * control_overlap_imag(lambda, psi, row, g);
}

// ---------------------------------------------------------------------------
// StepFieldSolver

StepFieldSolver::StepFieldSolver(std::span<const double> row, double dt, double alpha0)
    : c_(row.begin(), row.end()), z_(row.size()), dt_(dt), alpha0_(alpha0) {}

void StepFieldSolver::accumulate(const WaveFunction& lambda, const WaveFunction& psi,
                                 const Grid2D& g) {
  std::ranges::fill(z_, complex{});
  for (int c = 0; c < psi.components(); ++c) {
    const auto l = lambda.component(c);
    const auto p = psi.component(c);
    for (int i = 0; i < g.nx; ++i) {
      complex r = 0.0;
      const std::size_t base = g.index(i, 0);
      for (int j = 0; j < g.nz; ++j) r += std::conj(l[base + j]) * p[base + j];
      z_[i] += r;
    }
  }
  for (auto& v : z_) v *= g.cell_area();
}

double StepFieldSolver::explicit_update(double v, double mix) const {
  double s = 0.0;
  for (std::size_t i = 0; i < c_.size(); ++i) s += c_[i] * z_[i].imag();
  return (1.0 - mix) * v + mix * s / alpha0_;
}

double StepFieldSolver::h(double delta) const {
  // (exp(-i theta) - 1) / delta = -i c dt sinc(theta / 2) exp(-i theta / 2),
  // written without cancellation for small delta.
  double s = 0.0;
  for (std::size_t i = 0; i < c_.size(); ++i) {
    const double half = 0.5 * delta * c_[i] * dt_;
    const double sinc = half == 0.0 ? 1.0 : std::sin(half) / half;
    const complex rot(std::cos(half), -std::sin(half));
    s += (z_[i] * complex(0.0, -c_[i]) * rot).real() * sinc;
  }
  return s / alpha0_;
}

double StepFieldSolver::lipschitz_bound() const {
  double s = 0.0;
  for (std::size_t i = 0; i < c_.size(); ++i) s += std::abs(z_[i]) * c_[i] * c_[i];
  return dt_ * s / (2.0 * alpha0_);
}

double StepFieldSolver::gain(double w, double v) const {
  const double delta = w - v;
  return 2.0 * alpha0_ * dt_ * delta * h(delta) - alpha0_ * dt_ * (w * w - v * v);
}

double StepFieldSolver::solve(double v, double mix) const {
  if (mix == 0.0) return v;
  auto F = [&](double d) { return d + mix * (v - h(d)); };
  const double d0 = mix * (h(0.0) - v);
  const double f0 = F(d0);
  if (f0 == 0.0) return v + d0;

  // F(d) ~ d for large |d|, so walking against the sign of F brackets a root.
  double step = std::max({std::abs(f0), std::abs(d0) * 1e-3, 1e-12 * (1.0 + std::abs(v))});
  double a = d0, b = d0, fa = f0, fb = f0;
  for (int it = 0; it < 200; ++it) {
    if (f0 > 0.0) {
      a = d0 - step;
      fa = F(a);
      if (fa <= 0.0) break;
    } else {
      b = d0 + step;
      fb = F(b);
      if (fb >= 0.0) break;
    }
    step *= 2.0;
  }
  if (fa == 0.0) return v + a;
  if (fb == 0.0) return v + b;
  if (!(fa < 0.0 && fb > 0.0)) throw NumericalBlowup("field update could not be bracketed", 0);
  std::uintmax_t max_iter = 200;
  const auto root = boost::math::tools::toms748_solve(
      F, a, b, fa, fb, boost::math::tools::eps_tolerance<double>(50), max_iter);
  return v + 0.5 * (root.first + root.second);
}

// ---------------------------------------------------------------------------
// Optimisation loop

namespace {

constexpr long kAuditEvery = 100;

void audit(const WaveFunction& psi, const Grid2D& g, long step) {
  if (!std::isfinite(norm_squared(psi, g)))
    throw NumericalBlowup("non-finite state during optimisation sweep", step);
}

double max_abs_diff(const WaveFunction& a, const WaveFunction& b) {
  double m = 0.0;
  const auto da = a.data(), db = b.data();
  for (std::size_t n = 0; n < da.size(); ++n) m = std::max(m, std::abs(da[n] - db[n]));
  return m;
}

double max_field_change(const ControlField& a, const ControlField& b) {
  double m = 0.0;
  for (long n = 0; n < a.steps(); ++n) m = std::max(m, std::abs(a[n] - b[n]));
  return m;
}

}  // namespace

McaState run_mca(const SplitOperatorPropagator& prop, const WaveFunction& psi0,
                 const WaveFunction& target, const ControlField& guess, const McaConfig& cfg,
                 const IterationCallback& on_iteration) {
  cfg.validate();
  const Grid2D& g = prop.grid();
  if (psi0.components() != prop.components() || psi0.nx() != g.nx || psi0.nz() != g.nz)
    throw std::invalid_argument("initial state does not match the propagator");
  check_target(psi0, target);
  if (std::abs(guess.dt() - prop.dt()) > 1e-12 * prop.dt())
    throw ConfigError("guess field time step differs from the propagator's");

  const long nt = guess.steps();
  StepFieldSolver solver(prop.control_row(), prop.dt(), cfg.alpha0);

  McaState st;
  st.u = guess;
  st.u_bar = guess;
  WaveFunction psi_tf = propagate_forward(prop, psi0, guess).final_state;
  auto record = [&](const WaveFunction& final_state, const ControlField& u) {
    const double j1 = j1_terminal(final_state, target, g);
    const double j2 = j2_fluence(u, cfg.alpha0);
    if (!std::isfinite(j1) || !std::isfinite(j2))
      throw NumericalBlowup("objective became non-finite", st.iteration);
    st.J1.push_back(j1);
    st.J2.push_back(j2);
    st.J.push_back(j1 - j2);
  };
  record(psi_tf, st.u);
  if (on_iteration) on_iteration(st);

  int quiet = 0;
  for (int k = 1; k <= cfg.max_iters; ++k) {
    const ControlField& u_prev = st.u;
    ControlField u_bar = u_prev;
    ControlField u_new = u_prev;

    // Backward sweep: lambda^k from O psi^(k-1)(t_f) under u_bar^k, with
    // psi^(k-1) reconstructed by inverse steps under u^(k-1).
    WaveFunction lambda = apply_target_operator(psi_tf, target, g);
    WaveFunction psi = psi_tf;
    if (nt > 0) {
      prop.kinetic(lambda, 0.5, Direction::backward);
      prop.kinetic(psi, 0.5, Direction::backward);
    }
    for (long n = nt - 1; n >= 0; --n) {
      solver.accumulate(lambda, psi, g);
      const double ub = solver.solve(u_prev[n], cfg.eta);
      u_bar[n] = ub;
      prop.potential(lambda, ub, Direction::backward);
      prop.potential(psi, u_prev[n], Direction::backward);
      const double frac = n == 0 ? 0.5 : 1.0;
      prop.kinetic(lambda, frac, Direction::backward);
      prop.kinetic(psi, frac, Direction::backward);
      if ((nt - n) % kAuditEvery == 0) {
        audit(lambda, g, n);
        audit(psi, g, n);
      }
    }
    st.reconstruction_error = std::max(st.reconstruction_error, max_abs_diff(psi, psi0));

    // Forward sweep: psi^k under the new field, lambda^k co-propagated under u_bar^k.
    psi = psi0;
    if (nt > 0) {
      prop.kinetic(lambda, 0.5, Direction::forward);
      prop.kinetic(psi, 0.5, Direction::forward);
    }
    for (long n = 0; n < nt; ++n) {
      prop.static_potential(lambda, Direction::forward);
      prop.static_potential(psi, Direction::forward);
      solver.accumulate(lambda, psi, g);
      const double un = solver.solve(u_bar[n], cfg.zeta);
      u_new[n] = un;
      prop.control_phase(psi, un, Direction::forward);
      prop.control_phase(lambda, u_bar[n], Direction::forward);
      const double frac = n == nt - 1 ? 0.5 : 1.0;
      prop.kinetic(lambda, frac, Direction::forward);
      prop.kinetic(psi, frac, Direction::forward);
      if ((n + 1) % kAuditEvery == 0) {
        audit(lambda, g, n + 1);
        audit(psi, g, n + 1);
      }
    }
    psi_tf = std::move(psi);

    const double change = max_field_change(u_new, st.u);
    st.u_bar = std::move(u_bar);
    st.u = std::move(u_new);
    st.iteration = k;
    const double J_prev = st.J.back();
    record(psi_tf, st.u);
    const double gain = st.J.back() - J_prev;
    if (gain < -cfg.monotonicity_tol)
      throw MonotonicityFault("objective decreased by " + std::to_string(-gain), k);
    if (on_iteration) on_iteration(st);

    if (change <= cfg.fixed_point_tol) {
      st.converged = true;
      st.stop_reason = "field fixed point";
      break;
    }
    quiet = gain < cfg.stop_tol ? quiet + 1 : 0;
    if (quiet >= cfg.stop_patience) {
      st.converged = true;
      st.stop_reason = "objective plateau";
      break;
    }
  }
  if (!st.converged) st.stop_reason = "iteration limit";
  return st;
}

int plateau_iteration(std::span<const double> J, double fraction) {
  if (J.empty()) return 0;
  const double best = *std::ranges::max_element(J);
  const double total = best - J.front();
  if (!(total > 0.0)) return 0;
  for (std::size_t k = 0; k < J.size(); ++k)
    if (J[k] - J.front() >= fraction * total) return static_cast<int>(k);
  return static_cast<int>(J.size()) - 1;
}

ControlField rectangular_pulse(double amplitude, double start, double duration, double t_final,
                               double dt) {
  return ControlField::sampled(
      [&](double t) { return (t >= start && t <= start + duration) ? amplitude : 0.0; },
      t_final, dt);
}

ControlField gaussian_pulse(double E0, double t0, double sigma, double t_final, double dt) {
  if (!(sigma > 0.0)) throw ConfigError("Gaussian pulse width must be positive");
  return ControlField::sampled(
      [&](double t) { return E0 * std::exp(-(t - t0) * (t - t0) / (2.0 * sigma * sigma)); },
      t_final, dt);
}

}  // namespace cic

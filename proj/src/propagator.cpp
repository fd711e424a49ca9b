#include "cicontrol/propagator.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "cicontrol/errors.hpp"
#include "cicontrol/observables.hpp"

namespace cic {

namespace {

constexpr long kAuditEvery = 100;

complex phase(double angle) { return {std::cos(angle), std::sin(angle)}; }

void audit(const WaveFunction& psi, const Grid2D& g, long step) {
  if (!std::isfinite(norm_squared(psi, g)))
    throw NumericalBlowup("non-finite wavefunction during propagation", step);
}

}  // namespace

ControlField::ControlField(double t_final, double dt) : dt_(dt), t_requested_(t_final) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("time step must be positive");
  if (!(t_final >= 0.0) || !std::isfinite(t_final))
    throw ConfigError("final time must be non-negative");
  samples_.assign(static_cast<std::size_t>(std::llround(t_final / dt)), 0.0);
}

ControlField::ControlField(std::vector<double> samples, double dt)
    : samples_(std::move(samples)), dt_(dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("time step must be positive");
  t_requested_ = t_final();
}

double ControlField::fluence() const {
  double s = 0.0;
  for (double u : samples_) s += u * u;
  return s * dt_;
}

ComplexBuffer kinetic_phase(const Grid2D& grid, double mu, double dt) {
  ComplexBuffer k(grid.size());
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.nz; ++j) {
      const double k2 = grid.kx[i] * grid.kx[i] + grid.kz[j] * grid.kz[j];
      k[grid.index(i, j)] = phase(-k2 * dt / (2.0 * mu));
    }
  return k;
}

void potential_step(WaveFunction& psi, const CoefficientFields& coeffs, const Grid2D& grid,
                    const ControlCoupling& coupling, double u_mid, double dt) {
  if (psi.components() != 2) throw ModeError("spinor potential step needs two components");
  auto p1 = psi.component(0);
  auto p2 = psi.component(1);
  for (int i = 0; i < grid.nx; ++i) {
    const double vu = u_mid * coupling.at(grid.qx[i]);
    for (int j = 0; j < grid.nz; ++j) {
      const auto n = grid.index(i, j);
      const double W = coeffs.W[n], G = coeffs.G[n];
      const double omega = std::hypot(W, G);
      const double c = std::cos(omega * dt);
      const double s_over = omega > 0.0 ? std::sin(omega * dt) / omega : dt;
      const complex ph = phase(-(coeffs.S[n] + vu) * dt);
      const complex a = p1[n], b = p2[n];
      const complex I(0.0, 1.0);
      p1[n] = ph * (c * a - I * s_over * (G * a + W * b));
      p2[n] = ph * (c * b - I * s_over * (W * a - G * b));
    }
  }
}

void potential_step(WaveFunction& phi, std::span<const double> potential, const Grid2D& grid,
                    const ControlCoupling& coupling, double u_mid, double dt) {
  for (int c = 0; c < phi.components(); ++c) {
    auto comp = phi.component(c);
    for (int i = 0; i < grid.nx; ++i) {
      const double vu = u_mid * coupling.at(grid.qx[i]);
      for (int j = 0; j < grid.nz; ++j) {
        const auto n = grid.index(i, j);
        comp[n] *= phase(-(potential[n] + vu) * dt);
      }
    }
  }
}

SplitOperatorPropagator::SplitOperatorPropagator(const Grid2D& grid, double mu, double dt,
                                                 const CoefficientFields& coeffs,
                                                 ControlCoupling coupling)
    : grid_(grid), mu_(mu), dt_(dt), components_(2), coupling_(coupling),
      plan_(grid.nx, grid.nz, 2) {
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  if (coeffs.S.size() != grid.size() || coeffs.W.size() != grid.size() ||
      coeffs.G.size() != grid.size())
    throw std::invalid_argument("coefficient fields do not match the grid");
  build_kinetic();
  const std::size_t n_pts = grid.size();
  phase_.resize(n_pts);
  cos_.resize(n_pts);
  sin_w_.resize(n_pts);
  sin_g_.resize(n_pts);
  for (std::size_t n = 0; n < n_pts; ++n) {
    const double omega = std::hypot(coeffs.W[n], coeffs.G[n]);
    const double s_over = omega > 0.0 ? std::sin(omega * dt) / omega : dt;
    phase_[n] = phase(-coeffs.S[n] * dt);
    cos_[n] = std::cos(omega * dt);
    sin_w_[n] = s_over * coeffs.W[n];
    sin_g_[n] = s_over * coeffs.G[n];
  }
  control_row_.resize(grid.nx);
  for (int i = 0; i < grid.nx; ++i) control_row_[i] = coupling_.at(grid.qx[i]);
}

SplitOperatorPropagator::SplitOperatorPropagator(const Grid2D& grid, double mu, double dt,
                                                 std::vector<double> potential,
                                                 ControlCoupling coupling)
    : grid_(grid), mu_(mu), dt_(dt), components_(1), coupling_(coupling),
      plan_(grid.nx, grid.nz, 1) {
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  if (potential.size() != grid.size())
    throw std::invalid_argument("potential does not match the grid");
  build_kinetic();
  phase_.resize(grid.size());
  for (std::size_t n = 0; n < grid.size(); ++n) phase_[n] = phase(-potential[n] * dt);
  control_row_.resize(grid.nx);
  for (int i = 0; i < grid.nx; ++i) control_row_[i] = coupling_.at(grid.qx[i]);
}

void SplitOperatorPropagator::build_kinetic() {
  const double norm = 1.0 / static_cast<double>(grid_.size());
  kin_half_ = kinetic_phase(grid_, mu_, 0.5 * dt_);
  kin_full_ = kinetic_phase(grid_, mu_, dt_);
  for (auto& v : kin_half_) v *= norm;
  for (auto& v : kin_full_) v *= norm;
}

void SplitOperatorPropagator::check(const WaveFunction& psi) const {
  if (psi.components() != components_ || psi.nx() != grid_.nx || psi.nz() != grid_.nz)
    throw std::invalid_argument("wavefunction does not match the propagator");
}

void SplitOperatorPropagator::kinetic(WaveFunction& psi, double fraction, Direction d) const {
  check(psi);
  const ComplexBuffer* table = nullptr;
  ComplexBuffer custom;
  if (fraction == 0.5) {
    table = &kin_half_;
  } else if (fraction == 1.0) {
    table = &kin_full_;
  } else {
    custom = kinetic_phase(grid_, mu_, fraction * dt_);
    for (auto& v : custom) v /= static_cast<double>(grid_.size());
    table = &custom;
  }
  plan_.forward(psi.data());
  const std::size_t n_pts = grid_.size();
  for (int c = 0; c < components_; ++c) {
    auto comp = psi.component(c);
    if (d == Direction::forward)
      for (std::size_t n = 0; n < n_pts; ++n) comp[n] *= (*table)[n];
    else
      for (std::size_t n = 0; n < n_pts; ++n) comp[n] *= std::conj((*table)[n]);
  }
  plan_.backward(psi.data());
}

void SplitOperatorPropagator::static_potential(WaveFunction& psi, Direction d) const {
  check(psi);
  const std::size_t n_pts = grid_.size();
  if (components_ == 1) {
    auto comp = psi.component(0);
    if (d == Direction::forward)
      for (std::size_t n = 0; n < n_pts; ++n) comp[n] *= phase_[n];
    else
      for (std::size_t n = 0; n < n_pts; ++n) comp[n] *= std::conj(phase_[n]);
    return;
  }
  auto p1 = psi.component(0);
  auto p2 = psi.component(1);
  // The inverse flips the sign of the rotation and conjugates the phase.
  const double sgn = d == Direction::forward ? 1.0 : -1.0;
  for (std::size_t n = 0; n < n_pts; ++n) {
    const complex a = p1[n], b = p2[n];
    const complex ph = d == Direction::forward ? phase_[n] : std::conj(phase_[n]);
    const complex isw(0.0, sgn * sin_w_[n]);
    const complex isg(0.0, sgn * sin_g_[n]);
    p1[n] = ph * ((cos_[n] - isg) * a - isw * b);
    p2[n] = ph * ((cos_[n] + isg) * b - isw * a);
  }
}

void SplitOperatorPropagator::control_phase(WaveFunction& psi, double u, Direction d) const {
  check(psi);
  if (u == 0.0) return;
  const double sgn = d == Direction::forward ? -1.0 : 1.0;
  for (int c = 0; c < components_; ++c) {
    auto comp = psi.component(c);
    for (int i = 0; i < grid_.nx; ++i) {
      const complex ph = phase(sgn * u * control_row_[i] * dt_);
      complex* row = comp.data() + grid_.index(i, 0);
      for (int j = 0; j < grid_.nz; ++j) row[j] *= ph;
    }
  }
}

void SplitOperatorPropagator::potential(WaveFunction& psi, double u, Direction d) const {
  static_potential(psi, d);
  control_phase(psi, u, d);
}

void SplitOperatorPropagator::step(WaveFunction& psi, double u) const {
  kinetic(psi, 0.5, Direction::forward);
  potential(psi, u, Direction::forward);
  kinetic(psi, 0.5, Direction::forward);
  if (!mask_.empty()) apply_mask(psi);
}

void SplitOperatorPropagator::step_backward(WaveFunction& psi, double u) const {
  kinetic(psi, 0.5, Direction::backward);
  potential(psi, u, Direction::backward);
  kinetic(psi, 0.5, Direction::backward);
}

void SplitOperatorPropagator::enable_absorbing_mask(double width) {
  if (!(width > 0.0)) throw ConfigError("absorbing mask width must be positive");
  mask_.assign(grid_.size(), 1.0);
  auto edge_factor = [&](double dist) {
    if (dist >= width) return 1.0;
    const double c = std::cos(0.5 * std::numbers::pi * (width - dist) / width);
    return std::pow(c, 8);
  };
  for (int i = 0; i < grid_.nx; ++i) {
    const double dx = std::min(grid_.qx[i] - grid_.qx_min, grid_.qx_max - grid_.qx[i]);
    for (int j = 0; j < grid_.nz; ++j) {
      const double dz = std::min(grid_.qz[j] - grid_.qz_min, grid_.qz_max - grid_.qz[j]);
      mask_[grid_.index(i, j)] = edge_factor(dx) * edge_factor(dz);
    }
  }
}

void SplitOperatorPropagator::apply_mask(WaveFunction& psi) const {
  for (int c = 0; c < components_; ++c) {
    auto comp = psi.component(c);
    for (std::size_t n = 0; n < mask_.size(); ++n) comp[n] *= mask_[n];
  }
}

namespace {

void snapshot(PropagationRecord& rec, const RecordSpec& spec, const Grid2D& g, long n, double t,
              const WaveFunction& psi) {
  rec.t.push_back(t);
  rec.qx_mean.push_back(expectation_qx(psi, g));
  rec.norm.push_back(norm_squared(psi, g));
  if (spec.observer) spec.observer(n, t, psi);
}

void check_cadence(const RecordSpec& spec, long nt) {
  if (spec.every < 0) throw ConfigError("snapshot cadence must be non-negative");
  if (spec.every > 0 && nt % spec.every != 0)
    throw ConfigError("snapshot cadence must divide the number of time steps");
}

}  // namespace

PropagationResult propagate_forward(const SplitOperatorPropagator& prop, WaveFunction psi,
                                    const ControlField& field, const RecordSpec& spec) {
  const Grid2D& g = prop.grid();
  const long nt = field.steps();
  check_cadence(spec, nt);
  if (std::abs(field.dt() - prop.dt()) > 1e-12 * prop.dt())
    throw ConfigError("control field time step differs from the propagator's");

  PropagationResult out;
  snapshot(out.record, spec, g, 0, 0.0, psi);
  if (nt == 0) {
    out.final_state = std::move(psi);
    return out;
  }
  // Adjacent half kinetic steps are fused unless a snapshot, the mask or the
  // end of the run needs the state at an integer time.
  const bool masked = prop.has_mask();
  prop.kinetic(psi, 0.5, Direction::forward);
  for (long n = 0; n < nt; ++n) {
    prop.potential(psi, field[n], Direction::forward);
    const long next = n + 1;
    const bool last = next == nt;
    const bool snap = last || (spec.every > 0 && next % spec.every == 0);
    if (last || snap || masked) {
      prop.kinetic(psi, 0.5, Direction::forward);
      if (masked) prop.apply_mask(psi);
      if (next % kAuditEvery == 0 || last) audit(psi, g, next);
      if (snap) snapshot(out.record, spec, g, next, field.time(next), psi);
      if (!last) prop.kinetic(psi, 0.5, Direction::forward);
    } else {
      prop.kinetic(psi, 1.0, Direction::forward);
      if (next % kAuditEvery == 0) audit(psi, g, next);
    }
  }
  out.final_state = std::move(psi);
  return out;
}

PropagationResult propagate_backward(const SplitOperatorPropagator& prop, WaveFunction psi,
                                     const ControlField& field, const RecordSpec& spec) {
  const Grid2D& g = prop.grid();
  const long nt = field.steps();
  check_cadence(spec, nt);
  if (std::abs(field.dt() - prop.dt()) > 1e-12 * prop.dt())
    throw ConfigError("control field time step differs from the propagator's");

  PropagationResult out;
  snapshot(out.record, spec, g, nt, field.time(nt), psi);
  if (nt == 0) {
    out.final_state = std::move(psi);
    return out;
  }
  prop.kinetic(psi, 0.5, Direction::backward);
  for (long n = nt - 1; n >= 0; --n) {
    prop.potential(psi, field[n], Direction::backward);
    const bool last = n == 0;
    const bool snap = last || (spec.every > 0 && n % spec.every == 0);
    if (last || snap) {
      prop.kinetic(psi, 0.5, Direction::backward);
      if ((nt - n) % kAuditEvery == 0 || last) audit(psi, g, n);
      if (snap) snapshot(out.record, spec, g, n, field.time(n), psi);
      if (!last) prop.kinetic(psi, 0.5, Direction::backward);
    } else {
      prop.kinetic(psi, 1.0, Direction::backward);
      if ((nt - n) % kAuditEvery == 0) audit(psi, g, n);
    }
  }
  out.final_state = std::move(psi);
  return out;
}

}  // namespace cic

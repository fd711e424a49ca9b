#include "cicontrol/observables.hpp"

#include <cmath>

#include "cicontrol/control.hpp"
#include "cicontrol/errors.hpp"
#include "cicontrol/fft.hpp"

namespace cic {

double expectation_qx(const WaveFunction& psi, const Grid2D& g) {
  double s = 0.0;
  for (int c = 0; c < psi.components(); ++c) {
    const auto comp = psi.component(c);
    for (int i = 0; i < g.nx; ++i) {
      double row = 0.0;
      for (int j = 0; j < g.nz; ++j) row += std::norm(comp[g.index(i, j)]);
      s += g.qx[i] * row;
    }
  }
  return s * g.cell_area();
}

double expectation_qz(const WaveFunction& psi, const Grid2D& g) {
  double s = 0.0;
  for (int c = 0; c < psi.components(); ++c) {
    const auto comp = psi.component(c);
    for (int i = 0; i < g.nx; ++i)
      for (int j = 0; j < g.nz; ++j) s += g.qz[j] * std::norm(comp[g.index(i, j)]);
  }
  return s * g.cell_area();
}

std::vector<double> density(const WaveFunction& psi) {
  std::vector<double> rho(psi.points(), 0.0);
  for (int c = 0; c < psi.components(); ++c) {
    const auto comp = psi.component(c);
    for (std::size_t n = 0; n < rho.size(); ++n) rho[n] += std::norm(comp[n]);
  }
  return rho;
}

double momentum_space_norm(const WaveFunction& psi, const Grid2D& g) {
  WaveFunction work = psi;
  FftPlan2D plan(g.nx, g.nz, psi.components());
  plan.forward(work.data());
  double s = 0.0;
  for (const complex& v : work.data()) s += std::norm(v);
  return s * g.cell_area() / static_cast<double>(g.size());
}

double edge_probability(const WaveFunction& psi, const Grid2D& g, int cells) {
  double s = 0.0;
  for (int c = 0; c < psi.components(); ++c) {
    const auto comp = psi.component(c);
    for (int i = 0; i < g.nx; ++i)
      for (int j = 0; j < g.nz; ++j) {
        const bool edge = i < cells || i >= g.nx - cells || j < cells || j >= g.nz - cells;
        if (edge) s += std::norm(comp[g.index(i, j)]);
      }
  }
  return s * g.cell_area();
}

AdiabaticPopulations adiabatic_populations(const WaveFunction& psi, const CoefficientFields& c,
                                           const Grid2D& g) {
  if (psi.components() != 2)
    throw ModeError("adiabatic populations are only defined for the spinor model");
  const auto p1 = psi.component(0);
  const auto p2 = psi.component(1);
  double plus = 0.0, minus = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n) {
    const double L = mixing_angle(c.W[n], c.G[n]);
    const double cl = std::cos(L), sl = std::sin(L);
    plus += std::norm(cl * p1[n] + sl * p2[n]);
    minus += std::norm(-sl * p1[n] + cl * p2[n]);
  }
  return {plus * g.cell_area(), minus * g.cell_area()};
}

SnapshotObserver j1_of_t(Trace& out, const WaveFunction& target, const Grid2D& g) {
  return [&out, &target, &g](long, double t, const WaveFunction& psi) {
    out.push(t, j1_terminal(psi, target, g));
  };
}

int crossing_count(std::span<const double> values, double reference, double band) {
  int side = 0;
  int crossings = 0;
  for (double v : values) {
    const double d = v - reference;
    int now = 0;
    if (d > band)
      now = 1;
    else if (d < -band)
      now = -1;
    if (now == 0) continue;
    if (side != 0 && now != side) ++crossings;
    side = now;
  }
  return crossings;
}

}  // namespace cic

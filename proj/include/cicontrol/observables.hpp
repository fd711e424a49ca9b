#pragma once

#include <span>
#include <string>
#include <vector>

#include "cicontrol/grid.hpp"
#include "cicontrol/propagator.hpp"
#include "cicontrol/surfaces.hpp"
#include "cicontrol/wavefunction.hpp"

namespace cic {

/// Uniformly sampled time series.
struct Trace {
  std::string label;
  std::vector<double> t;
  std::vector<double> value;

  void push(double time, double v) {
    t.push_back(time);
    value.push_back(v);
  }
  std::size_t size() const { return t.size(); }
};

/// <qx> = sum qx |psi|^2 dx dz over all components.
double expectation_qx(const WaveFunction& psi, const Grid2D& g);
double expectation_qz(const WaveFunction& psi, const Grid2D& g);

/// Spin-summed probability density |psi1|^2 + |psi2|^2 (or |phi|^2).
std::vector<double> density(const WaveFunction& psi);

/// Norm evaluated from the momentum-space representation (Parseval).
double momentum_space_norm(const WaveFunction& psi, const Grid2D& g);

/// Probability within `cells` grid cells of any edge.
double edge_probability(const WaveFunction& psi, const Grid2D& g, int cells = 3);

struct AdiabaticPopulations {
  double plus;
  double minus;
};

/// Grid integrals of |<phi+-(q)|psi(q)>|^2. Throws ModeError for a
/// single-component wavefunction.
AdiabaticPopulations adiabatic_populations(const WaveFunction& psi, const CoefficientFields& c,
                                           const Grid2D& g);

/// J1(t) along a propagation: returns an observer that appends the terminal
/// overlap with `target` (a one-component motional state) at every snapshot.
SnapshotObserver j1_of_t(Trace& out, const WaveFunction& target, const Grid2D& g);

/// Number of sign changes of value(t) - reference, counted with a hysteresis
/// band: a side is only registered once |value - reference| > band.
int crossing_count(std::span<const double> values, double reference, double band = 0.5);
inline int crossing_count(const Trace& trace, double reference, double band = 0.5) {
  return crossing_count(trace.value, reference, band);
}

}  // namespace cic

#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <unsupported/Eigen/MatrixFunctions>

#include "cicontrol/errors.hpp"
#include "cicontrol/observables.hpp"
#include "cicontrol/propagator.hpp"
#include "cicontrol/surfaces.hpp"
#include "support.hpp"

using namespace cic;
using testing::complex;

namespace {

CoefficientFields constant_fields(const Grid2D& g, double S, double W, double G) {
  return {std::vector<double>(g.size(), S), std::vector<double>(g.size(), W),
          std::vector<double>(g.size(), G)};
}

double fidelity(const WaveFunction& a, const WaveFunction& b, const Grid2D& g) {
  return std::norm(inner_product(a, b, g));
}

double l2_distance(const WaveFunction& a, const WaveFunction& b, const Grid2D& g) {
  double s = 0.0;
  for (std::size_t n = 0; n < a.data().size(); ++n) s += std::norm(a.data()[n] - b.data()[n]);
  return std::sqrt(s * g.cell_area());
}

WaveFunction spinor_packet(const Grid2D& g, double x0, double z0, double sx, double sz,
                           complex c1, complex c2, double kx0 = 0.0) {
  WaveFunction psi = WaveFunction::spinor(g);
  testing::fill_gaussian(psi.component(0), g, x0, z0, sx, sz, kx0);
  testing::fill_gaussian(psi.component(1), g, x0, z0, sx, sz, kx0);
  for (auto& v : psi.component(0)) v *= c1;
  for (auto& v : psi.component(1)) v *= c2;
  normalize(psi, g);
  return psi;
}

}  // namespace

TEST_CASE("potential step matches the dense matrix exponential") {
  auto gen = testing::rng(2024);
  std::uniform_real_distribution<double> coef(-20.0, 20.0), step(1e-4, 0.5), field(-3.0, 3.0),
      amp(-1.0, 1.0);
  const Grid2D g = make_grid({-8, 8, -8, 8}, 16, 16);
  double worst = 0.0;
  for (int draw = 0; draw < 40; ++draw) {  // 40 x 256 = 10240 tuples
    CoefficientFields c;
    for (std::size_t n = 0; n < g.size(); ++n) {
      c.S.push_back(coef(gen));
      c.W.push_back(coef(gen));
      c.G.push_back(coef(gen));
    }
    // A few exact zeros exercise the degenerate branch.
    c.W[0] = c.G[0] = 0.0;
    c.W[1] = 0.0;
    const ControlCoupling coupling{field(gen), field(gen)};
    const double dt = step(gen), u = field(gen);

    WaveFunction psi = WaveFunction::spinor(g);
    for (auto& v : psi.data()) v = complex(amp(gen), amp(gen));
    const WaveFunction before = psi;
    potential_step(psi, c, g, coupling, u, dt);

    for (int i = 0; i < g.nx; ++i)
      for (int j = 0; j < g.nz; ++j) {
        const auto n = g.index(i, j);
        const double vu = u * coupling.at(g.qx[i]);
        Eigen::Matrix2cd H;
        H << c.S[n] + vu + c.G[n], c.W[n], c.W[n], c.S[n] + vu - c.G[n];
        const Eigen::Matrix2cd U = (complex(0.0, -dt) * H).exp();
        const Eigen::Vector2cd in(before.component(0)[n], before.component(1)[n]);
        const Eigen::Vector2cd out = U * in;
        worst = std::max(worst, std::abs(out(0) - psi.component(0)[n]));
        worst = std::max(worst, std::abs(out(1) - psi.component(1)[n]));
      }
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("tabulated potential equals the reference step and inverts exactly") {
  auto gen = testing::rng(7);
  std::uniform_real_distribution<double> d(-5.0, 5.0);
  const Grid2D g = make_grid({-10, 10, -10, 10}, 16, 32);
  CoefficientFields c;
  for (std::size_t n = 0; n < g.size(); ++n) {
    c.S.push_back(d(gen));
    c.W.push_back(d(gen));
    c.G.push_back(d(gen));
  }
  const ControlCoupling coupling{0.7, -0.3};
  const SplitOperatorPropagator prop(g, 1e-3, 0.013, c, coupling);
  WaveFunction a = spinor_packet(g, 1, 0, 3, 3, 0.6, complex(0, 0.8));
  WaveFunction b = a;
  prop.potential(a, 1.7, Direction::forward);
  potential_step(b, c, g, coupling, 1.7, 0.013);
  CHECK(l2_distance(a, b, g) < 1e-13);

  const WaveFunction orig = spinor_packet(g, 1, 0, 3, 3, 0.6, complex(0, 0.8));
  prop.potential(a, 1.7, Direction::backward);
  CHECK(l2_distance(a, orig, g) < 1e-13);

  // Static part and control phase commute.
  WaveFunction x = orig, y = orig;
  prop.static_potential(x, Direction::forward);
  prop.control_phase(x, -2.0, Direction::forward);
  prop.control_phase(y, -2.0, Direction::forward);
  prop.static_potential(y, Direction::forward);
  CHECK(l2_distance(x, y, g) < 1e-13);
}

TEST_CASE("spin swap follows cos^2(W t)") {
  const Grid2D g = make_grid({-40, 40, -40, 40}, 32, 32);
  const double W = 3.1, dt = 0.01;
  const SplitOperatorPropagator prop(g, 2e-3, dt, constant_fields(g, 0.0, W, 0.0), {});
  const WaveFunction psi0 = spinor_packet(g, 0, 0, 6, 6, 0.0, 1.0);
  double worst = 0.0;
  auto observe = [&](long, double t, const WaveFunction& psi) {
    double p2 = 0.0;
    for (const complex& v : psi.component(1)) p2 += std::norm(v);
    p2 *= g.cell_area();
    worst = std::max(worst, std::abs(p2 - std::pow(std::cos(W * t), 2)));
  };
  propagate_forward(prop, psi0, ControlField(2.0, dt), {10, observe});
  CHECK(worst < 1e-8);
}

TEST_CASE("coherent state follows the classical trajectory") {
  const double mu = 6.9e-4, wx = 4.75, wz = 10.9, x0 = -11.4;
  const InternalModel m = testing::toy_model(mu, wx, wz, 0.0, 0.0);
  const Grid2D g = make_grid({-128, 128, -64, 64}, 128, 64);
  const CoefficientFields c = eval_coefficients(m, g);
  const double sx = std::sqrt(1.0 / (2 * mu * wx)), sz = std::sqrt(1.0 / (2 * mu * wz));
  const double dt = 0.001;
  const SplitOperatorPropagator prop(g, mu, dt, c, {});
  const WaveFunction psi0 = spinor_packet(g, x0, 0, sx, sz, 0.0, 1.0);
  double worst = 0.0;
  auto observe = [&](long, double t, const WaveFunction& psi) {
    const double expect = x0 * std::cos(wx * t);
    worst = std::max(worst, std::abs(expectation_qx(psi, g) - expect) / std::abs(x0));
  };
  propagate_forward(prop, psi0, ControlField(3.0, dt), {50, observe});
  CHECK(worst < 1e-4);
}

TEST_CASE("free packet spreads at the analytic rate") {
  const double mu = 1e-3, s0 = 5.0;
  const Grid2D g = make_grid({-256, 256, -64, 64}, 256, 64);
  std::vector<double> zero(g.size(), 0.0);
  const double dt = 0.01;
  const SplitOperatorPropagator prop(g, mu, dt, zero, {});
  WaveFunction phi = WaveFunction::scalar(g);
  testing::fill_gaussian(phi.component(0), g, 0, 0, s0, s0, 0.05);
  normalize(phi, g);
  const double T = 0.25;
  const auto r = propagate_forward(prop, phi, ControlField(T, dt));
  double mx = 0, mxx = 0;
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.nz; ++j) {
      const double p = std::norm(r.final_state.component(0)[g.index(i, j)]) * g.cell_area();
      mx += g.qx[i] * p;
      mxx += g.qx[i] * g.qx[i] * p;
    }
  const double var = mxx - mx * mx;
  const double tau = T / (2 * mu * s0 * s0);
  CHECK(var == doctest::Approx(s0 * s0 * (1 + tau * tau)).epsilon(1e-8));
  CHECK(mx == doctest::Approx(0.05 / mu * T).epsilon(1e-8));  // group velocity k0 / mu
}

TEST_CASE("norm is conserved and backward propagation inverts forward") {
  auto gen = testing::rng(99);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  for (int draw = 0; draw < 5; ++draw) {
    const InternalModel m = testing::toy_model(5e-4 + 1e-3 * d(gen), 2 + 4 * d(gen),
                                               6 + 4 * d(gen), 2 * d(gen) - 1, d(gen));
    const Grid2D g = make_grid({-64, 64, -64, 64}, 32, 32);
    const double dt = 0.002;
    const SplitOperatorPropagator prop(g, m.mu, dt, eval_coefficients(m, g),
                                       ControlCoupling::single_ion(m));
    const WaveFunction psi0 = spinor_packet(g, -10 * d(gen), 0, 8, 6, 0.3, 0.7);
    const ControlField u = ControlField::sampled(
        [&](double t) { return 0.5 * std::sin(3 * t) * d(gen); }, 4.0, dt);
    const auto fwd = propagate_forward(prop, psi0, u, {100, {}});
    for (double n : fwd.record.norm) CHECK(std::abs(n - 1.0) < 1e-10);
    const auto back = propagate_backward(prop, fwd.final_state, u);
    CHECK(fidelity(back.final_state, psi0, g) > 1 - 1e-12);
    CHECK(l2_distance(back.final_state, psi0, g) < 1e-10);
  }
}

TEST_CASE("Strang splitting is second order in dt") {
  const InternalModel m = testing::toy_model(1e-3, 4.0, 8.0, 0.3, 0.4);
  const Grid2D g = make_grid({-64, 64, -64, 64}, 64, 64);
  const CoefficientFields c = eval_coefficients(m, g);
  const auto coupling = ControlCoupling::single_ion(m);
  const WaveFunction psi0 = spinor_packet(g, -8, 2, 7, 5, 0.2, 0.98);
  auto field = [](double t) { return 0.02 * std::sin(2.0 * t) + 0.01; };
  const double T = 1.0;
  auto run = [&](double dt) {
    const SplitOperatorPropagator prop(g, m.mu, dt, c, coupling);
    return propagate_forward(prop, psi0, ControlField::sampled(field, T, dt)).final_state;
  };
  const double dt = 0.0025;
  const WaveFunction ref = run(dt / 32);
  const double e1 = l2_distance(run(dt), ref, g);
  const double e2 = l2_distance(run(dt / 2), ref, g);
  const double order = std::log2(e1 / e2);
  CHECK(order > 1.7);
  CHECK(order < 2.2);
}

TEST_CASE("snapshot cadence and time bookkeeping") {
  const Grid2D g = make_grid({-32, 32, -32, 32}, 16, 16);
  const SplitOperatorPropagator prop(g, 1e-3, 0.1, constant_fields(g, 0, 0, 0), {});
  const WaveFunction psi0 = spinor_packet(g, 0, 0, 5, 5, 1, 0);

  std::vector<long> steps;
  auto obs = [&](long n, double, const WaveFunction&) { steps.push_back(n); };
  const auto r = propagate_forward(prop, psi0, ControlField(2.0, 0.1), {5, obs});
  CHECK(steps == std::vector<long>{0, 5, 10, 15, 20});
  CHECK(r.record.t.back() == doctest::Approx(2.0));

  const auto none = propagate_forward(prop, psi0, ControlField(0.0, 0.1));
  CHECK(none.record.t.size() == 1);

  CHECK_THROWS_AS(propagate_forward(prop, psi0, ControlField(2.0, 0.1), {3, {}}), ConfigError);
  CHECK_THROWS_AS(propagate_forward(prop, psi0, ControlField(2.0, 0.05)), ConfigError);

  steps.clear();
  const auto b = propagate_backward(prop, r.final_state, ControlField(2.0, 0.1), {10, obs});
  CHECK(steps == std::vector<long>{20, 10, 0});
  CHECK(b.record.t.front() == doctest::Approx(2.0));
}

TEST_CASE("non-finite fields are reported with a step index") {
  const Grid2D g = make_grid({-32, 32, -32, 32}, 16, 16);
  const SplitOperatorPropagator prop(g, 1e-3, 0.1, constant_fields(g, 0, 1, 0), {0.0, 1.0});
  const WaveFunction psi0 = spinor_packet(g, 0, 0, 5, 5, 1, 0);
  std::vector<double> u(300, 0.0);
  u[150] = NAN;
  try {
    propagate_forward(prop, psi0, ControlField(u, 0.1));
    FAIL("expected NumericalBlowup");
  } catch (const NumericalBlowup& e) {
    CHECK(e.step() == 200);
  }
}

TEST_CASE("uniform control term is a global phase") {
  const InternalModel m = testing::toy_model(1e-3, 4.0, 8.0, 0.3, 0.4);
  const Grid2D g = make_grid({-64, 64, -64, 64}, 32, 32);
  const CoefficientFields c = eval_coefficients(m, g);
  const ControlCoupling slope_only{0.0, -0.5 * m.charge};
  const ControlCoupling with_offset{2.0 * m.charge * m.X0, -0.5 * m.charge};
  const double dt = 0.005;
  const ControlField u = ControlField::sampled([](double t) { return std::cos(5 * t); }, 2.0, dt);
  const WaveFunction psi0 = spinor_packet(g, -5, 0, 7, 5, 0.4, 0.9);
  const auto a = propagate_forward(SplitOperatorPropagator(g, m.mu, dt, c, slope_only), psi0, u,
                                   {10, {}});
  const auto b = propagate_forward(SplitOperatorPropagator(g, m.mu, dt, c, with_offset), psi0,
                                   u, {10, {}});
  for (std::size_t k = 0; k < a.record.qx_mean.size(); ++k)
    CHECK(std::abs(a.record.qx_mean[k] - b.record.qx_mean[k]) < 1e-10);
  CHECK(fidelity(a.final_state, b.final_state, g) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("absorbing mask is off by default and removes edge density") {
  const Grid2D g = make_grid({-32, 32, -32, 32}, 32, 32);
  SplitOperatorPropagator prop(g, 1e-3, 0.01, constant_fields(g, 0, 0, 0), {});
  CHECK_FALSE(prop.has_mask());
  WaveFunction psi = spinor_packet(g, 20, 0, 3, 3, 1, 0, 0.3);
  const double before = norm_squared(psi, g);
  prop.enable_absorbing_mask(8.0);
  prop.apply_mask(psi);
  CHECK(norm_squared(psi, g) < before);
  CHECK_THROWS_AS(prop.enable_absorbing_mask(0.0), ConfigError);
}

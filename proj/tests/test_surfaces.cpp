#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "cicontrol/errors.hpp"
#include "cicontrol/surfaces.hpp"
#include "support.hpp"

using namespace cic;

TEST_CASE("coefficient fields follow their definitions") {
  const InternalModel m = testing::toy_model(2e-3, 3.0, 7.0, 0.4, 0.2, 0.5);
  const Grid2D g = make_grid({-40, 40, -20, 20}, 16, 16);
  const CoefficientFields c = eval_coefficients(m, g);
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.nz; ++j) {
      const auto n = g.index(i, j);
      const double x = g.qx[i], z = g.qz[j];
      CHECK(c.S[n] == doctest::Approx(0.5 * 2e-3 * (9 * x * x + 49 * z * z)));
      CHECK(c.W[n] == doctest::Approx(0.5 + 0.2 * z));
      CHECK(c.G[n] == doctest::Approx(0.4 * x));
    }
}

TEST_CASE("surfaces are the eigenvalues of the spin Hamiltonian") {
  auto gen = testing::rng(11);
  std::uniform_real_distribution<double> d(-5.0, 5.0);
  for (int k = 0; k < 2000; ++k) {
    const double S = d(gen), W = d(gen), G = d(gen);
    Eigen::Matrix2d H;
    H << S + G, W, W, S - G;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(H);
    CoefficientFields c{{S}, {W}, {G}};
    const AdiabaticSurfaces s = eval_surfaces(c);
    CHECK(s.E_minus[0] == doctest::Approx(es.eigenvalues()(0)).epsilon(1e-12));
    CHECK(s.E_plus[0] == doctest::Approx(es.eigenvalues()(1)).epsilon(1e-12));

    // phi+- are eigenvectors with the expected eigenvalues.
    const AdiabaticStates st = adiabatic_states(c);
    const Eigen::Vector2d vp(st.plus[0][0], st.plus[0][1]);
    const Eigen::Vector2d vm(st.minus[0][0], st.minus[0][1]);
    CHECK((H * vp - s.E_plus[0] * vp).norm() < 1e-11);
    CHECK((H * vm - s.E_minus[0] * vm).norm() < 1e-11);
    CHECK(std::abs(vp.dot(vm)) < 1e-14);
  }
}

TEST_CASE("mixing angle convention") {
  const double pi = std::numbers::pi;
  CHECK(mixing_angle(1.0, 1.0) == doctest::Approx(pi / 8));
  CHECK(mixing_angle(0.0, 1.0) == 0.0);
  CHECK(mixing_angle(0.0, -1.0) == doctest::Approx(pi / 2));
  CHECK(mixing_angle(-0.0, -1.0) == doctest::Approx(pi / 2));  // W = -0 treated as +0
  CHECK(mixing_angle(-1e-300, -1.0) == doctest::Approx(-pi / 2));
  CHECK(mixing_angle(1.0, 0.0) == doctest::Approx(pi / 4));

  CoefficientFields c{{0, 0}, {0, 1}, {0, 0}};
  const MixingAngle L = mixing_angle(c);
  CHECK(L.degenerate[0] == 1);
  CHECK(L.angle[0] == 0.0);
  CHECK(L.degenerate[1] == 0);

  auto gen = testing::rng(5);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const double W = d(gen), G = d(gen);
    const double a = mixing_angle(W, G);
    CHECK(a > -pi / 2);
    CHECK(a <= pi / 2);
    CHECK(std::tan(2 * a) == doctest::Approx(W / G).epsilon(1e-9));
  }
}

TEST_CASE("CI location and degeneracy on the reference model") {
  const auto p = PhysicalParams::strontium_reference();
  const InternalModel m = to_internal(p, derive_geometry(p));
  const CiPoint ci = ci_location(m);
  CHECK(ci.qx == 0.0);
  CHECK(ci.qz == 0.0);
  CHECK_FALSE(std::signbit(ci.qz));

  const Grid2D g = make_grid({-256, 256, -64, 64}, 128, 64);
  const CoefficientFields c = eval_coefficients(m, g);
  const AdiabaticSurfaces s = eval_surfaces(c, m);
  const auto n0 = g.index(64, 32);
  REQUIRE(g.qx[64] == 0.0);
  REQUIRE(g.qz[32] == 0.0);
  CHECK(std::abs(s.E_plus[n0] - s.E_minus[n0]) < 1e-12);

  // The qz = 0 slice is symmetric about qx = 0.
  for (int i = 1; i < 64; ++i) {
    CHECK(s.E_plus[g.index(64 + i, 32)] == doctest::Approx(s.E_plus[g.index(64 - i, 32)]));
    CHECK(s.E_minus[g.index(64 + i, 32)] == doctest::Approx(s.E_minus[g.index(64 - i, 32)]));
    CHECK(s.E_plus[g.index(64 + i, 32)] > s.E_minus[g.index(64 + i, 32)]);
  }
}

TEST_CASE("nonzero exchange shifts the CI along qz") {
  const InternalModel m = testing::toy_model(1e-3, 4, 8, 0.5, 0.25, 1.0);
  const CiPoint ci = ci_location(m);
  CHECK(ci.qx == 0.0);
  CHECK(ci.qz == doctest::Approx(-4.0));

  const Grid2D g = make_grid({-16, 16, -16, 16}, 16, 16);  // node at qz = -4
  const AdiabaticSurfaces s = eval_surfaces(eval_coefficients(m, g), m);
  int jc = 0;
  for (int j = 0; j < g.nz; ++j)
    if (g.qz[j] == -4.0) jc = j;
  CHECK(std::abs(s.E_plus[g.index(8, jc)] - s.E_minus[g.index(8, jc)]) < 1e-12);
}

TEST_CASE("vanishing exchange gradient has no CI") {
  InternalModel m = testing::toy_model();
  m.F0 = 0.0;
  CHECK_THROWS_AS(ci_location(m), ModelError);
  const AdiabaticSurfaces s = eval_surfaces(CoefficientFields{{0}, {0}, {0}});
  CHECK(std::isnan(s.ci.qx));
}

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "cicontrol/config.hpp"
#include "cicontrol/errors.hpp"

using namespace cic;
namespace fs = std::filesystem;

namespace {

const char* kPhysical = R"([physical]
mass_kg = 1.45914e-25
polarizability_down_c2m2_per_j = 8.9e-30
polarizability_up_c2m2_per_j = -3.8e-31
trap_freq_x_hz = 1.6e6
trap_freq_z_hz = 1.0e6
static_field_v_per_m = 2.529
rf_gradient_v_per_m2 = 8.17e8
exchange_energy_j = 0
exchange_gradient_over_h_hz_per_m = 2.0e13
)";

fs::path recipes() {
  const char* env = std::getenv("CICONTROL_RECIPES");
  REQUIRE_MESSAGE(env != nullptr, "CICONTROL_RECIPES is not set");
  return env;
}

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("minimal document takes defaults") {
  const RunConfig c = parse_config(kPhysical);
  CHECK(c.mode == Mode::spinor);
  CHECK(c.grid.nx == 256);
  CHECK(c.grid.nz == 128);
  CHECK(c.time.dt == 1e-9);
  CHECK(c.guess.kind == GuessKind::zero);
  CHECK_FALSE(c.physical.X0_override.has_value());
  CHECK(c.physical.m == 1.45914e-25);
  CHECK(c.physical.omega_x == doctest::Approx(2 * 3.14159265358979323846 * 1.6e6));
}

TEST_CASE("missing and unknown keys are rejected by name") {
  std::string text = kPhysical;
  const auto pos = text.find("trap_freq_z_hz");
  text.erase(pos, text.find('\n', pos) - pos + 1);
  CHECK(error_of(text).find("missing required key [physical] trap_freq_z_hz") !=
        std::string::npos);

  CHECK(error_of(std::string(kPhysical) + "bogus = 1\n").find("bogus") != std::string::npos);
  CHECK(error_of(std::string(kPhysical) + "[nonsense]\nx = 1\n").find("nonsense") !=
        std::string::npos);
  CHECK_FALSE(error_of(std::string(kPhysical) + "[grid]\nnx = abc\n").empty());
  CHECK_FALSE(error_of(std::string(kPhysical) + "[control]\nmode = classical\n").empty());
  CHECK_FALSE(error_of(std::string(kPhysical) + "[control]\nguess = sawtooth\n").empty());
  CHECK_FALSE(error_of("[physical\nmass_kg = 1\n").empty());
}

TEST_CASE("manifest round trip") {
  RunConfig c = parse_config(std::string(kPhysical) + R"(com_offset_m = -2.4e-8
[control]
mode = bo
alpha0 = 0.1
guess = gauss
guess_e0_v_per_m = -0.719e-3
guess_t0_s = 4e-6
guess_sigma_s = 0.85e-6
[time]
frame_times_s = 0, 2e-6
[grid]
mask_width_m = 1e-8
[output]
directory = somewhere
)");
  const std::string m = manifest(c);
  const RunConfig back = parse_config(m);
  CHECK(manifest(back) == m);
  CHECK(back.mode == Mode::bo);
  CHECK(back.mca.alpha0 == 0.1);
  CHECK(back.guess.kind == GuessKind::gauss);
  CHECK(back.guess.E0 == -0.719e-3);
  CHECK(back.time.frame_times == std::vector<double>{0.0, 2e-6});
  CHECK(back.mask_width == 1e-8);
  CHECK(back.physical.X0_override.value() == -2.4e-8);
  CHECK(back.physical.omega_z == c.physical.omega_z);
  CHECK(back.physical.F0 == c.physical.F0);
  CHECK(back.output_dir == "somewhere");
}

TEST_CASE("layered files override key by key") {
  const fs::path dir = fs::temp_directory_path() / "cicontrol_test_config";
  fs::create_directories(dir);
  std::ofstream(dir / "base.cfg") << kPhysical << "[grid]\nnx = 64\nnz = 32\n";
  std::ofstream(dir / "layer.cfg") << "[grid]\nnz = 16\n[control]\nmax_iters = 7\n";
  const RunConfig c = load_config({dir / "base.cfg", dir / "layer.cfg"});
  CHECK(c.grid.nx == 64);
  CHECK(c.grid.nz == 16);
  CHECK(c.mca.max_iters == 7);
  CHECK_THROWS_AS(load_config({dir / "does-not-exist.cfg"}), ConfigError);
}

TEST_CASE("shipped recipes parse") {
  const fs::path r = recipes();
  for (const char* name : {"fig1.cfg", "fig2.cfg", "fig3.cfg", "nofield.cfg"}) {
    CAPTURE(name);
    CHECK_NOTHROW(load_config({r / name}));
  }
  const RunConfig f2 = load_config({r / "fig2.cfg"});
  CHECK(f2.guess.kind == GuessKind::rect);
  CHECK(f2.guess.amplitude == -14.39);
  CHECK(f2.mca.alpha0 == 0.01);
  const RunConfig f3 = load_config({r / "fig3.cfg", r / "fig4.cfg"});
  CHECK(f3.mode == Mode::bo);
  CHECK(f3.mca.alpha0 == 0.1);
  const RunConfig fast = load_config({r / "fig2.cfg", r / "profiles" / "fast.cfg"});
  CHECK(fast.grid.nx == 128);
  CHECK(fast.grid.nz == 64);
  CHECK(fast.time.dt == 2e-9);
}

TEST_CASE("enum spellings") {
  CHECK(parse_mode("spinor") == Mode::spinor);
  CHECK(parse_mode("bo") == Mode::bo);
  CHECK(to_string(Mode::bo) == "bo");
  CHECK_THROWS_AS(parse_mode("BO!"), ConfigError);
  for (auto k : {GuessKind::zero, GuessKind::rect, GuessKind::gauss, GuessKind::file})
    CHECK(parse_guess_kind(to_string(k)) == k);
}

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "cicontrol/errors.hpp"
#include "cicontrol/io.hpp"
#include "cicontrol/runner.hpp"

using namespace cic;
namespace fs = std::filesystem;

namespace {

fs::path recipes() {
  const char* env = std::getenv("CICONTROL_RECIPES");
  REQUIRE_MESSAGE(env != nullptr, "CICONTROL_RECIPES is not set");
  return env;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "cicontrol_test_runner" / name;
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// The reference physics on a coarse grid and a short horizon.
RunConfig small_config() {
  RunConfig c = load_config({recipes() / "fig2.cfg"});
  c.grid.extents = {-128e-9, 128e-9, -64e-9, 64e-9};
  c.grid.nx = 32;
  c.grid.nz = 32;
  c.time.t_final = 0.2e-6;
  c.time.dt = 2e-9;
  c.time.snapshot_every = 20e-9;
  c.time.frame_times = {0.0, 0.1e-6, 0.2e-6};
  c.mca.max_iters = 2;
  return c;
}

}  // namespace

TEST_CASE("time grid consistency is checked up front") {
  RunConfig c = small_config();
  c.time.snapshot_every = 3e-9;
  CHECK_THROWS_AS(prepare(c), ConfigError);
  c = small_config();
  c.time.frame_times = {0.05e-6};
  CHECK_THROWS_AS(prepare(c), ConfigError);
  c = small_config();
  c.time.t_final = 0.2001e-6;
  CHECK_THROWS_AS(prepare(c), ConfigError);

  const RunSetup s = prepare(small_config());
  CHECK(s.snapshot_every == 10);
  CHECK(s.dt == doctest::Approx(2e-3));
  CHECK(s.initial.qx == doctest::Approx(-11.4));
}

TEST_CASE("zero static field gives a centred CoM") {
  RunConfig c = small_config();
  c.physical.u0 = 0.0;
  c.physical.X0_override.reset();
  const fs::path out = scratch("eq");
  const auto r = cmd_equilibrium(c, out);
  CHECK(r.geometry.X0_solved == 0.0);
  CHECK(r.geometry.X0 == 0.0);
  CHECK(fs::exists(out / "equilibrium.csv"));
  CHECK(r.text.find("z0") != std::string::npos);
}

TEST_CASE("surfaces report a degenerate CI node") {
  const fs::path out = scratch("surf");
  const auto r = cmd_surfaces(small_config(), out);
  CHECK(r.ci.qx == 0.0);
  CHECK(r.gap_at_ci < 1e-12);
  for (const char* f : {"E_plus.csv", "E_minus.csv", "S.csv", "W.csv", "G.csv", "Lambda.csv",
                        "slice_qz0.csv", "ci.csv", "manifest.cfg"})
    CHECK_MESSAGE(fs::exists(out / f), f);
}

TEST_CASE("zero horizon yields a single trace row") {
  RunConfig c = small_config();
  c.time.t_final = 0.0;
  c.time.frame_times = {0.0};
  const fs::path out = scratch("t0");
  const auto r = cmd_evolve(c, out);
  CHECK(r.qx.size() == 1);
  CHECK(r.qx_final == doctest::Approx(-11.4).epsilon(1e-6));
  const auto cols = io::read_csv_columns(out / "qx_trace.csv");
  CHECK(cols[0].size() == 1);
}

TEST_CASE("evolution is deterministic to the byte") {
  const RunConfig c = small_config();
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  const auto ra = cmd_evolve(c, a);
  cmd_evolve(c, b);
  for (const char* f : {"qx_trace.csv", "j1_trace.csv", "field.csv", "frames.csv",
                        "summary.csv", "manifest.cfg", "frame_000.bin", "frame_002.bin"}) {
    REQUIRE_MESSAGE(fs::exists(a / f), f);
    CHECK_MESSAGE(slurp(a / f) == slurp(b / f), f);
  }
  CHECK(ra.qx.size() == 11);
  CHECK(ra.max_norm_drift < 1e-12);

  const auto frame = io::read_density_frame(a / "frame_002.bin");
  CHECK(frame.nx == 32);
  CHECK(frame.time == doctest::Approx(0.2));
  // The manifest reproduces the run.
  const RunConfig replay = parse_config(slurp(a / "manifest.cfg"));
  CHECK(manifest(replay) == manifest(c));
}

TEST_CASE("optimisation outputs and replay consistency") {
  const fs::path out = scratch("opt");
  const RunConfig c = small_config();
  int seen = 0;
  const auto r = cmd_optimize(c, out, [&](const McaState&) { ++seen; });
  CHECK(seen == 3);
  CHECK(r.state.J.size() == 3);
  CHECK(r.j1.value.back() == doctest::Approx(r.state.J1.back()).epsilon(1e-6));
  CHECK(r.qx_free.size() == r.qx_control.size());
  const auto conv = io::read_csv_columns(out / "convergence.csv");
  CHECK(conv[0].size() == 3);
  const auto trace = io::read_csv_columns(out / "qx_trace.csv");
  CHECK(trace.size() == 3);

  // Evolving the written field reproduces the controlled trajectory.
  const auto e = cmd_evolve(c, scratch("opt_replay"), out / "field_opt.csv");
  CHECK(e.qx_final == doctest::Approx(r.qx_final).epsilon(1e-9));

  RunConfig none = c;
  none.mca.max_iters = 0;
  const auto z = cmd_optimize(none, scratch("opt0"));
  CHECK(z.state.J.size() == 1);
  CHECK(z.state.stop_reason == "iteration limit");
}

TEST_CASE("single-surface mode runs end to end") {
  RunConfig c = small_config();
  c.mode = Mode::bo;
  c.guess.kind = GuessKind::gauss;
  c.guess.E0 = -0.719e-3;
  c.guess.t0 = 0.1e-6;
  c.guess.sigma = 0.03e-6;
  const auto r = cmd_evolve(c, scratch("bo"));
  CHECK(r.max_norm_drift < 1e-12);
}

TEST_CASE("output directories resolve against the output root") {
  RunConfig c = small_config();
  c.output_dir = "rel";
  ::setenv("CICONTROL_OUTPUT_ROOT", "/tmp/root", 1);
  CHECK(resolve_output_dir(c, std::nullopt) == fs::path("/tmp/root/rel"));
  CHECK(resolve_output_dir(c, fs::path("/abs/x")) == fs::path("/abs/x"));
  CHECK(resolve_output_dir(c, fs::path("y")) == fs::path("/tmp/root/y"));
  ::unsetenv("CICONTROL_OUTPUT_ROOT");
  CHECK(resolve_output_dir(c, std::nullopt) == fs::path("rel"));
}

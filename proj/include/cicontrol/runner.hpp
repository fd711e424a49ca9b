#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "cicontrol/config.hpp"
#include "cicontrol/control.hpp"
#include "cicontrol/observables.hpp"
#include "cicontrol/propagator.hpp"
#include "cicontrol/surfaces.hpp"

namespace cic {

namespace fs = std::filesystem;

/// Everything a run needs, converted once to the internal nm / us / hbar = 1
/// system. Times and lengths below are internal.
struct RunSetup {
  RunConfig config;
  DerivedGeometry geometry;
  InternalModel model;
  Grid2D grid;
  CoefficientFields coeffs;
  double dt = 0.0;
  double t_final = 0.0;
  long snapshot_every = 0;    // in steps
  PacketCenter initial, target;
};

/// Throws ConfigError for inconsistent time grids (cadence or frame times
/// not on the step grid) and ModelError for unphysical parameters.
RunSetup prepare(const RunConfig& config);

/// Spinor propagator, or the single-surface propagator on E-.
std::unique_ptr<SplitOperatorPropagator> make_propagator(const RunSetup& setup, Mode mode);

/// Guess field on the run's time grid. File guesses are read relative to the
/// working directory.
ControlField make_guess(const RunSetup& setup, const GuessSpec& guess);

/// Output directory: `override_dir` if given, else the config's directory;
/// relative paths are placed under $CICONTROL_OUTPUT_ROOT when it is set.
fs::path resolve_output_dir(const RunConfig& config, const std::optional<fs::path>& override_dir);

struct EquilibriumReport {
  DerivedGeometry geometry;
  std::string text;  // aligned human-readable table
};
EquilibriumReport cmd_equilibrium(const RunConfig& config, const fs::path& out_dir);

struct SurfacesReport {
  CiPoint ci;
  double gap_at_ci = 0.0;  // |E+ - E-| at the grid node nearest the CI
};
SurfacesReport cmd_surfaces(const RunConfig& config, const fs::path& out_dir);

struct EvolveReport {
  Trace qx;
  Trace j1;
  double qx_final = 0.0;
  double j1_final = 0.0;
  double max_norm_drift = 0.0;
  double edge_probability = 0.0;
  int crossings = 0;
};
/// Forward propagation under the configured guess field, or under the field
/// in `field_file` (as written by optimize) when given.
EvolveReport cmd_evolve(const RunConfig& config, const fs::path& out_dir,
                        const std::optional<fs::path>& field_file = std::nullopt);

struct OptimizeReport {
  McaState state;
  int plateau = 0;
  Trace qx_control, qx_free, j1;
  int crossings = 0;
  double qx_final = 0.0;
  double edge_probability = 0.0;
};
OptimizeReport cmd_optimize(const RunConfig& config, const fs::path& out_dir,
                            const IterationCallback& progress = {});

}  // namespace cic

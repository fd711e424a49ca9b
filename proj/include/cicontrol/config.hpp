#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cicontrol/control.hpp"
#include "cicontrol/grid.hpp"
#include "cicontrol/params.hpp"

namespace cic {

// Run configuration. Files are INI-style with one section per concern:
//
//   [physical]  ion and trap parameters (SI, required)
//   [grid]      extents in metres, node counts
//   [time]      horizon, step, snapshot cadence, density frame times (seconds)
//   [control]   mode, MCA parameters, initial guess
//   [target]    initial and target packet centres (metres)
//   [output]    output directory
//
// Every value is SI at this boundary and converted once when a run is set up.
// Several files may be layered; later files override earlier ones key by key.

enum class GuessKind { zero, rect, gauss, file };

struct GuessSpec {
  GuessKind kind = GuessKind::zero;
  double amplitude = 0.0;  // rect [V/m]
  double start = 0.0;      // rect [s]
  double duration = 0.0;   // rect [s]
  double E0 = 0.0;         // gauss [V/m]
  double t0 = 0.0;         // gauss [s]
  double sigma = 0.0;      // gauss [s]
  std::string file;        // two-column CSV (t_us, u_V_per_m)
};

struct GridSpec {
  Extents extents{-256e-9, 256e-9, -64e-9, 64e-9};  // [m]
  int nx = 256;
  int nz = 128;
};

struct TimeSpec {
  double t_final = 10e-6;        // [s]
  double dt = 1e-9;              // [s]
  double snapshot_every = 10e-9; // [s]
  std::vector<double> frame_times{0.0, 5e-6, 10e-6};  // [s]
};

struct RunConfig {
  PhysicalParams physical;
  GridSpec grid;
  TimeSpec time;
  Mode mode = Mode::spinor;
  McaConfig mca;
  GuessSpec guess;
  double mask_width = 0.0;             // [grid] cos^8 absorbing layer [m]; 0 = off
  PacketCenter initial{-11.4e-9, 0.0}; // [m]
  PacketCenter target{11.4e-9, 0.0};   // [m]
  std::string output_dir = "out";
};

/// Parses one INI document. Throws ConfigError naming the section and key
/// for missing required keys, unknown keys and malformed values.
RunConfig parse_config(const std::string& text);

/// Loads and layers the files in order, then resolves the merged document
/// like parse_config.
RunConfig load_config(const std::vector<std::filesystem::path>& files);

/// Fully resolved configuration in the same INI format, with every key
/// written out (defaults included). parse_config(manifest(c)) reproduces c.
std::string manifest(const RunConfig& cfg);

std::string to_string(Mode mode);
Mode parse_mode(const std::string& text);
std::string to_string(GuessKind kind);
GuessKind parse_guess_kind(const std::string& text);

}  // namespace cic

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cicontrol/propagator.hpp"

namespace cic::io {

namespace fs = std::filesystem;

/// Column-oriented CSV with a header row. All columns must have equal length.
/// Numbers are printed with `digits` significant digits in C locale, so the
/// output is byte-stable for identical inputs.
void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::span<const double>>& columns, int digits = 12);

/// Matrix CSV for a field sampled on (qx, qz): the first row holds the qz
/// coordinates, every following row starts with qx.
void write_matrix_csv(const fs::path& path, std::span<const double> qx,
                      std::span<const double> qz, std::span<const double> values,
                      int digits = 12);

/// Two-column numeric CSV written by write_csv (header skipped).
std::vector<std::vector<double>> read_csv_columns(const fs::path& path);

/// Control field stored as (t_us, u_V_per_m) with t at step midpoints.
void write_field(const fs::path& path, const ControlField& u);
/// Reads a field written by write_field. Throws ConfigError when its time
/// grid does not match `dt` (in the internal time unit).
ControlField read_field(const fs::path& path, double dt);

/// Flat binary density frame: 32-byte header (8-byte magic "CICDENS1",
/// int64 nx, int64 nz, float64 time) followed by nx * nz float64 values in
/// row-major order, all little-endian.
inline constexpr char kFrameMagic[8] = {'C', 'I', 'C', 'D', 'E', 'N', 'S', '1'};

struct DensityFrame {
  std::int64_t nx = 0;
  std::int64_t nz = 0;
  double time = 0.0;
  std::vector<double> values;
};

void write_density_frame(const fs::path& path, const DensityFrame& frame);
DensityFrame read_density_frame(const fs::path& path);

void write_text(const fs::path& path, const std::string& text);

/// key,value rows.
void write_summary(const fs::path& path,
                   const std::vector<std::pair<std::string, std::string>>& rows);

/// Creates the directory (and parents); throws IoError on failure.
void ensure_directory(const fs::path& dir);

}  // namespace cic::io

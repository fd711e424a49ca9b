#include "cicontrol/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "cicontrol/errors.hpp"

namespace cic::io {

static_assert(std::endian::native == std::endian::little,
              "density frames are written in host order, which must be little-endian");

namespace {

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

void append_number(std::string& line, double x, int digits) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  line += buf;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::span<const double>>& columns, int digits) {
  if (header.size() != columns.size())
    throw std::invalid_argument("CSV header and column count differ");
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns)
    if (c.size() != rows) throw std::invalid_argument("CSV columns differ in length");

  auto out = open_out(path);
  std::string line;
  for (std::size_t k = 0; k < header.size(); ++k) line += (k ? "," : "") + header[k];
  out << line << '\n';
  for (std::size_t r = 0; r < rows; ++r) {
    line.clear();
    for (std::size_t k = 0; k < columns.size(); ++k) {
      if (k) line += ',';
      append_number(line, columns[k][r], digits);
    }
    out << line << '\n';
  }
  finish(out, path);
}

void write_matrix_csv(const fs::path& path, std::span<const double> qx,
                      std::span<const double> qz, std::span<const double> values, int digits) {
  if (values.size() != qx.size() * qz.size())
    throw std::invalid_argument("matrix size does not match its coordinates");
  auto out = open_out(path);
  std::string line = "qx\\qz";
  for (double z : qz) {
    line += ',';
    append_number(line, z, digits);
  }
  out << line << '\n';
  for (std::size_t i = 0; i < qx.size(); ++i) {
    line.clear();
    append_number(line, qx[i], digits);
    for (std::size_t j = 0; j < qz.size(); ++j) {
      line += ',';
      append_number(line, values[i * qz.size() + j], digits);
    }
    out << line << '\n';
  }
  finish(out, path);
}

std::vector<std::vector<double>> read_csv_columns(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);  // header
  std::vector<std::vector<double>> cols;
  long row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t k = 0;
    while (std::getline(ss, cell, ',')) {
      if (cols.size() <= k) cols.resize(k + 1);
      try {
        cols[k].push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw IoError(path.string() + ": malformed number on line " + std::to_string(row));
      }
      ++k;
    }
  }
  for (const auto& c : cols)
    if (c.size() != cols.front().size()) throw IoError(path.string() + ": ragged CSV");
  return cols;
}

void write_field(const fs::path& path, const ControlField& u) {
  std::vector<double> t(u.steps());
  for (long n = 0; n < u.steps(); ++n) t[n] = u.midpoint(n);
  write_csv(path, {"t_us", "u_V_per_m"}, {t, u.samples()}, 17);
}

ControlField read_field(const fs::path& path, double dt) {
  const auto cols = read_csv_columns(path);
  if (cols.size() != 2) throw ConfigError(path.string() + ": field file needs two columns");
  const auto& t = cols[0];
  for (std::size_t n = 0; n < t.size(); ++n) {
    const double expect = (static_cast<double>(n) + 0.5) * dt;
    if (std::abs(t[n] - expect) > 1e-6 * dt)
      throw ConfigError(path.string() + ": field samples are not on the configured time grid (row " +
                        std::to_string(n + 2) + ")");
  }
  return ControlField(cols[1], dt);
}

void write_density_frame(const fs::path& path, const DensityFrame& f) {
  if (f.values.size() != static_cast<std::size_t>(f.nx * f.nz))
    throw std::invalid_argument("density frame size mismatch");
  auto out = open_out(path, std::ios::out | std::ios::binary);
  out.write(kFrameMagic, sizeof kFrameMagic);
  out.write(reinterpret_cast<const char*>(&f.nx), sizeof f.nx);
  out.write(reinterpret_cast<const char*>(&f.nz), sizeof f.nz);
  out.write(reinterpret_cast<const char*>(&f.time), sizeof f.time);
  out.write(reinterpret_cast<const char*>(f.values.data()),
            static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  finish(out, path);
}

DensityFrame read_density_frame(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[8];
  DensityFrame f;
  in.read(magic, sizeof magic);
  in.read(reinterpret_cast<char*>(&f.nx), sizeof f.nx);
  in.read(reinterpret_cast<char*>(&f.nz), sizeof f.nz);
  in.read(reinterpret_cast<char*>(&f.time), sizeof f.time);
  if (!in || std::memcmp(magic, kFrameMagic, sizeof magic) != 0 || f.nx <= 0 || f.nz <= 0)
    throw IoError(path.string() + ": not a density frame");
  f.values.resize(static_cast<std::size_t>(f.nx * f.nz));
  in.read(reinterpret_cast<char*>(f.values.data()),
          static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  if (!in) throw IoError(path.string() + ": truncated density frame");
  return f;
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  finish(out, path);
}

void write_summary(const fs::path& path,
                   const std::vector<std::pair<std::string, std::string>>& rows) {
  auto out = open_out(path);
  out << "key,value\n";
  for (const auto& [k, v] : rows) out << k << ',' << v << '\n';
  finish(out, path);
}

}  // namespace cic::io

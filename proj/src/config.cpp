#include "cicontrol/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>

#include "cicontrol/errors.hpp"

namespace cic {

namespace pt = boost::property_tree;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Known keys per section; anything else is rejected so that a typo cannot
// silently fall back to a default.
const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"physical",
       {"mass_kg", "polarizability_down_c2m2_per_j", "polarizability_up_c2m2_per_j",
        "trap_freq_x_hz", "trap_freq_z_hz", "static_field_v_per_m", "rf_gradient_v_per_m2",
        "exchange_energy_j", "exchange_gradient_over_h_hz_per_m", "com_offset_m"}},
      {"grid", {"qx_min_m", "qx_max_m", "qz_min_m", "qz_max_m", "nx", "nz", "mask_width_m"}},
      {"time", {"t_final_s", "dt_s", "snapshot_every_s", "frame_times_s"}},
      {"control",
       {"mode", "eta", "zeta", "alpha0", "max_iters", "stop_tol", "stop_patience",
        "fixed_point_tol", "guess", "guess_amplitude_v_per_m", "guess_start_s",
        "guess_duration_s", "guess_e0_v_per_m", "guess_t0_s", "guess_sigma_s", "guess_file"}},
      {"target", {"initial_qx_m", "initial_qz_m", "target_qx_m", "target_qz_m"}},
      {"output", {"directory"}},
  };
  return keys;
}

void check_schema(const pt::ptree& tree) {
  for (const auto& [section, body] : tree) {
    const auto it = schema().find(section);
    if (it == schema().end()) throw ConfigError("unknown section [" + section + "]");
    for (const auto& [key, value] : body)
      if (!it->second.contains(key))
        throw ConfigError("unknown key '" + key + "' in section [" + section + "]");
  }
}

std::string path_of(const std::string& section, const std::string& key) {
  return "[" + section + "] " + key;
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  std::optional<std::string> raw(const std::string& section, const std::string& key) const {
    const auto sec = tree_.get_child_optional(pt::ptree::path_type(section, '\0'));
    if (!sec) return std::nullopt;
    const auto v = sec->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    return *v;
  }

  double number(const std::string& section, const std::string& key) const {
    const auto v = raw(section, key);
    if (!v) throw ConfigError("missing required key " + path_of(section, key));
    return to_double(*v, section, key);
  }

  double number(const std::string& section, const std::string& key, double fallback) const {
    const auto v = raw(section, key);
    return v ? to_double(*v, section, key) : fallback;
  }

  int integer(const std::string& section, const std::string& key, int fallback) const {
    const auto v = raw(section, key);
    if (!v) return fallback;
    std::size_t used = 0;
    try {
      const long n = std::stol(*v, &used);
      if (used == v->size() && n >= INT32_MIN && n <= INT32_MAX) return static_cast<int>(n);
    } catch (const std::exception&) {
    }
    throw ConfigError("expected an integer for " + path_of(section, key) + ", got '" + *v + "'");
  }

  std::string text(const std::string& section, const std::string& key,
                   const std::string& fallback) const {
    return raw(section, key).value_or(fallback);
  }

  std::vector<double> list(const std::string& section, const std::string& key,
                           std::vector<double> fallback) const {
    const auto v = raw(section, key);
    if (!v) return fallback;
    std::vector<double> out;
    std::stringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto b = item.find_first_not_of(" \t");
      if (b == std::string::npos) continue;
      out.push_back(to_double(item.substr(b, item.find_last_not_of(" \t") - b + 1), section, key));
    }
    return out;
  }

 private:
  static double to_double(const std::string& s, const std::string& section,
                          const std::string& key) {
    std::size_t used = 0;
    try {
      const double x = std::stod(s, &used);
      if (used == s.size() && std::isfinite(x)) return x;
    } catch (const std::exception&) {
    }
    throw ConfigError("expected a finite number for " + path_of(section, key) + ", got '" + s +
                      "'");
  }

  const pt::ptree& tree_;
};

RunConfig from_tree(const pt::ptree& tree) {
  check_schema(tree);
  const Reader r(tree);
  RunConfig c;

  PhysicalParams& p = c.physical;
  const std::string ph = "physical";
  p.m = r.number(ph, "mass_kg");
  p.rho_down = r.number(ph, "polarizability_down_c2m2_per_j");
  p.rho_up = r.number(ph, "polarizability_up_c2m2_per_j");
  p.omega_x = kTwoPi * r.number(ph, "trap_freq_x_hz");
  p.omega_z = kTwoPi * r.number(ph, "trap_freq_z_hz");
  p.u0 = r.number(ph, "static_field_v_per_m");
  p.alpha = r.number(ph, "rf_gradient_v_per_m2");
  p.U_ex_r0 = r.number(ph, "exchange_energy_j");
  p.F0 = kTwoPi * p.constants.hbar * r.number(ph, "exchange_gradient_over_h_hz_per_m");
  if (r.raw(ph, "com_offset_m")) p.X0_override = r.number(ph, "com_offset_m");
  try {
    p.validate();
  } catch (const ModelError& e) {
    throw ConfigError(std::string("[physical] ") + e.what());
  }

  const GridSpec gd;
  c.grid.extents = {r.number("grid", "qx_min_m", gd.extents.qx_min),
                    r.number("grid", "qx_max_m", gd.extents.qx_max),
                    r.number("grid", "qz_min_m", gd.extents.qz_min),
                    r.number("grid", "qz_max_m", gd.extents.qz_max)};
  c.grid.nx = r.integer("grid", "nx", gd.nx);
  c.grid.nz = r.integer("grid", "nz", gd.nz);
  c.mask_width = r.number("grid", "mask_width_m", 0.0);
  if (!(c.mask_width >= 0.0)) throw ConfigError("[grid] mask_width_m must be non-negative");

  const TimeSpec td;
  c.time.t_final = r.number("time", "t_final_s", td.t_final);
  c.time.dt = r.number("time", "dt_s", td.dt);
  c.time.snapshot_every = r.number("time", "snapshot_every_s", td.snapshot_every);
  c.time.frame_times = r.list("time", "frame_times_s", td.frame_times);
  if (!(c.time.t_final >= 0.0)) throw ConfigError("[time] t_final_s must be non-negative");
  if (!(c.time.dt > 0.0)) throw ConfigError("[time] dt_s must be positive");
  if (!(c.time.snapshot_every > 0.0))
    throw ConfigError("[time] snapshot_every_s must be positive");

  const std::string ct = "control";
  try {
    c.mode = parse_mode(r.text(ct, "mode", "spinor"));
    c.guess.kind = parse_guess_kind(r.text(ct, "guess", "zero"));
  } catch (const ConfigError& e) {
    throw ConfigError("[control] " + std::string(e.what()));
  }
  const McaConfig md;
  c.mca.eta = r.number(ct, "eta", md.eta);
  c.mca.zeta = r.number(ct, "zeta", md.zeta);
  c.mca.alpha0 = r.number(ct, "alpha0", md.alpha0);
  c.mca.max_iters = r.integer(ct, "max_iters", md.max_iters);
  c.mca.stop_tol = r.number(ct, "stop_tol", md.stop_tol);
  c.mca.stop_patience = r.integer(ct, "stop_patience", md.stop_patience);
  c.mca.fixed_point_tol = r.number(ct, "fixed_point_tol", md.fixed_point_tol);
  c.mca.validate();
  c.guess.amplitude = r.number(ct, "guess_amplitude_v_per_m", 0.0);
  c.guess.start = r.number(ct, "guess_start_s", 0.0);
  c.guess.duration = r.number(ct, "guess_duration_s", 0.0);
  c.guess.E0 = r.number(ct, "guess_e0_v_per_m", 0.0);
  c.guess.t0 = r.number(ct, "guess_t0_s", 0.0);
  c.guess.sigma = r.number(ct, "guess_sigma_s", 0.0);
  c.guess.file = r.text(ct, "guess_file", "");
  if (c.guess.kind == GuessKind::gauss && !(c.guess.sigma > 0.0))
    throw ConfigError("[control] guess_sigma_s must be positive for a Gaussian guess");
  if (c.guess.kind == GuessKind::file && c.guess.file.empty())
    throw ConfigError("missing required key [control] guess_file");

  const RunConfig dflt;
  c.initial = {r.number("target", "initial_qx_m", dflt.initial.qx),
               r.number("target", "initial_qz_m", dflt.initial.qz)};
  c.target = {r.number("target", "target_qx_m", dflt.target.qx),
              r.number("target", "target_qz_m", dflt.target.qz)};

  c.output_dir = r.text("output", "directory", dflt.output_dir);
  return c;
}

pt::ptree read_tree(std::istream& in, const std::string& origin) {
  pt::ptree tree;
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(origin + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  return tree;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

std::string to_string(Mode mode) { return mode == Mode::bo ? "bo" : "spinor"; }

Mode parse_mode(const std::string& text) {
  if (text == "spinor") return Mode::spinor;
  if (text == "bo") return Mode::bo;
  throw ConfigError("mode must be 'spinor' or 'bo', got '" + text + "'");
}

std::string to_string(GuessKind kind) {
  switch (kind) {
    case GuessKind::rect: return "rect";
    case GuessKind::gauss: return "gauss";
    case GuessKind::file: return "file";
    case GuessKind::zero: break;
  }
  return "zero";
}

GuessKind parse_guess_kind(const std::string& text) {
  if (text == "zero") return GuessKind::zero;
  if (text == "rect") return GuessKind::rect;
  if (text == "gauss") return GuessKind::gauss;
  if (text == "file") return GuessKind::file;
  throw ConfigError("guess must be one of zero|rect|gauss|file, got '" + text + "'");
}

RunConfig parse_config(const std::string& text) {
  std::istringstream in(text);
  return from_tree(read_tree(in, "<config>"));
}

RunConfig load_config(const std::vector<std::filesystem::path>& files) {
  if (files.empty()) throw ConfigError("no configuration file given");
  pt::ptree merged;
  for (const auto& path : files) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open configuration file " + path.string());
    const pt::ptree tree = read_tree(in, path.string());
    for (const auto& [section, body] : tree)
      for (const auto& [key, value] : body)
        merged.put(pt::ptree::path_type(section + '\0' + key, '\0'), value.data());
  }
  return from_tree(merged);
}

std::string manifest(const RunConfig& c) {
  const PhysicalParams& p = c.physical;
  std::ostringstream out;
  out << "[physical]\n"
      << "mass_kg = " << fmt(p.m) << '\n'
      << "polarizability_down_c2m2_per_j = " << fmt(p.rho_down) << '\n'
      << "polarizability_up_c2m2_per_j = " << fmt(p.rho_up) << '\n'
      << "trap_freq_x_hz = " << fmt(p.omega_x / kTwoPi) << '\n'
      << "trap_freq_z_hz = " << fmt(p.omega_z / kTwoPi) << '\n'
      << "static_field_v_per_m = " << fmt(p.u0) << '\n'
      << "rf_gradient_v_per_m2 = " << fmt(p.alpha) << '\n'
      << "exchange_energy_j = " << fmt(p.U_ex_r0) << '\n'
      << "exchange_gradient_over_h_hz_per_m = " << fmt(p.F0 / (kTwoPi * p.constants.hbar))
      << '\n';
  if (p.X0_override) out << "com_offset_m = " << fmt(*p.X0_override) << '\n';

  out << "\n[grid]\n"
      << "qx_min_m = " << fmt(c.grid.extents.qx_min) << '\n'
      << "qx_max_m = " << fmt(c.grid.extents.qx_max) << '\n'
      << "qz_min_m = " << fmt(c.grid.extents.qz_min) << '\n'
      << "qz_max_m = " << fmt(c.grid.extents.qz_max) << '\n'
      << "nx = " << c.grid.nx << '\n'
      << "nz = " << c.grid.nz << '\n'
      << "mask_width_m = " << fmt(c.mask_width) << '\n';

  out << "\n[time]\n"
      << "t_final_s = " << fmt(c.time.t_final) << '\n'
      << "dt_s = " << fmt(c.time.dt) << '\n'
      << "snapshot_every_s = " << fmt(c.time.snapshot_every) << '\n'
      << "frame_times_s = ";
  for (std::size_t n = 0; n < c.time.frame_times.size(); ++n)
    out << (n ? ", " : "") << fmt(c.time.frame_times[n]);
  out << '\n';

  out << "\n[control]\n"
      << "mode = " << to_string(c.mode) << '\n'
      << "eta = " << fmt(c.mca.eta) << '\n'
      << "zeta = " << fmt(c.mca.zeta) << '\n'
      << "alpha0 = " << fmt(c.mca.alpha0) << '\n'
      << "max_iters = " << c.mca.max_iters << '\n'
      << "stop_tol = " << fmt(c.mca.stop_tol) << '\n'
      << "stop_patience = " << c.mca.stop_patience << '\n'
      << "fixed_point_tol = " << fmt(c.mca.fixed_point_tol) << '\n'
      << "guess = " << to_string(c.guess.kind) << '\n'
      << "guess_amplitude_v_per_m = " << fmt(c.guess.amplitude) << '\n'
      << "guess_start_s = " << fmt(c.guess.start) << '\n'
      << "guess_duration_s = " << fmt(c.guess.duration) << '\n'
      << "guess_e0_v_per_m = " << fmt(c.guess.E0) << '\n'
      << "guess_t0_s = " << fmt(c.guess.t0) << '\n'
      << "guess_sigma_s = " << fmt(c.guess.sigma) << '\n';
  if (!c.guess.file.empty()) out << "guess_file = " << c.guess.file << '\n';

  out << "\n[target]\n"
      << "initial_qx_m = " << fmt(c.initial.qx) << '\n'
      << "initial_qz_m = " << fmt(c.initial.qz) << '\n'
      << "target_qx_m = " << fmt(c.target.qx) << '\n'
      << "target_qz_m = " << fmt(c.target.qz) << '\n';

  out << "\n[output]\n"
      << "directory = " << c.output_dir << '\n';
  return out.str();
}

}  // namespace cic

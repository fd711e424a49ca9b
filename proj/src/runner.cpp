#include "cicontrol/runner.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <numbers>
#include <sstream>

#include "cicontrol/errors.hpp"
#include "cicontrol/io.hpp"

namespace cic {

namespace {

// Boundary conversions: the config is SI, the model runs in nm and us.
constexpr double kNm = 1e9;
constexpr double kUs = 1e6;
constexpr double kCrossingBand = 0.5;  // nm

std::string num(double x, int digits = 12) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

long steps_on_grid(double t, double dt, const std::string& what) {
  const double exact = t / dt;
  const long n = std::llround(exact);
  if (std::abs(exact - static_cast<double>(n)) > 1e-6)
    throw ConfigError(what + " is not a multiple of [time] dt_s");
  return n;
}

// Density frames requested in the config, keyed by step index.
struct FrameWriter {
  std::map<long, std::size_t> wanted;  // step -> frame number
  fs::path dir;
  const Grid2D* grid = nullptr;
  std::vector<std::string> files;
  std::vector<double> times, norms;

  void maybe_write(long n, double t, const WaveFunction& psi) {
    const auto it = wanted.find(n);
    if (it == wanted.end()) return;
    io::DensityFrame f{grid->nx, grid->nz, t, density(psi)};
    char name[32];
    std::snprintf(name, sizeof name, "frame_%03zu.bin", it->second);
    io::write_density_frame(dir / name, f);
    double s = 0.0;
    for (double v : f.values) s += v;
    files.emplace_back(name);
    times.push_back(t);
    norms.push_back(s * grid->cell_area());
  }

  void write_index() const {
    std::ostringstream out;
    out << "file,t_us,norm\n";
    for (std::size_t k = 0; k < files.size(); ++k)
      out << files[k] << ',' << num(times[k]) << ',' << num(norms[k], 15) << '\n';
    io::write_text(dir / "frames.csv", out.str());
  }
};

FrameWriter make_frames(const RunSetup& s, const fs::path& dir) {
  FrameWriter fw;
  fw.dir = dir;
  fw.grid = &s.grid;
  const long nt = std::llround(s.t_final / s.dt);
  std::size_t k = 0;
  for (double t : s.config.time.frame_times) {
    const long n = steps_on_grid(t * kUs, s.dt, "[time] frame_times_s entry");
    if (n > nt || n < 0) continue;
    fw.wanted.emplace(n, k++);
  }
  return fw;
}

struct Forward {
  PropagationResult result;
  Trace j1;
};

Forward run_forward(const SplitOperatorPropagator& prop, const RunSetup& s,
                    const WaveFunction& psi0, const WaveFunction& target,
                    const ControlField& field, FrameWriter* frames) {
  Forward f;
  f.j1.label = "J1";
  RecordSpec spec;
  spec.every = s.snapshot_every;
  spec.observer = [&](long n, double t, const WaveFunction& psi) {
    f.j1.push(t, j1_terminal(psi, target, s.grid));
    if (frames) frames->maybe_write(n, t, psi);
  };
  f.result = propagate_forward(prop, psi0, field, spec);
  return f;
}

double max_norm_drift(const PropagationRecord& r) {
  double d = 0.0;
  for (double n : r.norm) d = std::max(d, std::abs(n - 1.0));
  return d;
}

std::vector<std::pair<std::string, std::string>> common_summary(const RunSetup& s) {
  return {{"mode", to_string(s.config.mode)},
          {"grid", std::to_string(s.grid.nx) + "x" + std::to_string(s.grid.nz)},
          {"dt_us", num(s.dt)},
          {"t_final_us", num(s.t_final)},
          {"ci_qx_nm", num(ci_location(s.model).qx)},
          {"crossing_band_nm", num(kCrossingBand)}};
}

}  // namespace

RunSetup prepare(const RunConfig& c) {
  RunSetup s;
  s.config = c;
  s.geometry = derive_geometry(c.physical);
  s.model = to_internal(c.physical, s.geometry);
  const Extents& e = c.grid.extents;
  s.grid = make_grid({e.qx_min * kNm, e.qx_max * kNm, e.qz_min * kNm, e.qz_max * kNm}, c.grid.nx,
                     c.grid.nz);
  s.coeffs = eval_coefficients(s.model, s.grid);
  s.dt = c.time.dt * kUs;
  s.t_final = c.time.t_final * kUs;
  const long nt = steps_on_grid(s.t_final, s.dt, "[time] t_final_s");
  s.snapshot_every = steps_on_grid(c.time.snapshot_every * kUs, s.dt, "[time] snapshot_every_s");
  if (s.snapshot_every < 1) throw ConfigError("[time] snapshot_every_s is shorter than dt_s");
  if (nt % s.snapshot_every != 0)
    throw ConfigError("[time] t_final_s is not a multiple of snapshot_every_s");
  for (double t : c.time.frame_times) {
    const long n = steps_on_grid(t * kUs, s.dt, "[time] frame_times_s entry");
    if (n % s.snapshot_every != 0)
      throw ConfigError("[time] frame_times_s entries must be multiples of snapshot_every_s");
  }
  s.initial = {c.initial.qx * kNm, c.initial.qz * kNm};
  s.target = {c.target.qx * kNm, c.target.qz * kNm};
  return s;
}

std::unique_ptr<SplitOperatorPropagator> make_propagator(const RunSetup& s, Mode mode) {
  const auto coupling = ControlCoupling::single_ion(s.model);
  std::unique_ptr<SplitOperatorPropagator> prop;
  if (mode == Mode::bo)
    prop = std::make_unique<SplitOperatorPropagator>(s.grid, s.model.mu, s.dt,
                                                     eval_surfaces(s.coeffs).E_minus, coupling);
  else
    prop = std::make_unique<SplitOperatorPropagator>(s.grid, s.model.mu, s.dt, s.coeffs,
                                                     coupling);
  if (s.config.mask_width > 0.0) prop->enable_absorbing_mask(s.config.mask_width * kNm);
  return prop;
}

ControlField make_guess(const RunSetup& s, const GuessSpec& g) {
  switch (g.kind) {
    case GuessKind::rect:
      return rectangular_pulse(g.amplitude, g.start * kUs, g.duration * kUs, s.t_final, s.dt);
    case GuessKind::gauss:
      return gaussian_pulse(g.E0, g.t0 * kUs, g.sigma * kUs, s.t_final, s.dt);
    case GuessKind::file: {
      ControlField u = io::read_field(g.file, s.dt);
      if (u.steps() != std::llround(s.t_final / s.dt))
        throw ConfigError(g.file + ": field length does not match [time] t_final_s");
      return u;
    }
    case GuessKind::zero: break;
  }
  return ControlField(s.t_final, s.dt);
}

fs::path resolve_output_dir(const RunConfig& c, const std::optional<fs::path>& override_dir) {
  fs::path dir = override_dir ? *override_dir : fs::path(c.output_dir);
  if (dir.is_relative()) {
    if (const char* root = std::getenv("CICONTROL_OUTPUT_ROOT"); root && *root)
      dir = fs::path(root) / dir;
  }
  return dir;
}

EquilibriumReport cmd_equilibrium(const RunConfig& c, const fs::path& out) {
  EquilibriumReport r;
  r.geometry = derive_geometry(c.physical);
  const DerivedGeometry& g = r.geometry;
  const double two_pi = 2.0 * std::numbers::pi;

  struct Row {
    std::string name;
    double value;
    std::string unit;
  };
  const std::vector<Row> rows{
      {"z0", g.z0 * 1e6, "um"},
      {"X0_used", g.X0 * 1e6, "um"},
      {"X0_solved", g.X0_solved * 1e6, "um"},
      {"omega_bar_x_over_2pi", g.omega_bar_x / two_pi * 1e-6, "MHz"},
      {"omega_bar_z_over_2pi", g.omega_bar_z / two_pi * 1e-6, "MHz"},
      {"mu", g.mu, "kg"},
      {"M", g.M, "kg"},
      {"rho_plus", g.rho_plus, "C^2 m^2 / J"},
      {"rho_minus", g.rho_minus, "C^2 m^2 / J"},
  };

  std::ostringstream text, csv;
  csv << "quantity,value,unit\n";
  for (const Row& row : rows) {
    char line[128];
    std::snprintf(line, sizeof line, "%-22s %16.6g  %s\n", row.name.c_str(), row.value,
                  row.unit.c_str());
    text << line;
    csv << row.name << ',' << num(row.value) << ',' << row.unit << '\n';
  }
  text << (g.X0_from_override ? "X0 source: configured com_offset_m (solved value shown above)\n"
                              : "X0 source: solved from static_field_v_per_m\n");
  r.text = text.str();

  io::ensure_directory(out);
  io::write_text(out / "equilibrium.csv", csv.str());
  io::write_text(out / "manifest.cfg", manifest(c));
  return r;
}

SurfacesReport cmd_surfaces(const RunConfig& c, const fs::path& out) {
  const RunSetup s = prepare(c);
  const AdiabaticSurfaces surf = eval_surfaces(s.coeffs, s.model);
  const MixingAngle lam = mixing_angle(s.coeffs);
  const Grid2D& g = s.grid;

  io::ensure_directory(out);
  io::write_matrix_csv(out / "E_plus.csv", g.qx, g.qz, surf.E_plus);
  io::write_matrix_csv(out / "E_minus.csv", g.qx, g.qz, surf.E_minus);
  io::write_matrix_csv(out / "S.csv", g.qx, g.qz, s.coeffs.S);
  io::write_matrix_csv(out / "W.csv", g.qx, g.qz, s.coeffs.W);
  io::write_matrix_csv(out / "G.csv", g.qx, g.qz, s.coeffs.G);
  io::write_matrix_csv(out / "Lambda.csv", g.qx, g.qz, lam.angle);

  // qz = 0 slice (nearest grid row).
  int j0 = 0;
  for (int j = 1; j < g.nz; ++j)
    if (std::abs(g.qz[j]) < std::abs(g.qz[j0])) j0 = j;
  std::vector<double> ep(g.nx), em(g.nx), S(g.nx), W(g.nx), G(g.nx);
  for (int i = 0; i < g.nx; ++i) {
    const auto n = g.index(i, j0);
    ep[i] = surf.E_plus[n];
    em[i] = surf.E_minus[n];
    S[i] = s.coeffs.S[n];
    W[i] = s.coeffs.W[n];
    G[i] = s.coeffs.G[n];
  }
  io::write_csv(out / "slice_qz0.csv", {"qx_nm", "E_plus", "E_minus", "S", "W", "G"},
                {g.qx, ep, em, S, W, G});

  SurfacesReport r;
  r.ci = surf.ci;
  int ic = 0, jc = 0;
  for (int i = 1; i < g.nx; ++i)
    if (std::abs(g.qx[i] - r.ci.qx) < std::abs(g.qx[ic] - r.ci.qx)) ic = i;
  for (int j = 1; j < g.nz; ++j)
    if (std::abs(g.qz[j] - r.ci.qz) < std::abs(g.qz[jc] - r.ci.qz)) jc = j;
  const auto n = g.index(ic, jc);
  r.gap_at_ci = std::abs(surf.E_plus[n] - surf.E_minus[n]);

  io::write_summary(out / "ci.csv", {{"ci_qx_nm", num(r.ci.qx)},
                                     {"ci_qz_nm", num(r.ci.qz)},
                                     {"gap_at_nearest_node", num(r.gap_at_ci)},
                                     {"energy_unit", "hbar/us"}});
  io::write_text(out / "manifest.cfg", manifest(c));
  return r;
}

EvolveReport cmd_evolve(const RunConfig& c, const fs::path& out,
                        const std::optional<fs::path>& field_file) {
  const RunSetup s = prepare(c);
  const auto prop = make_propagator(s, c.mode);
  const WaveFunction psi0 = initial_packet(s.model, s.grid, s.initial, c.mode);
  const WaveFunction target = gaussian_packet(s.model, s.grid, s.target);
  ControlField field;
  if (field_file) {
    field = io::read_field(*field_file, s.dt);
    if (field.steps() != std::llround(s.t_final / s.dt))
      throw ConfigError(field_file->string() + ": field length does not match [time] t_final_s");
  } else {
    field = make_guess(s, c.guess);
  }

  io::ensure_directory(out);
  FrameWriter frames = make_frames(s, out);
  Forward f = run_forward(*prop, s, psi0, target, field, &frames);

  EvolveReport r;
  r.qx = {"qx", f.result.record.t, f.result.record.qx_mean};
  r.j1 = std::move(f.j1);
  r.qx_final = r.qx.value.back();
  r.j1_final = r.j1.value.back();
  r.max_norm_drift = max_norm_drift(f.result.record);
  r.edge_probability = edge_probability(f.result.final_state, s.grid);
  r.crossings = crossing_count(r.qx, ci_location(s.model).qx, kCrossingBand);

  io::write_csv(out / "qx_trace.csv", {"t_us", "qx_nm"}, {r.qx.t, r.qx.value});
  io::write_csv(out / "j1_trace.csv", {"t_us", "J1"}, {r.j1.t, r.j1.value});
  io::write_field(out / "field.csv", field);
  frames.write_index();
  auto summary = common_summary(s);
  summary.insert(summary.end(), {{"qx_final_nm", num(r.qx_final)},
                                 {"j1_final", num(r.j1_final)},
                                 {"crossings", std::to_string(r.crossings)},
                                 {"max_norm_drift", num(r.max_norm_drift, 3)},
                                 {"edge_probability", num(r.edge_probability, 3)}});
  io::write_summary(out / "summary.csv", summary);
  io::write_text(out / "manifest.cfg", manifest(c));
  return r;
}

OptimizeReport cmd_optimize(const RunConfig& c, const fs::path& out,
                            const IterationCallback& progress) {
  const RunSetup s = prepare(c);
  const auto prop = make_propagator(s, c.mode);
  const WaveFunction psi0 = initial_packet(s.model, s.grid, s.initial, c.mode);
  const WaveFunction target = gaussian_packet(s.model, s.grid, s.target);
  const ControlField guess = make_guess(s, c.guess);

  io::ensure_directory(out);
  io::write_text(out / "manifest.cfg", manifest(c));

  OptimizeReport r;
  r.state = run_mca(*prop, psi0, target, guess, c.mca, progress);
  const McaState& st = r.state;
  r.plateau = plateau_iteration(st.J);

  std::vector<double> k(st.J.size());
  for (std::size_t n = 0; n < k.size(); ++n) k[n] = static_cast<double>(n);
  io::write_csv(out / "convergence.csv", {"k", "J", "J1", "J2"}, {k, st.J, st.J1, st.J2}, 15);
  io::write_field(out / "field_opt.csv", st.u);

  FrameWriter frames = make_frames(s, out);
  Forward controlled = run_forward(*prop, s, psi0, target, st.u, &frames);
  Forward free = run_forward(*prop, s, psi0, target, ControlField(s.t_final, s.dt), nullptr);
  r.qx_control = {"qx_control", controlled.result.record.t, controlled.result.record.qx_mean};
  r.qx_free = {"qx_zero_field", free.result.record.t, free.result.record.qx_mean};
  r.j1 = std::move(controlled.j1);
  r.qx_final = r.qx_control.value.back();
  r.edge_probability = edge_probability(controlled.result.final_state, s.grid);
  const double ci_qx = ci_location(s.model).qx;
  r.crossings = crossing_count(r.qx_control, ci_qx, kCrossingBand);

  io::write_csv(out / "qx_trace.csv", {"t_us", "qx_control_nm", "qx_zero_field_nm"},
                {r.qx_control.t, r.qx_control.value, r.qx_free.value});
  io::write_csv(out / "j1_trace.csv", {"t_us", "J1"}, {r.j1.t, r.j1.value});
  frames.write_index();

  auto summary = common_summary(s);
  summary.insert(summary.end(),
                 {{"iterations", std::to_string(st.iteration)},
                  {"plateau_iteration", std::to_string(r.plateau)},
                  {"stop_reason", st.stop_reason},
                  {"J_final", num(st.J.back())},
                  {"J1_final", num(st.J1.back())},
                  {"J2_final", num(st.J2.back())},
                  {"j1_replay", num(r.j1.value.back())},
                  {"qx_final_nm", num(r.qx_final)},
                  {"qx_final_zero_field_nm", num(r.qx_free.value.back())},
                  {"crossings_control", std::to_string(r.crossings)},
                  {"crossings_zero_field",
                   std::to_string(crossing_count(r.qx_free, ci_qx, kCrossingBand))},
                  {"edge_probability", num(r.edge_probability, 3)},
                  {"reconstruction_error", num(st.reconstruction_error, 3)}});
  io::write_summary(out / "summary.csv", summary);
  return r;
}

}  // namespace cic

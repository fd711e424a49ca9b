#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "cicontrol/config.hpp"
#include "cicontrol/control.hpp"
#include "cicontrol/errors.hpp"
#include "cicontrol/observables.hpp"
#include "cicontrol/runner.hpp"
#include "cicontrol/surfaces.hpp"

namespace py = pybind11;
using namespace cic;

namespace {

py::array_t<double> as_array(const std::vector<double>& v) {
  return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

py::array_t<double> as_matrix(const std::vector<double>& v, const Grid2D& g) {
  return py::array_t<double>({static_cast<py::ssize_t>(g.nx), static_cast<py::ssize_t>(g.nz)},
                             v.data());
}

// Packs a grid-shaped state as a (components, nx, nz) complex array.
py::array_t<complex> state_array(const WaveFunction& psi) {
  py::array_t<complex> out({static_cast<py::ssize_t>(psi.components()),
                            static_cast<py::ssize_t>(psi.nx()), static_cast<py::ssize_t>(psi.nz())});
  std::copy(psi.data().begin(), psi.data().end(), out.mutable_data());
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Two-ion spinor wave-packet dynamics and monotonic field optimisation";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ModelError>(m, "ModelError", PyExc_ValueError);
  py::register_exception<ModeError>(m, "ModeError", PyExc_RuntimeError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<NumericalBlowup>(m, "NumericalBlowup", PyExc_ArithmeticError);
  py::register_exception<MonotonicityFault>(m, "MonotonicityFault", PyExc_RuntimeError);

  py::enum_<Mode>(m, "Mode").value("spinor", Mode::spinor).value("bo", Mode::bo);

  py::class_<PhysicalParams>(m, "PhysicalParams")
      .def(py::init<>())
      .def_static("strontium_reference", &PhysicalParams::strontium_reference)
      .def_readwrite("m", &PhysicalParams::m)
      .def_readwrite("rho_down", &PhysicalParams::rho_down)
      .def_readwrite("rho_up", &PhysicalParams::rho_up)
      .def_readwrite("omega_x", &PhysicalParams::omega_x)
      .def_readwrite("omega_z", &PhysicalParams::omega_z)
      .def_readwrite("u0", &PhysicalParams::u0)
      .def_readwrite("alpha", &PhysicalParams::alpha)
      .def_readwrite("U_ex_r0", &PhysicalParams::U_ex_r0)
      .def_readwrite("F0", &PhysicalParams::F0)
      .def_readwrite("X0_override", &PhysicalParams::X0_override)
      .def("validate", &PhysicalParams::validate);

  py::class_<DerivedGeometry>(m, "DerivedGeometry")
      .def_readonly("mu", &DerivedGeometry::mu)
      .def_readonly("M", &DerivedGeometry::M)
      .def_readonly("z0", &DerivedGeometry::z0)
      .def_readonly("X0", &DerivedGeometry::X0)
      .def_readonly("X0_solved", &DerivedGeometry::X0_solved)
      .def_readonly("X0_from_override", &DerivedGeometry::X0_from_override)
      .def_readonly("omega_bar_x", &DerivedGeometry::omega_bar_x)
      .def_readonly("omega_bar_z", &DerivedGeometry::omega_bar_z);

  py::class_<InternalModel>(m, "InternalModel",
                            "Model constants in nm, us and hbar = 1; fields in V/m")
      .def_readonly("mu", &InternalModel::mu)
      .def_readonly("omega_bar_x", &InternalModel::omega_bar_x)
      .def_readonly("omega_bar_z", &InternalModel::omega_bar_z)
      .def_readonly("z0", &InternalModel::z0)
      .def_readonly("X0", &InternalModel::X0)
      .def_readonly("U_ex", &InternalModel::U_ex)
      .def_readonly("F0", &InternalModel::F0)
      .def_readonly("G_slope", &InternalModel::G_slope)
      .def_readonly("charge", &InternalModel::charge);

  m.def("solve_z0", &solve_z0, py::arg("params"), "Axial equilibrium separation [m]");
  m.def("solve_X0", &solve_X0, py::arg("params"), "Transverse CoM equilibrium [m]");
  m.def("derive_geometry", &derive_geometry, py::arg("params"));
  m.def(
      "internal_model",
      [](const PhysicalParams& p) { return to_internal(p, derive_geometry(p)); },
      py::arg("params"));

  py::class_<Grid2D>(m, "Grid2D")
      .def_readonly("nx", &Grid2D::nx)
      .def_readonly("nz", &Grid2D::nz)
      .def_readonly("dx", &Grid2D::dx)
      .def_readonly("dz", &Grid2D::dz)
      .def_property_readonly("qx", [](const Grid2D& g) { return as_array(g.qx); })
      .def_property_readonly("qz", [](const Grid2D& g) { return as_array(g.qz); });
  m.def(
      "make_grid",
      [](double qx_min, double qx_max, double qz_min, double qz_max, int nx, int nz) {
        return make_grid({qx_min, qx_max, qz_min, qz_max}, nx, nz);
      },
      py::arg("qx_min"), py::arg("qx_max"), py::arg("qz_min"), py::arg("qz_max"), py::arg("nx"),
      py::arg("nz"), "Uniform periodic grid (internal length units)");

  m.def(
      "surfaces",
      [](const InternalModel& model, const Grid2D& g) {
        const CoefficientFields c = eval_coefficients(model, g);
        const AdiabaticSurfaces s = eval_surfaces(c, model);
        py::dict d;
        d["S"] = as_matrix(c.S, g);
        d["W"] = as_matrix(c.W, g);
        d["G"] = as_matrix(c.G, g);
        d["E_plus"] = as_matrix(s.E_plus, g);
        d["E_minus"] = as_matrix(s.E_minus, g);
        d["Lambda"] = as_matrix(mixing_angle(c).angle, g);
        d["ci"] = py::make_tuple(s.ci.qx, s.ci.qz);
        return d;
      },
      py::arg("model"), py::arg("grid"));
  m.def("mixing_angle", py::overload_cast<double, double>(&mixing_angle), py::arg("W"),
        py::arg("G"));

  m.def(
      "evolve",
      [](const InternalModel& model, const Grid2D& g, Mode mode, double dt,
         const std::vector<double>& field, std::pair<double, double> start) {
        const CoefficientFields c = eval_coefficients(model, g);
        const auto coupling = ControlCoupling::single_ion(model);
        const SplitOperatorPropagator prop =
            mode == Mode::bo ? SplitOperatorPropagator(g, model.mu, dt,
                                                       eval_surfaces(c).E_minus, coupling)
                             : SplitOperatorPropagator(g, model.mu, dt, c, coupling);
        const WaveFunction psi0 = initial_packet(model, g, {start.first, start.second}, mode);
        PropagationResult r;
        {
          py::gil_scoped_release release;
          r = propagate_forward(prop, psi0, ControlField(field, dt), RecordSpec{1, {}});
        }
        py::dict d;
        d["t"] = as_array(r.record.t);
        d["qx"] = as_array(r.record.qx_mean);
        d["norm"] = as_array(r.record.norm);
        d["state"] = state_array(r.final_state);
        return d;
      },
      py::arg("model"), py::arg("grid"), py::arg("mode"), py::arg("dt"), py::arg("field"),
      py::arg("start"), "Forward propagation; field samples act on consecutive steps of dt");

  m.def(
      "optimize",
      [](const InternalModel& model, const Grid2D& g, Mode mode, double dt,
         const std::vector<double>& guess, std::pair<double, double> start,
         std::pair<double, double> goal, double alpha0, int max_iters) {
        const CoefficientFields c = eval_coefficients(model, g);
        const auto coupling = ControlCoupling::single_ion(model);
        const SplitOperatorPropagator prop =
            mode == Mode::bo ? SplitOperatorPropagator(g, model.mu, dt,
                                                       eval_surfaces(c).E_minus, coupling)
                             : SplitOperatorPropagator(g, model.mu, dt, c, coupling);
        const WaveFunction psi0 = initial_packet(model, g, {start.first, start.second}, mode);
        const WaveFunction target = gaussian_packet(model, g, {goal.first, goal.second});
        McaConfig cfg;
        cfg.alpha0 = alpha0;
        cfg.max_iters = max_iters;
        McaState st;
        {
          py::gil_scoped_release release;
          st = run_mca(prop, psi0, target, ControlField(guess, dt), cfg);
        }
        py::dict d;
        d["J"] = as_array(st.J);
        d["J1"] = as_array(st.J1);
        d["J2"] = as_array(st.J2);
        d["u"] = as_array(std::vector<double>(st.u.samples().begin(), st.u.samples().end()));
        d["iterations"] = st.iteration;
        d["stop_reason"] = st.stop_reason;
        return d;
      },
      py::arg("model"), py::arg("grid"), py::arg("mode"), py::arg("dt"), py::arg("guess"),
      py::arg("start"), py::arg("goal"), py::arg("alpha0") = 0.01, py::arg("max_iters") = 200);

  m.def(
      "crossing_count",
      [](const std::vector<double>& v, double ref, double band) {
        return crossing_count(std::span<const double>(v), ref, band);
      },
      py::arg("values"), py::arg("reference"), py::arg("band") = 0.5);
  m.def(
      "plateau_iteration",
      [](const std::vector<double>& J, double fraction) { return plateau_iteration(J, fraction); },
      py::arg("J"), py::arg("fraction") = 0.99);

  py::class_<RunConfig>(m, "RunConfig")
      .def_readwrite("physical", &RunConfig::physical)
      .def_readwrite("output_dir", &RunConfig::output_dir)
      .def_property(
          "mode", [](const RunConfig& c) { return c.mode; },
          [](RunConfig& c, Mode md) { c.mode = md; })
      .def_property(
          "max_iters", [](const RunConfig& c) { return c.mca.max_iters; },
          [](RunConfig& c, int n) { c.mca.max_iters = n; });
  m.def("parse_config", &parse_config, py::arg("text"));
  m.def("load_config", &load_config, py::arg("files"));
  m.def("manifest", &manifest, py::arg("config"));

  m.def(
      "cmd_equilibrium",
      [](const RunConfig& c, const fs::path& out) { return cmd_equilibrium(c, out).text; },
      py::arg("config"), py::arg("out"));
  m.def(
      "cmd_surfaces",
      [](const RunConfig& c, const fs::path& out) {
        const SurfacesReport r = cmd_surfaces(c, out);
        return py::make_tuple(r.ci.qx, r.ci.qz, r.gap_at_ci);
      },
      py::arg("config"), py::arg("out"));
  m.def(
      "cmd_evolve",
      [](const RunConfig& c, const fs::path& out, std::optional<fs::path> field) {
        EvolveReport r;
        {
          py::gil_scoped_release release;
          r = cmd_evolve(c, out, field);
        }
        py::dict d;
        d["qx_final"] = r.qx_final;
        d["j1_final"] = r.j1_final;
        d["crossings"] = r.crossings;
        d["max_norm_drift"] = r.max_norm_drift;
        return d;
      },
      py::arg("config"), py::arg("out"), py::arg("field_file") = py::none());
  m.def(
      "cmd_optimize",
      [](const RunConfig& c, const fs::path& out) {
        OptimizeReport r;
        {
          py::gil_scoped_release release;
          r = cmd_optimize(c, out);
        }
        py::dict d;
        d["iterations"] = r.state.iteration;
        d["J1_final"] = r.state.J1.back();
        d["plateau"] = r.plateau;
        d["qx_final"] = r.qx_final;
        d["crossings"] = r.crossings;
        return d;
      },
      py::arg("config"), py::arg("out"));
}

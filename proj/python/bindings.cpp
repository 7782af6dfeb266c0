#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "esav/cli_io.hpp"
#include "esav/errors.hpp"

namespace py = pybind11;
using namespace esav;

namespace {

py::array_t<double> to_array(const Field& f) {
  const Grid& g = f.grid();
  py::array_t<double> out({g.ny(), g.nx()});
  std::copy(f.values().begin(), f.values().end(), out.mutable_data());
  return out;
}

Field from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
                 double lx, double ly) {
  if (a.ndim() != 2) throw InvalidArgument("expected a 2-D array indexed [y, x]");
  Grid g(lx, ly, static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  return Field(g, std::vector<double>(a.data(), a.data() + a.size()));
}

py::dict trace_columns(const std::vector<StepReport>& trace) {
  const auto n = static_cast<py::ssize_t>(trace.size());
  py::array_t<long> step(n);
  py::array_t<double> time(n), energy(n), ln_r(n), xi(n), u(n), lambda0(n), diss(n), mass(n);
  for (py::ssize_t i = 0; i < n; ++i) {
    const StepReport& r = trace[i];
    step.mutable_at(i) = r.step;
    time.mutable_at(i) = r.time;
    energy.mutable_at(i) = r.energy_original;
    ln_r.mutable_at(i) = r.ln_r_scaled;
    xi.mutable_at(i) = r.xi;
    u.mutable_at(i) = r.u_of_xi;
    lambda0.mutable_at(i) = r.lambda0.value_or(std::numeric_limits<double>::quiet_NaN());
    diss.mutable_at(i) = r.dissipation;
    mass.mutable_at(i) = r.mass;
  }
  py::dict d;
  d["step"] = step;
  d["time"] = time;
  d["energy_original"] = energy;
  d["ln_r_scaled"] = ln_r;
  d["xi"] = xi;
  d["u_of_xi"] = u;
  d["lambda0"] = lambda0;
  d["dissipation"] = diss;
  d["mass"] = mass;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Exponential SAV gradient-flow solvers (C++ core)";
  m.attr("__version__") = std::string(kVersion);

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<BlowUpError>(m, "BlowUpError", PyExc_ArithmeticError);
  py::register_exception<RunAborted>(m, "RunAborted", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);

  py::class_<ExperimentConfig>(m, "Config")
      .def_static("parse", [](const std::string& text) { return parse_config_text(text); },
                  py::arg("text"))
      .def_static("load", [](const std::string& path) { return parse_config(path); },
                  py::arg("path"))
      .def("emit", [](const ExperimentConfig& c) { return emit_config(c); })
      .def("validate", [](const ExperimentConfig& c) { validate(c); })
      .def_property_readonly("model", [](const ExperimentConfig& c) {
        return model_name(c.model.kind);
      })
      .def_property("scheme", [](const ExperimentConfig& c) { return scheme_name(c.scheme); },
                    [](ExperimentConfig& c, const std::string& s) {
                      c.scheme = parse_scheme_kind(s);
                    })
      .def_readwrite("order", &ExperimentConfig::order)
      .def_readwrite("dt", &ExperimentConfig::dt)
      .def_readwrite("t_end", &ExperimentConfig::t_end)
      .def_readwrite("s_scale", &ExperimentConfig::s_scale)
      .def_readwrite("kappa", &ExperimentConfig::kappa)
      .def_readwrite("seed", &ExperimentConfig::seed)
      .def_readwrite("snapshot_times", &ExperimentConfig::snapshot_times)
      .def_property(
          "shape", [](const ExperimentConfig& c) { return py::make_tuple(c.grid.ny, c.grid.nx); },
          [](ExperimentConfig& c, std::pair<int, int> s) {
            c.grid.ny = s.first;
            c.grid.nx = s.second;
          })
      .def_property_readonly("extent", [](const ExperimentConfig& c) {
        return py::make_tuple(c.grid.lx, c.grid.ly);
      })
      .def("__eq__", [](const ExperimentConfig& a, const ExperimentConfig& b) { return a == b; })
      .def("__repr__", [](const ExperimentConfig& c) {
        return "<esav.Config " + model_name(c.model.kind) + " " + scheme_name(c.scheme) +
               " k=" + std::to_string(c.order) + ">";
      });

  m.def(
      "preset",
      [](int n, double g) {
        switch (n) {
          case 1: return example1_allen_cahn();
          case 2: return example2_circles();
          case 3: return example3_random(g);
          case 4: return example4_crystallites();
          default: throw InvalidArgument("preset: n must be 1..4");
        }
      },
      py::arg("n"), py::arg("g") = 0.0);
  m.def("preset_cahn_hilliard", &example1_cahn_hilliard);

  m.def("u_poly", &u_poly, py::arg("k"), py::arg("xi"));
  m.def(
      "bdf_table",
      [](int k) {
        const BdfTable t = bdf_table(k);
        py::dict d;
        d["alpha"] = t.alpha;
        d["hist_weights"] = t.hist_weights;
        d["extrap_weights"] = t.extrap_weights;
        d["u_coeffs"] = t.u_coeffs;
        return d;
      },
      py::arg("k"));

  m.def(
      "initial_condition",
      [](const ExperimentConfig& c) {
        return to_array(make_ic(c.ic, Grid(c.grid.lx, c.grid.ly, c.grid.nx, c.grid.ny), c.seed));
      },
      py::arg("config"));

  m.def(
      "free_energy",
      [](const ExperimentConfig& c,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& phi) {
        const Field f = from_array(phi, c.grid.lx, c.grid.ly);
        return free_energy(f, build_model(c.model, f.grid(), c.s_scale));
      },
      py::arg("config"), py::arg("phi"));

  m.def(
      "run",
      [](const ExperimentConfig& c) {
        RunResult r;
        {
          py::gil_scoped_release release;
          r = run(c);
        }
        py::list snaps;
        for (const Snapshot& s : r.snapshots) {
          snaps.append(py::make_tuple(s.step, s.time, to_array(s.field)));
        }
        py::dict d;
        d["trace"] = trace_columns(r.trace);
        d["snapshots"] = snaps;
        d["final"] = to_array(r.final_field());
        return d;
      },
      py::arg("config"));

  m.def(
      "convergence",
      [](const ExperimentConfig& c, const std::vector<double>& dts, double dt_ref) {
        ConvergenceReport r;
        {
          py::gil_scoped_release release;
          r = convergence_study(c, dts, dt_ref);
        }
        py::dict d;
        d["dt"] = r.dt_list;
        d["errors"] = r.errors;
        d["rates"] = r.rates;
        return d;
      },
      py::arg("config"), py::arg("dts"), py::arg("dt_ref"));

  m.def("observed_rate", &observed_rate, py::arg("e_coarse"), py::arg("e_fine"));
}

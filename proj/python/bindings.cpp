#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "limitflow/fermion_rg.hpp"
#include "limitflow/inductive.hpp"
#include "limitflow/runner.hpp"
#include "limitflow/thompson.hpp"

namespace py = pybind11;
using namespace limitflow;

namespace {

runner::RunConfig parse_config(const std::string& text) { return runner::RunConfig::from_json(json::parse(text)); }

}  // namespace

PYBIND11_MODULE(_limitflow, m) {
  m.doc() = "limitflow core bindings";

  auto base = py::register_exception<Error>(m, "LimitflowError", PyExc_RuntimeError);
  py::register_exception<CapExceeded>(m, "CapExceeded", base.ptr());
  py::register_exception<Refused>(m, "Refused", base.ptr());
  py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
  py::register_exception<runner::ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("list_experiments", &runner::list_experiments, "Experiment ids, sorted.");
  m.def("describe", [](const std::string& id) { return runner::describe(id).dump(); },
        "Parameter schema of an experiment as a JSON string.");
  m.def("resolved_params",
        [](const std::string& config) { return runner::resolved_params(parse_config(config)).dump(); },
        "Params of a JSON config merged over the defaults, as a JSON string.");
  m.def("run_experiment",
        [](const std::string& config) {
          runner::RunConfig c = parse_config(config);
          Report r;
          {
            py::gil_scoped_release release;
            r = runner::run_experiment(c);
          }
          return r.to_json().dump();
        },
        py::arg("config"), "Runs a JSON config in memory and returns the report as a JSON string.");
  m.def("run",
        [](const std::string& config, const std::string& out_dir) {
          runner::RunConfig c = parse_config(config);
          runner::RunResult res;
          {
            py::gil_scoped_release release;
            res = runner::run(c, out_dir);
          }
          return py::make_tuple(res.exit_code, res.message);
        },
        py::arg("config"), py::arg("out_dir"),
        "Runs a JSON config, writes outputs to out_dir and returns (exit_code, message).");

  m.def("tail_verdict", [](const std::vector<double>& dhat, double tol) { return to_string(tail_verdict(dhat, tol)); },
        py::arg("dhat"), py::arg("tol"));

  auto th = m.def_submodule("thompson", "Piecewise-linear dyadic maps acting on Haar cell vectors");
  py::class_<thompson::PLMap>(th, "PLMap")
      .def(py::init([](std::vector<std::pair<double, double>> pts) {
             thompson::PLMap f{std::move(pts)};
             f.validate();
             return f;
           }),
           py::arg("points"))
      .def_static("identity", &thompson::PLMap::identity)
      .def_static("generator_a", &thompson::PLMap::generator_a)
      .def_static("generator_b", &thompson::PLMap::generator_b)
      .def_readonly("points", &thompson::PLMap::points)
      .def("__call__", &thompson::PLMap::operator())
      .def("inverse", &thompson::PLMap::inverse)
      .def("after", &thompson::PLMap::after)
      .def("exponents", &thompson::PLMap::exponents)
      .def("resolving_scale", &thompson::PLMap::resolving_scale)
      .def("__eq__", &thompson::PLMap::operator==);
  th.def(
      "act",
      [](const thompson::PLMap& f, int scale, const Vec& coeffs) {
        const thompson::CellVector out = thompson::act(f, {scale, coeffs});
        return py::make_tuple(out.scale, Vec(out.coeffs));
      },
      py::arg("map"), py::arg("scale"), py::arg("coeffs"),
      "Acts on a cell vector; returns (output_scale, coefficients).");
  th.def(
      "act_lifted",
      [](const thompson::PLMap& f, int scale, const Vec& coeffs) {
        const thompson::CellVector out = thompson::act_lifted(f, {scale, coeffs});
        return py::make_tuple(out.scale, Vec(out.coeffs));
      },
      py::arg("map"), py::arg("scale"), py::arg("coeffs"));

  auto fe = m.def_submodule("fermion", "Dyadic lattice fermion kernels");
  fe.def(
      "kernel",
      [](int n, double m0, double k) {
        fermion::Lattice lat;
        lat.n = n;
        return fermion::kernel(lat, {m0, 1.0}, k);
      },
      py::arg("scale"), py::arg("m0"), py::arg("k"));
  fe.def(
      "rescaled_dispersion",
      [](int n, double m0, double k) {
        fermion::Lattice lat;
        lat.n = n;
        return fermion::rescaled_dispersion(lat, {m0, 1.0}, k);
      },
      py::arg("scale"), py::arg("m0"), py::arg("k"));
  fe.def("limit_dispersion", [](double m0, double k) { return fermion::limit_dispersion({m0, 1.0}, k); },
         py::arg("m0"), py::arg("k"));
  fe.def("filter_taps", [](const std::string& name) { return fermion::FilterSpec::named(name).taps; },
         py::arg("name"));
}

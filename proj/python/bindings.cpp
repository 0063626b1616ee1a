#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "rdafront/harness.hpp"
#include "rdafront/inner.hpp"

namespace py = pybind11;
using namespace rdafront;

namespace {

Branch branch_of(const std::string& s) {
  if (s == "minus" || s == "-") return Branch::Minus;
  if (s == "plus" || s == "+") return Branch::Plus;
  throw Error(ErrorKind::InvalidArgument, "harness.python", "branch must be 'minus' or 'plus'");
}

py::array_t<double> to_numpy(const ScalarField3D& f) {
  const Grid3D& g = f.grid();
  py::array_t<double> out({g.nz(), g.ny(), g.nx()});
  auto* p = out.mutable_data();
  const auto v = f.values();
  std::copy(v.begin(), v.end(), p);
  return out;
}

py::dict problem_dict(const ProblemSpec& p) {
  py::dict d;
  d["name"] = p.name;
  d["A"] = to_string(p.A);
  d["B"] = to_string(p.B);
  d["F"] = to_string(p.F);
  d["u0"] = to_string(p.u0);
  d["ua"] = to_string(p.ua);
  d["h_init"] = to_string(p.h_init);
  d["x0"] = p.x0;
  d["y0"] = p.y0;
  d["L"] = p.L;
  d["M"] = p.M;
  d["a"] = p.a;
  d["T"] = p.T;
  d["mu"] = p.mu;
  return d;
}

py::dict report_dict(const ComparisonReport& r) {
  py::dict d;
  d["problem"] = r.problem;
  d["mu"] = r.mu;
  py::list times;
  for (const TimeReport& t : r.times) {
    py::dict e;
    e["t"] = t.t;
    e["err_u0"] = t.err_u0;
    e["err_u1"] = t.err_u1 ? py::cast(*t.err_u1) : py::none();
    e["h_min"] = t.h_min;
    e["h_max"] = t.h_max;
    e["h_mean"] = t.h_mean;
    e["level_fraction"] = t.level.fraction;
    e["level_max_deviation"] = t.level.max_deviation;
    e["fastpath_gap"] = t.fastpath_gap;
    times.append(e);
  }
  d["times"] = times;
  py::dict checks;
  for (const InvariantCheck& c : r.checks) checks[py::str(c.name)] = c.pass;
  d["checks"] = checks;
  return d;
}

}  // namespace

PYBIND11_MODULE(_rdafront, m) {
  m.doc() = "Moving interior layers in reaction-diffusion-advection problems";

  static py::handle exc_type = py::exception<Error>(m, "RdafrontError").release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyObject* type = exc_type.ptr();
      py::object inst = py::reinterpret_steal<py::object>(PyObject_CallFunction(type, "s", e.what()));
      inst.attr("kind") = to_string(e.kind());
      inst.attr("stage") = e.stage();
      inst.attr("exit_code") = exit_code_for(e);
      PyErr_SetObject(type, inst.ptr());
    }
  });

  m.def("normalize", [](const std::string& text) { return to_string(parse(text)); },
        "Parse an expression and print it back in canonical form.", py::arg("text"));
  m.def(
      "evaluate",
      [](const std::string& text, const std::map<std::string, double>& vars) { return eval(parse(text), vars); },
      "Evaluate an expression with named variables (x, y, z, u, t).", py::arg("text"), py::arg("vars"));
  m.def(
      "differentiate",
      [](const std::string& text, const std::string& var) {
        const auto v = var_from_name(var);
        if (!v) throw Error(ErrorKind::UnknownIdentifier, "expr.differentiate", "unknown variable '" + var + "'");
        return to_string(differentiate(parse(text), *v));
      },
      py::arg("text"), py::arg("var"));

  m.def("registry_names", &registry_names);
  m.def("problem", [](const std::string& name) { return problem_dict(registry_problem(name)); }, py::arg("name"));

  py::class_<LayerParams>(m, "LayerParams")
      .def(py::init([](double V, double phi_minus, double phi_plus, double alpha_z) {
             return LayerParams::make(V, phi_minus, phi_plus, alpha_z);
           }),
           py::arg("V"), py::arg("phi_minus"), py::arg("phi_plus"), py::arg("alpha_z") = 1.0)
      .def_readonly("V", &LayerParams::V)
      .def_readonly("phi_minus", &LayerParams::phiM)
      .def_readonly("phi_plus", &LayerParams::phiP)
      .def_readonly("phi_star", &LayerParams::phiStar)
      .def_readonly("P_minus", &LayerParams::PM)
      .def_readonly("P_plus", &LayerParams::PP)
      .def_readonly("alpha_z", &LayerParams::alpha_z);

  m.def("phase_trajectory", [](double u, const std::string& b, const LayerParams& p) {
    return phase_trajectory(u, branch_of(b), p);
  }, py::arg("u"), py::arg("branch"), py::arg("params"));
  m.def("layer_exists", [](const std::string& b, const LayerParams& p) { return layer_exists(branch_of(b), p); },
        py::arg("branch"), py::arg("params"));
  m.def("q0_profile", [](double xi, const std::string& b, const LayerParams& p) {
    return q0_profile(xi, branch_of(b), p);
  }, py::arg("xi"), py::arg("branch"), py::arg("params"));
  m.def("eval_H0", &eval_H0, py::arg("V"), py::arg("phi_minus"), py::arg("phi_plus"), py::arg("alpha_z"));

  m.def("u_init_value", [](const std::string& name, double x, double y, double z) {
    return u_init_value(registry_problem(name), x, y, z);
  }, py::arg("problem"), py::arg("x"), py::arg("y"), py::arg("z"));

  py::class_<RunConfig>(m, "RunConfig")
      .def_static("default", &default_config, py::arg("problem") = "paper-example")
      .def_static("from_text", &parse_config, py::arg("text"), py::arg("source") = "<string>")
      .def_static("load", [](const std::string& path) { return load_config(path); }, py::arg("path"))
      .def_property("mu", [](const RunConfig& c) { return c.problem.mu; }, [](RunConfig& c, double mu) { set_mu(c, mu); })
      .def_property_readonly("problem", [](const RunConfig& c) { return problem_dict(c.problem); })
      .def_readwrite("output_times", &RunConfig::output_times)
      .def_property(
          "out_dir", [](const RunConfig& c) { return c.out_dir.string(); },
          [](RunConfig& c, const std::string& d) { c.out_dir = d; })
      .def("validate", &RunConfig::validate);

  m.def(
      "solve_reference",
      [](const RunConfig& cfg, const std::vector<double>& times) {
        const ProblemSpec& p = cfg.problem;
        const Grid3D g(cfg.grid.nx, cfg.grid.ny, cfg.grid.nz, p.x0, p.L, p.y0, p.M, p.a);
        ReferenceOptions o;
        o.safety = cfg.safety;
        o.scheme = cfg.scheme;
        std::vector<ScalarField3D> out;
        {
          py::gil_scoped_release release;
          out = solve_reference(p, g, times, o);
        }
        py::list l;
        for (const auto& f : out) l.append(to_numpy(f));
        return l;
      },
      "Reference solution snapshots as arrays indexed [k, j, i].", py::arg("config"), py::arg("times"));

  m.def(
      "compare",
      [](const RunConfig& cfg, bool write_outputs) {
        ComparisonReport r;
        {
          py::gil_scoped_release release;
          r = run_compare(cfg, write_outputs);
          if (write_outputs) write_report(r, cfg.out_dir);
        }
        return report_dict(r);
      },
      py::arg("config"), py::arg("write_outputs") = false);

  m.def(
      "sweep_mu",
      [](const RunConfig& cfg, const std::vector<double>& mus) {
        SweepReport r;
        {
          py::gil_scoped_release release;
          r = run_mu_sweep(cfg, mus);
        }
        py::dict d;
        py::list rows;
        for (const SweepRow& row : r.rows) rows.append(py::make_tuple(row.mu, row.nz, row.error));
        d["rows"] = rows;
        d["strictly_decreasing"] = r.strictly_decreasing;
        d["slope"] = r.slope ? py::cast(*r.slope) : py::none();
        return d;
      },
      py::arg("config"), py::arg("mu_list"));
}

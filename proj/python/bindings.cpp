#include "nsir/errors.hpp"
#include "nsir/harness.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace nsir;

namespace {

Settings to_settings(const std::map<std::string, std::string>& kv, const std::string& preset)
{
    Settings s;
    if (!preset.empty()) s.emplace_back("run.preset", preset);
    for (const auto& [k, v] : kv) s.emplace_back(k, v);
    return s;
}

py::dict state_dict(const State3& s)
{
    py::dict d;
    d["S"] = s.S;
    d["I"] = s.I;
    d["R"] = s.R;
    return d;
}

} // namespace

PYBIND11_MODULE(_nsir, m)
{
    m.doc() = "nonlocal SIR solvers";

    py::register_exception<Error>(m, "NsirError");

    py::enum_<KernelFamily>(m, "KernelFamily")
        .value("Uniform", KernelFamily::Uniform)
        .value("TruncatedGaussian", KernelFamily::TruncatedGaussian)
        .value("TopHat", KernelFamily::TopHat);
    py::enum_<Normalization>(m, "Normalization")
        .value("ColumnStochastic", Normalization::ColumnStochastic)
        .value("SinkhornSymmetric", Normalization::SinkhornSymmetric)
        .value("None_", Normalization::None);

    py::class_<KernelSpec>(m, "KernelSpec")
        .def(py::init([](KernelFamily f, double w, Normalization n) { return KernelSpec{f, w, n}; }),
             py::arg("family") = KernelFamily::TruncatedGaussian, py::arg("width") = 0.2,
             py::arg("normalization") = Normalization::None)
        .def_readwrite("family", &KernelSpec::family)
        .def_readwrite("width", &KernelSpec::width)
        .def_readwrite("normalization", &KernelSpec::normalization);

    py::class_<ModelParams>(m, "ModelParams")
        .def(py::init<>())
        .def_readwrite("a", &ModelParams::a)
        .def_readwrite("beta", &ModelParams::beta)
        .def_readwrite("b", &ModelParams::b)
        .def_readwrite("k", &ModelParams::k)
        .def_readwrite("gamma", &ModelParams::gamma)
        .def_readwrite("d", &ModelParams::d)
        .def_readwrite("mu", &ModelParams::mu)
        .def_readwrite("h0", &ModelParams::h0)
        .def("n_star", &ModelParams::n_star)
        .def("validate", &ModelParams::validate);

    m.def("r01", [](const ModelParams& p) { p.validate(); return r01(p); });
    m.def("equilibria", [](const ModelParams& p) {
        p.validate();
        const Equilibria e = equilibria(p);
        py::dict d;
        d["E0"] = state_dict(e.E0);
        d["E1"] = state_dict(e.E1);
        d["E2"] = e.E2 ? py::object(state_dict(*e.E2)) : py::object(py::none());
        d["N_star"] = e.N_star;
        d["R01"] = e.R01;
        return d;
    });

    m.def("kernel_matrix",
          [](const KernelSpec& spec, double left, double right, int n) {
              const KernelMatrix K = build_kernel(spec, Grid1D(left, right, n));
              return py::make_tuple(Matrix(K.samples), K.weights);
          },
          py::arg("spec"), py::arg("left") = -1.0, py::arg("right") = 1.0, py::arg("n") = 201);

    m.def("lambda1_interval", &lambda1_interval, py::arg("c1"), py::arg("c2"), py::arg("d"),
          py::arg("left"), py::arg("right"), py::arg("spec"), py::arg("n") = 0);
    m.def("r02", py::overload_cast<double, double, double, double, double, const KernelSpec&, int>(&r02),
          py::arg("c1"), py::arg("c2"), py::arg("d"), py::arg("left"), py::arg("right"), py::arg("spec"),
          py::arg("n") = 0);
    m.def("lambda1_local", py::overload_cast<double, double, double>(&lambda1_local), py::arg("q"),
          py::arg("d"), py::arg("length"));
    m.def("critical_length",
          [](double c1, double c2, double d, const KernelSpec& spec, double tol) {
              return critical_length(c1, c2, d, spec, tol).l_star;
          },
          py::arg("c1"), py::arg("c2"), py::arg("d"), py::arg("spec"), py::arg("tol") = 1e-6);

    m.def("preset_names", &preset_names);
    m.def("config_keys", &config_keys);

    // summary JSON as text; the package layer decodes it
    m.def("run_summary",
          [](const std::string& preset, const std::map<std::string, std::string>& settings) {
              const RunConfig cfg = build_run_config(to_settings(settings, preset));
              RunOutcome out;
              {
                  py::gil_scoped_release nogil;
                  out = execute(cfg);
              }
              Json s = out.summary;
              s.erase("_comparison");
              Json checks = Json::object();
              for (const auto& c : out.checks) checks[c.name] = c.passed;
              s["checks"] = checks;
              return s.dump();
          },
          py::arg("preset") = "", py::arg("settings") = std::map<std::string, std::string>{});

    m.def("run_to",
          [](const std::string& preset, const std::map<std::string, std::string>& settings,
             const std::string& dir) {
              const RunConfig cfg = build_run_config(to_settings(settings, preset));
              py::gil_scoped_release nogil;
              const RunOutcome out = execute(cfg);
              write_artifacts(out, dir);
              return out.checks_passed();
          },
          py::arg("preset"), py::arg("settings"), py::arg("dir"));
}

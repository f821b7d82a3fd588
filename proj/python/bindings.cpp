#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pdce/analytic.hpp"
#include "pdce/scenario.hpp"

namespace py = pybind11;
using namespace pdce;

namespace {

// JSON crosses the boundary as text; the Python side wraps it with json.loads/dumps.
Scenario scenario_arg(const std::string& name_or_json) {
    if (auto b = find_builtin(name_or_json)) return *b;
    return scenario_from_json(nlohmann::json::parse(name_or_json));
}

RunOptions options(std::optional<int> dim, bool fixed_step, bool check_convergence) {
    RunOptions o;
    o.dim = dim;
    o.fixed_step = fixed_step;
    o.check_convergence = check_convergence;
    return o;
}

py::dict tables_dict(const std::map<std::string, Table>& tables) {
    py::dict out;
    for (const auto& [stem, t] : tables) {
        py::dict cols;
        for (std::size_t c = 0; c < t.names.size(); ++c)
            cols[py::str(t.names[c])] = py::array_t<double>(t.cols[c].size(), t.cols[c].data());
        out[py::str(stem)] = cols;
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_pdce, m) {
    m.doc() = "Parametric photon generation in a modulated Kerr cavity";

    py::register_exception<Error>(m, "PdceError");
    py::register_exception<DomainError>(m, "DomainError", m.attr("PdceError"));
    py::register_exception<IntegrationFailure>(m, "IntegrationFailure", m.attr("PdceError"));
    py::register_exception<TruncationOverflow>(m, "TruncationOverflow", m.attr("PdceError"));
    py::register_exception<ConvergenceFailure>(m, "ConvergenceFailure", m.attr("PdceError"));
    py::register_exception<InvalidDimension>(m, "InvalidDimension", m.attr("PdceError"));

    py::class_<ModelParams>(m, "ModelParams")
        .def(py::init<>())
        .def_readwrite("omega_m", &ModelParams::omega_m)
        .def_readwrite("delta_bar", &ModelParams::delta_bar)
        .def_readwrite("c_k", &ModelParams::c_k)
        .def_readwrite("c_e", &ModelParams::c_e)
        .def_readwrite("c_eps_tilde", &ModelParams::c_eps_tilde)
        .def_readwrite("kappa", &ModelParams::kappa)
        .def_readwrite("dim", &ModelParams::dim)
        .def("validate", &ModelParams::validate)
        .def("kappa_scaled", &ModelParams::kappa_scaled);

    m.def("derived_constants", [](const ModelParams& p) {
        const auto d = derived_constants(p);
        py::dict out;
        out["g_k"] = d.g_k;
        out["chi_prime"] = d.chi_prime;
        out["g_cal"] = d.g_cal;
        out["branch"] = to_string(d.branch);
        out["tau"] = d.tau ? py::object(py::float_(*d.tau)) : py::object(py::none());
        return out;
    });

    m.def("n_casimir", &n_casimir, py::arg("params"), py::arg("t"));
    m.def("mandel_q_analytic", &mandel_q_analytic, py::arg("params"), py::arg("t"));
    m.def("quad_variances_analytic", &quad_variances_analytic, py::arg("params"), py::arg("t"));
    m.def("validity_limit", &validity_limit, py::arg("params"), py::arg("n"));
    m.def(
        "analytic_state",
        [](const ModelParams& p, double t, int dim) { return analytic_state(p, t, dim).amplitudes(); },
        py::arg("params"), py::arg("t"), py::arg("dim"));

    m.def(
        "wigner",
        [](const Eigen::VectorXcd& ket, double extent, int n_points) {
            const auto g = wigner(QuantumState::ket(ket), extent, extent, n_points);
            py::dict out;
            out["x"] = g.x_axis;
            out["p"] = g.p_axis;
            out["values"] = g.values;
            out["negativity"] = wigner_negativity(g);
            out["negative_regions"] = negative_regions(g);
            out["integral"] = g.integral();
            out["warnings"] = g.warnings;
            return out;
        },
        py::arg("ket"), py::arg("extent") = 6.0, py::arg("n_points") = 201);

    m.def("builtin_scenarios", [] {
        std::vector<std::string> names;
        for (const auto& s : builtin_scenarios()) names.push_back(s.name);
        return names;
    });
    m.def(
        "scenario_json",
        [](const std::string& name_or_json) { return scenario_to_json(scenario_arg(name_or_json)).dump(); },
        py::arg("scenario"));

    m.def(
        "compute_scenario",
        [](const std::string& name_or_json, std::optional<int> dim, bool fixed_step,
           bool check_convergence) {
            ScenarioResult r;
            {
                py::gil_scoped_release release;
                r = compute_scenario(scenario_arg(name_or_json),
                                     options(dim, fixed_step, check_convergence));
            }
            return py::make_tuple(tables_dict(r.tables), r.manifest.dump());
        },
        py::arg("scenario"), py::arg("dim") = py::none(), py::arg("fixed_step") = false,
        py::arg("check_convergence") = true);

    m.def(
        "run_scenario",
        [](const std::string& name_or_json, const std::string& out_dir, std::optional<int> dim,
           bool fixed_step, bool check_convergence) {
            py::gil_scoped_release release;
            return run_scenario(scenario_arg(name_or_json), out_dir,
                                options(dim, fixed_step, check_convergence))
                .dump();
        },
        py::arg("scenario"), py::arg("out_dir"), py::arg("dim") = py::none(),
        py::arg("fixed_step") = false, py::arg("check_convergence") = true);

    m.def(
        "run_sweep",
        [](const std::string& name_or_json, const std::string& out_dir, int jobs) {
            nlohmann::json cfg;
            if (auto b = find_builtin_sweep(name_or_json))
                cfg = *b;
            else
                cfg = nlohmann::json::parse(name_or_json);
            py::gil_scoped_release release;
            return run_sweep(cfg, out_dir, jobs).dump();
        },
        py::arg("config"), py::arg("out_dir"), py::arg("jobs") = 1);

    m.attr("SCHEMA_VERSION") = kSchemaVersion;
    m.attr("DISSIPATOR_NOTE") = kDissipatorNote;
}

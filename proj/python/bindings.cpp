#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bergman/harness.hpp"

namespace py = pybind11;
using namespace bergman;

namespace {

CVector to_vector(const std::vector<cplx>& v) {
    if (v.empty() || static_cast<int>(v.size()) > kMaxDim) throw py::value_error("point dimension out of range");
    CVector z(static_cast<int>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) z[static_cast<int>(i)] = v[i];
    return z;
}

std::vector<cplx> to_list(const CVector& z) { return {z.span().begin(), z.span().end()}; }

ExperimentConfig config_from(const std::string& json) {
    ExperimentConfig cfg;
    if (!json.empty()) cfg.apply_json(json);
    return cfg;
}

py::dict report_dict(const Report& rep) {
    py::dict d;
    d["csv"] = rep.csv();
    d["json"] = rep.json();
    d["all_pass"] = rep.all_pass();
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Bergman-space geometry, quadrature and operator checks on the complex unit ball";

    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const std::invalid_argument& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        }
    });

    m.def("moebius", [](const std::vector<cplx>& a, const std::vector<cplx>& w) {
        return to_list(moebius_apply(BallPoint(to_vector(a)), to_vector(w)));
    }, py::arg("a"), py::arg("w"), "phi_a(w)");
    m.def("bergman_metric", [](const std::vector<cplx>& z, const std::vector<cplx>& w) {
        return bergman_metric(to_vector(z), to_vector(w));
    });
    m.def("pseudo_metric_rho", [](const std::vector<cplx>& z, const std::vector<cplx>& w) {
        return pseudo_metric_rho(to_vector(z), to_vector(w));
    });
    m.def("noniso_metric_d", [](const std::vector<cplx>& z, const std::vector<cplx>& w) {
        return noniso_metric_d(to_vector(z), to_vector(w));
    });
    m.def("normalizing_constant", &normalizing_constant, py::arg("n"), py::arg("alpha"));
    m.def("invariant_ball_volume", &invariant_ball_volume, py::arg("n"), py::arg("gamma"));
    m.def("bergman_kernel", [](double alpha, const std::vector<cplx>& z, const std::vector<cplx>& w) {
        return bergman_kernel(alpha, to_vector(z), to_vector(w));
    }, py::arg("alpha"), py::arg("z"), py::arg("w"));

    py::class_<HoloFun>(m, "HoloFun")
        .def_static("from_json", [](const std::string& text) { return holofun_from_json(text); })
        .def("to_json", [](const HoloFun& f) { return to_json(f); })
        .def_property_readonly("dim", &HoloFun::dim)
        .def("__call__", [](const HoloFun& f, const std::vector<cplx>& z) { return f(to_vector(z)); });

    m.def("project", [](const HoloFun& f, double alpha, const std::vector<cplx>& at, std::size_t samples,
                        std::uint64_t seed) {
        return report_dict(run_project(f, alpha, to_vector(at), samples, seed));
    }, py::arg("f"), py::arg("alpha"), py::arg("at"), py::arg("samples") = 200000, py::arg("seed") = 0);

    m.def("verify", [](const std::string& target, const std::string& config) {
        const ExperimentConfig cfg = config_from(config);
        if (target == "geometry") return report_dict(verify_geometry(cfg));
        if (target == "measures") return report_dict(verify_measures(cfg));
        if (target == "kernels") return report_dict(verify_kernels(cfg));
        throw py::value_error("target must be geometry, measures or kernels");
    }, py::arg("target"), py::arg("config") = "");
    m.def("equiv", [](const std::string& functional, const std::string& config) {
        return report_dict(run_equivalence(config_from(config), parse_functional(functional)));
    }, py::arg("functional"), py::arg("config") = "");
    m.def("weak_type", [](const std::string& config) { return report_dict(run_weak_type(config_from(config))); },
          py::arg("config") = "");
    m.def("atoms", [](const std::string& batch, const std::string& config) {
        return report_dict(run_atoms(config_from(config), atom_batch_from_json(batch)));
    }, py::arg("batch"), py::arg("config") = "");
    m.def("space_index", [](const std::string& space, double s, double k, double beta, double p) {
        return space_index_map({parse_space(space), s, k, beta, p});
    }, py::arg("space"), py::arg("s") = 0.0, py::arg("k") = 0.0, py::arg("beta") = 0.0, py::arg("p") = 2.0);
}

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <limits>

#include "ncdoa/bench.hpp"
#include "ncdoa/config.hpp"
#include "ncdoa/errors.hpp"
#include "ncdoa/estimator.hpp"
#include "ncdoa/geometry.hpp"
#include "ncdoa/signal.hpp"
#include "ncdoa/solver.hpp"

namespace py = pybind11;
using namespace ncdoa;

namespace {

PhaseModel phase_model(const std::string& s) {
    if (s == "per_snapshot") return PhaseModel::PerSnapshot;
    if (s == "calibrated") return PhaseModel::CalibratedConstant;
    throw std::invalid_argument("phase_model must be 'per_snapshot' or 'calibrated'");
}

PeakSelection peaks(const std::string& s) {
    if (s == "top_d") return PeakSelection::TopD;
    if (s == "local_maxima") return PeakSelection::LocalMaxima;
    throw std::invalid_argument("peaks must be 'top_d' or 'local_maxima'");
}

py::dict weights_dict(const WeightFunction& w) {
    std::vector<int> lags;
    std::vector<long> counts;
    for (int n = -w.max_lag(); n <= w.max_lag(); ++n) {
        lags.push_back(n);
        counts.push_back(w.at(n));
    }
    py::dict d;
    d["lags"] = lags;
    d["counts"] = counts;
    d["dof"] = w.support_size();
    d["hole_free"] = w.hole_free();
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Sparse recovery DOA estimation with noncoherent subarrays";

    py::register_exception<EstimationFailed>(m, "EstimationFailed", PyExc_RuntimeError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    py::class_<ArrayGeometry>(m, "ArrayGeometry")
        .def(py::init<std::vector<int>>(), py::arg("positions"))
        .def_property_readonly("positions", &ArrayGeometry::positions)
        .def_property_readonly("aperture", &ArrayGeometry::aperture)
        .def("__len__", &ArrayGeometry::size)
        .def("translated", &ArrayGeometry::translated)
        .def("__eq__", [](const ArrayGeometry& a, const ArrayGeometry& b) { return a == b; })
        .def("__repr__", [](const ArrayGeometry& a) { return "ArrayGeometry(" + a.to_string() + ")"; });

    py::class_<SubarrayPartition>(m, "SubarrayPartition")
        .def(py::init([](std::vector<std::vector<int>> subs, const std::string& kind) {
                 std::vector<ArrayGeometry> g;
                 for (auto& s : subs) g.emplace_back(std::move(s));
                 if (kind != "type1" && kind != "type2") throw std::invalid_argument("kind must be type1 or type2");
                 return SubarrayPartition(std::move(g), kind == "type1" ? PartitionKind::TypeI : PartitionKind::TypeII);
             }),
             py::arg("subarrays"), py::arg("kind") = "type1")
        .def_property_readonly("subarrays", &SubarrayPartition::subarrays)
        .def_property_readonly("kind", [](const SubarrayPartition& p) { return std::string(to_string(p.kind())); })
        .def_property_readonly("positions", [](const SubarrayPartition& p) { return p.union_geometry().positions(); })
        .def_property_readonly("total_sensors", &SubarrayPartition::total_sensors)
        .def("__len__", &SubarrayPartition::count);

    m.def("make_ula", &make_ula, py::arg("n"));
    m.def("make_mra", &make_mra, py::arg("n"));
    m.def("make_nested", &make_nested, py::arg("n1"), py::arg("n2"));
    m.def("type1_split", [](const ArrayGeometry& a, std::vector<int> sizes) { return type1_split(a, sizes); },
          py::arg("array"), py::arg("sizes"));
    m.def("type2_build", &type2_build, py::arg("reference"), py::arg("l"), py::arg("mu"));
    m.def("weight_function", [](const ArrayGeometry& a) { return weights_dict(weight_function(a)); });
    m.def("dof", &dof);
    m.def("dof_bound_type2", [](int sdof, int l, int mu) {
        const auto b = dof_bound_type2(sdof, l, mu);
        return py::make_tuple(b.kind == BoundKind::Exact ? "exact" : "upper_bound", b.value);
    });
    m.def("verify_theorem1", [](const ArrayGeometry& ref, int l, int mu) {
        const auto r = verify_theorem1(ref, l, mu);
        py::dict d;
        d["subarray_dof"] = r.subarray_dof;
        d["bruteforce_dof"] = r.bruteforce_dof;
        d["bound"] = r.bound.value;
        d["exact"] = r.bound.kind == BoundKind::Exact;
        d["shift_identity_holds"] = r.shift_identity_holds;
        d["satisfied"] = r.satisfied;
        return d;
    });
    m.def("reference_geometry", [](const std::string& name) { return reference_geometry(name).partition; });
    m.def("reference_geometry_names", [] {
        std::vector<std::string> n;
        for (const auto& g : reference_geometries()) n.push_back(g.name);
        return n;
    });

    m.def("uniform_grid", [](double step) { return Grid::uniform(step).points(); }, py::arg("step"));
    m.def("manifold",
          [](std::vector<int> positions, std::vector<double> dirs) { return manifold(positions, dirs); },
          py::arg("positions"), py::arg("directions"));

    m.def("prox_row_l12", &prox_row_l12, py::arg("m"), py::arg("tau"));
    m.def("prox_nuclear", &prox_nuclear, py::arg("m"), py::arg("tau"));

    m.def(
        "solve_smv",
        [](std::vector<CMatrix> manifolds, CVector observation, double noise_var, double c, int mm, double epsilon,
           int max_iter, double tol) {
            RecoveryProblem p{std::move(manifolds), std::move(observation), noise_var, c, mm, epsilon};
            SolverConfig cfg;
            cfg.max_iter = max_iter;
            cfg.tol_primal = cfg.tol_dual = tol;
            const auto s = solve_smv(p, cfg);
            py::dict d;
            d["g"] = s.g_matrix;
            d["objective"] = s.objective;
            d["feasibility_gap"] = s.feasibility_gap;
            d["iterations"] = s.iterations;
            d["status"] = std::string(to_string(s.status));
            return d;
        },
        py::arg("manifolds"), py::arg("observation"), py::arg("noise_var"), py::arg("c") = 2.0, py::arg("m") = 0,
        py::arg("epsilon") = 1.0, py::arg("max_iter") = 5000, py::arg("tol") = 1e-6);

    m.def(
        "synthesize",
        [](const SubarrayPartition& part, std::vector<double> dirs, std::vector<double> grid, double snr_db,
           int snapshots, std::uint64_t seed, const std::string& model) {
            Scenario sc{part, std::move(dirs), Grid(std::move(grid)), snr_db, snapshots, phase_model(model), seed};
            sc.validate();
            const auto d = synthesize(sc);
            py::dict out;
            out["observations"] = d.observations;
            out["phases"] = d.phases;
            out["sources"] = d.sources;
            out["noise"] = d.noise;
            out["noise_var"] = d.noise_var;
            return out;
        },
        py::arg("partition"), py::arg("true_dirs"), py::arg("grid"), py::arg("snr_db") = 10.0,
        py::arg("snapshots") = 1, py::arg("seed") = 0, py::arg("phase_model") = "per_snapshot");

    m.def(
        "estimate",
        [](const CMatrix& obs, double noise_var, std::vector<double> grid, const SubarrayPartition& part,
           std::size_t d, double c, int mm, double epsilon, const std::string& peak_mode, bool weight_sv,
           unsigned workers) {
            EstimatorOptions o;
            o.c_const = c;
            o.m_const = mm;
            o.epsilon = epsilon;
            o.peaks = peaks(peak_mode);
            o.weight_by_singular_value = weight_sv;
            o.workers = workers;
            EstimateResult r;
            {
                py::gil_scoped_release release;
                r = estimate(obs, noise_var, Grid(std::move(grid)), part, d, o);
            }
            py::dict out;
            out["estimated_dirs"] = r.estimate.estimated_dirs;
            out["support"] = r.estimate.support;
            out["pseudo_spectrum"] = r.estimate.pseudo_spectrum;
            out["iterations"] = r.diagnostics.iterations;
            out["max_iter_count"] = r.diagnostics.max_iter_count;
            out["infeasible_count"] = r.diagnostics.infeasible_count;
            return out;
        },
        py::arg("observations"), py::arg("noise_var"), py::arg("grid"), py::arg("partition"), py::arg("d_sources"),
        py::arg("c") = 2.0, py::arg("m") = 0, py::arg("epsilon") = 1.0, py::arg("peaks") = "top_d",
        py::arg("weight_by_singular_value") = false, py::arg("workers") = 1);

    m.def("rmse", [](std::vector<double> truth, std::vector<std::vector<double>> est) { return rmse(truth, est); },
          py::arg("truth"), py::arg("estimates"));
    m.def("beampattern",
          [](const ArrayGeometry& a, std::vector<double> grid) { return beampattern(a, Grid(std::move(grid))); },
          py::arg("array"), py::arg("grid"));

    m.def(
        "run_campaign_json",
        [](const std::string& text) {
            const auto configs = campaigns_from_json(nlohmann::json::parse(text));
            py::dict out;
            for (const auto& c : configs) {
                std::string csv;
                {
                    py::gil_scoped_release release;
                    csv = run_campaign(c.campaign).to_csv();
                }
                out[py::str(c.name)] = csv;
            }
            return out;
        },
        py::arg("campaign_json"), "Runs the campaign document and returns {name: csv}.");
}

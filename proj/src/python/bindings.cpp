// Python module srtrkit._core.
#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "srtrkit/factorkit.hpp"
#include "srtrkit/fixtures.hpp"
#include "srtrkit/json_io.hpp"
#include "srtrkit/loopctl.hpp"
#include "srtrkit/numcore.hpp"
#include "srtrkit/srtrcore.hpp"
#include "srtrkit/structsyn.hpp"

namespace py = pybind11;
using namespace srtrkit;

namespace {

// Structured reports go out as plain dicts, built from the JSON form.
py::object as_python(const io::Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

io::Json from_python(const py::object& obj) {
    return io::Json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

structsyn::SynthesisSpec make_spec(const Eigen::MatrixXi& mask_w, const Eigen::MatrixXi& mask_v,
                                   std::vector<int> orders, const std::string& extra) {
    structsyn::SynthesisSpec spec;
    spec.masks = {mask_w, mask_v};
    spec.orders = std::move(orders);
    spec.extra = structsyn::parse_extra(extra);
    return spec;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "SRTR network representations, coprime factorizations and structured controller synthesis";

    static py::exception<Error> base_error(m, "SrtrError");
    static py::exception<structsyn::InfeasibleError> infeasible(m, "InfeasibleError", base_error.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const structsyn::InfeasibleError& e) {
            py::object err = py::reinterpret_borrow<py::object>(infeasible.ptr())(e.what());
            err.attr("best_K") = py::cast(e.best_K());
            err.attr("best_report") = as_python(io::to_json(e.best_report()));
            PyErr_SetObject(infeasible.ptr(), err.ptr());
        } catch (const Error& e) {
            PyErr_SetString(base_error.ptr(), e.what());
        }
    });

    py::enum_<StabilityDomain>(m, "Domain")
        .value("continuous", StabilityDomain::Continuous)
        .value("discrete", StabilityDomain::Discrete);

    py::class_<sysrep::StateSpaceSystem>(m, "StateSpaceSystem")
        .def(py::init([](Matrix A, Matrix B, Matrix C, std::optional<Matrix> D, StabilityDomain domain) {
                 if (!D) D = Matrix::Zero(C.rows(), B.cols());
                 return sysrep::make_system(std::move(A), std::move(B), std::move(C), std::move(*D), domain);
             }),
             py::arg("A"), py::arg("B"), py::arg("C"), py::arg("D") = py::none(),
             py::arg("domain") = StabilityDomain::Continuous)
        .def_readwrite("A", &sysrep::StateSpaceSystem::A)
        .def_readwrite("B", &sysrep::StateSpaceSystem::B)
        .def_readwrite("C", &sysrep::StateSpaceSystem::C)
        .def_readwrite("D", &sysrep::StateSpaceSystem::D)
        .def_readwrite("domain", &sysrep::StateSpaceSystem::domain)
        .def_property_readonly("states", &sysrep::StateSpaceSystem::states)
        .def("__call__", [](const sysrep::StateSpaceSystem& s, Complex x) { return sysrep::eval_tfm(s, x); })
        .def("__repr__", [](const sysrep::StateSpaceSystem& s) {
            return "<StateSpaceSystem states=" + std::to_string(s.states()) + " outputs=" +
                   std::to_string(s.outputs()) + " inputs=" + std::to_string(s.inputs()) + ">";
        });

    py::class_<sysrep::PartitionedRealization>(m, "PartitionedRealization")
        .def(py::init([](Matrix A11, Matrix A12, Matrix A21, Matrix A22, Matrix B1, Matrix B2, StabilityDomain d) {
                 return sysrep::make_partitioned(A11, A12, A21, A22, B1, B2, d);
             }),
             py::arg("A11"), py::arg("A12"), py::arg("A21"), py::arg("A22"), py::arg("B1"), py::arg("B2"),
             py::arg("domain") = StabilityDomain::Continuous)
        .def_readonly("A11", &sysrep::PartitionedRealization::A11)
        .def_readonly("A12", &sysrep::PartitionedRealization::A12)
        .def_readonly("A21", &sysrep::PartitionedRealization::A21)
        .def_readonly("A22", &sysrep::PartitionedRealization::A22)
        .def_readonly("B1", &sysrep::PartitionedRealization::B1)
        .def_readonly("B2", &sysrep::PartitionedRealization::B2)
        .def_readonly("domain", &sysrep::PartitionedRealization::domain)
        .def_property_readonly("p", &sysrep::PartitionedRealization::p)
        .def_property_readonly("n", &sysrep::PartitionedRealization::n)
        .def("to_system", &sysrep::PartitionedRealization::to_system);

    m.def("to_output_normal", [](const sysrep::StateSpaceSystem& s) { return sysrep::to_output_normal(s).form; },
          "Equivalent realization with output matrix [I 0].");
    m.def("minimal_realization",
          [](const sysrep::StateSpaceSystem& s) { return sysrep::minimal_realization(s); });

    py::class_<srtrcore::SrtrPair>(m, "SrtrPair")
        .def_readonly("Aw", &srtrcore::SrtrPair::Aw)
        .def_readonly("Bw", &srtrcore::SrtrPair::Bw)
        .def_readonly("Cw", &srtrcore::SrtrPair::Cw)
        .def_readonly("Dw", &srtrcore::SrtrPair::Dw)
        .def_readonly("K", &srtrcore::SrtrPair::K)
        .def_readonly("domain", &srtrcore::SrtrPair::domain)
        .def_property_readonly("p", &srtrcore::SrtrPair::p)
        .def_property_readonly("m", &srtrcore::SrtrPair::m)
        .def("W", &srtrcore::SrtrPair::W)
        .def("V", &srtrcore::SrtrPair::V)
        .def("as_system", &srtrcore::SrtrPair::as_system)
        .def("to_dict", [](const srtrcore::SrtrPair& p) { return as_python(io::to_json(p)); })
        .def_static("from_dict", [](const py::object& d) { return io::pair_from_json(from_python(d)); });

    m.def("srtr_from_k", &srtrcore::srtr_from_k, py::arg("base"), py::arg("K"));
    m.def("verify_srtr_identity",
          py::overload_cast<const srtrcore::SrtrPair&, const sysrep::StateSpaceSystem&, int, std::uint64_t>(
              &srtrcore::verify_srtr_identity),
          py::arg("pair"), py::arg("system"), py::arg("samples") = 5, py::arg("seed") = 42);
    m.def("srtr_is_stable", &srtrcore::srtr_is_stable);
    m.def(
        "check_flcf",
        [](const srtrcore::SrtrPair& p, std::uint64_t seed) { return as_python(io::to_json(srtrcore::check_flcf(p, seed))); },
        py::arg("pair"), py::arg("seed") = 42);
    m.def(
        "nrf_from_srtr",
        [](const srtrcore::SrtrPair& p, double tol) { return as_python(io::to_json(srtrcore::nrf_from_srtr(p, tol))); },
        py::arg("pair"), py::arg("cancel_tol") = 1e-8);
    m.def(
        "sparsity_pattern",
        [](const srtrcore::SrtrPair& p, double tol) {
            const auto s = srtrcore::sparsity_pattern(p, tol);
            return py::make_tuple(s.maskW, s.maskV);
        },
        py::arg("pair"), py::arg("tol") = 1e-9);

    py::class_<factorkit::LcfOverS>(m, "Lcf")
        .def_readonly("blocks", &factorkit::LcfOverS::blocks)
        .def_readonly("F1", &factorkit::LcfOverS::F1)
        .def_readonly("F2", &factorkit::LcfOverS::F2)
        .def_readonly("U", &factorkit::LcfOverS::U)
        .def("M", &factorkit::LcfOverS::M)
        .def("N", &factorkit::LcfOverS::N);
    py::class_<factorkit::RiccatiSolution>(m, "RiccatiSolution")
        .def_readonly("K", &factorkit::RiccatiSolution::K)
        .def_readonly("residual_norm", &factorkit::RiccatiSolution::residual_norm)
        .def_readonly("closed_spectrum", &factorkit::RiccatiSolution::closed_spectrum);

    m.def(
        "lcf_from_srtr",
        [](const srtrcore::SrtrPair& p, int samples, std::uint64_t seed) {
            return factorkit::lcf_from_srtr(p, factorkit::default_theta(p.p(), p.domain), samples, seed);
        },
        py::arg("pair"), py::arg("samples") = 5, py::arg("seed") = 42);
    m.def(
        "solve_ctnare",
        [](const factorkit::LcfOverS& lcf, double tol) {
            factorkit::CtnareOptions opt;
            opt.tol = tol;
            return factorkit::solve_ctnare(lcf, opt);
        },
        py::arg("lcf"), py::arg("tol") = 1e-10);
    m.def("srtr_from_lcf", &factorkit::srtr_from_lcf, py::arg("lcf"), py::arg("solution"), py::arg("samples") = 5,
          py::arg("seed") = 42);

    m.def(
        "mm_conditions",
        [](const sysrep::PartitionedRealization& base, const Matrix& K, const Eigen::MatrixXi& mask_w,
           const Eigen::MatrixXi& mask_v, std::vector<int> orders, const std::string& extra, double tol) {
            const auto rep = structsyn::mm_conditions(base, K, make_spec(mask_w, mask_v, std::move(orders), extra), tol);
            return as_python(io::to_json(rep));
        },
        py::arg("base"), py::arg("K"), py::arg("mask_w"), py::arg("mask_v"), py::arg("orders") = std::vector<int>{},
        py::arg("extra") = "none", py::arg("tol") = 1e-6);
    m.def(
        "mm_solve",
        [](const sysrep::PartitionedRealization& base, const Eigen::MatrixXi& mask_w, const Eigen::MatrixXi& mask_v,
           std::vector<int> orders, const std::string& extra, double tol, std::uint64_t seed, int restarts) {
            structsyn::SolveOptions opt;
            opt.tol = tol;
            opt.seed = seed;
            opt.restarts = restarts;
            const auto res = structsyn::mm_solve(base, make_spec(mask_w, mask_v, std::move(orders), extra), opt);
            return py::make_tuple(res.K, as_python(io::to_json(res.report)));
        },
        py::arg("base"), py::arg("mask_w"), py::arg("mask_v"), py::arg("orders") = std::vector<int>{},
        py::arg("extra") = "none", py::arg("tol") = 1e-6, py::arg("seed") = 42, py::arg("restarts") = 8);
    m.def(
        "reduce_rows",
        [](const sysrep::PartitionedRealization& base, const Matrix& K, std::vector<int> orders, double tol) {
            return structsyn::reduce_rows(base, K, std::move(orders), tol).rows;
        },
        py::arg("base"), py::arg("K"), py::arg("orders"), py::arg("truncation_tol") = 1e-2);

    m.def("kd_from_srtr", [](const srtrcore::SrtrPair& p) { return loopctl::kd_from_srtr(p).realization; });
    m.def("unstable_pole_count", &loopctl::unstable_pole_count, py::arg("system"), py::arg("boundary_tol") = 1e-8);

    py::class_<loopctl::ClosedLoopModel>(m, "ClosedLoop")
        .def_readonly("Acl", &loopctl::ClosedLoopModel::Acl)
        .def_readonly("Bcl", &loopctl::ClosedLoopModel::Bcl)
        .def_readonly("Ccl", &loopctl::ClosedLoopModel::Ccl)
        .def_readonly("Dcl", &loopctl::ClosedLoopModel::Dcl)
        .def_readonly("plant_states", &loopctl::ClosedLoopModel::plant_states)
        .def_readonly("controller_states", &loopctl::ClosedLoopModel::controller_states)
        .def_property_readonly("states", &loopctl::ClosedLoopModel::states)
        .def("is_stable", [](const loopctl::ClosedLoopModel& cl) { return loopctl::check_internal_stability(cl); });

    m.def(
        "assemble_closed_loop",
        [](const sysrep::StateSpaceSystem& plant, const srtrcore::SrtrPair& pair, std::optional<std::vector<int>> orders) {
            return loopctl::assemble_closed_loop(plant, loopctl::rowwise_implementation(pair, orders));
        },
        py::arg("plant"), py::arg("pair"), py::arg("orders") = py::none());
    m.def(
        "simulate",
        [](const loopctl::ClosedLoopModel& cl, const Vector& x0, double horizon, double dt, int stride,
           std::function<Vector(double)> du) {
            loopctl::ExogenousSignals sig;
            sig.du = std::move(du);
            const auto tr = loopctl::simulate(cl, sig, x0, horizon, dt, stride);
            return py::make_tuple(tr.t, tr.states, tr.diverged);
        },
        py::arg("closed_loop"), py::arg("x0"), py::arg("horizon"), py::arg("dt") = 1e-3, py::arg("stride") = 1,
        py::arg("du") = py::none(), "Free or disturbed response; returns (t, states, diverged).");

    py::module_ fixtures = m.def_submodule("fixtures", "six-node ring example data");
    fixtures.def("ring6_plant", &cli::ring6_plant);
    fixtures.def("ring6_controller", &cli::ring6_controller);
    fixtures.def("ring6_K", &cli::ring6_K);
    fixtures.def("ring6_mask", []() -> Eigen::MatrixXi { return cli::ring6_mask().cast<int>(); });
}

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pullsim/analytic.hpp"
#include "pullsim/bandit.hpp"
#include "pullsim/error.hpp"
#include "pullsim/harness.hpp"
#include "pullsim/sim.hpp"

namespace py = pybind11;
using namespace pullsim;

namespace {

ReplicationScheme scheme_for(const SystemParams& p, int k, std::optional<int> m) {
    ReplicationScheme s{m.value_or(p.n), k};
    s.validate(p);
    return s;
}

std::string repr(const SystemParams& p) {
    std::string r = "SystemParams(n=" + std::to_string(p.n) + ", lambda=" + csv::format_double(p.lambda) + ", ";
    if (auto* e = p.response.as_exponential()) return r + "exponential(nu=" + csv::format_double(e->nu) + "))";
    if (auto* u = p.response.as_uniform())
        return r + "uniform(a=" + csv::format_double(u->a) + ", h=" + csv::format_double(u->h) + "))";
    const Gamma* g = p.response.as_gamma();
    return r + "gamma(r=" + std::to_string(g->r) + ", theta=" + csv::format_double(g->theta) + "))";
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "C++ core of pullsim";
    m.attr("__version__") = std::string(version_string());

    py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
    py::register_exception<UnsupportedDistribution>(m, "UnsupportedDistribution", PyExc_ValueError);
    py::register_exception<DegenerateRates>(m, "DegenerateRates", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    py::class_<ResponseDist>(m, "ResponseDist")
        .def_static("exponential", &ResponseDist::exponential, py::arg("nu"))
        .def_static("uniform", &ResponseDist::uniform, py::arg("a"), py::arg("h"))
        .def_static("gamma", &ResponseDist::gamma, py::arg("r"), py::arg("theta"))
        .def_property_readonly("name", &ResponseDist::name)
        .def_property_readonly("mean", &ResponseDist::mean);

    py::class_<SystemParams>(m, "SystemParams")
        .def(py::init(&SystemParams::make), py::arg("n"), py::arg("lam"), py::arg("response"))
        .def_static(
            "exponential",
            [](int n, double lam, double nu) { return SystemParams::make(n, lam, ResponseDist::exponential(nu)); },
            py::arg("n"), py::arg("lam"), py::arg("nu"))
        .def_readonly("n", &SystemParams::n)
        .def_readonly("lam", &SystemParams::lambda)
        .def_readonly("response", &SystemParams::response)
        .def("__repr__", &repr);

    py::class_<OptimalK>(m, "OptimalK")
        .def_readonly("k_star", &OptimalK::k_star)
        .def_readonly("is_tie", &OptimalK::is_tie);
    py::class_<BoundaryFlags>(m, "BoundaryFlags")
        .def_readonly("wait_one", &BoundaryFlags::wait_one)
        .def_readonly("wait_all", &BoundaryFlags::wait_all);
    py::class_<ImprovementRatios>(m, "ImprovementRatios")
        .def_readonly("rho_aoi", &ImprovementRatios::rho_aoi)
        .def_readonly("rho_utility", &ImprovementRatios::rho_utility);

    m.def("reference_setup", &reference_setup, py::arg("index"));
    m.def("harmonic", &harmonic, py::arg("n"));
    m.def(
        "expected_aoi",
        [](const SystemParams& p, int k, std::optional<int> fan) {
            return expected_aoi_closed_form(p, scheme_for(p, k, fan));
        },
        py::arg("params"), py::arg("k"), py::arg("m") = py::none());
    m.def(
        "expected_utility",
        [](const SystemParams& p, int k, std::optional<int> fan) {
            return expected_utility_exp(p, scheme_for(p, k, fan));
        },
        py::arg("params"), py::arg("k"), py::arg("m") = py::none());
    m.def(
        "expected_utility_general",
        [](const SystemParams& p, int k, std::optional<UtilityFn> utility) {
            const UtilityEstimate e = expected_utility_general(p, k, utility.value_or(UtilityFn(exponential_utility)));
            return py::dict(py::arg("value") = e.value, py::arg("error") = e.error,
                            py::arg("monte_carlo") = e.monte_carlo);
        },
        py::arg("params"), py::arg("k"), py::arg("utility") = py::none(),
        "E[U(AoI)] by quadrature of the AoI density; U defaults to exp(-x).");
    m.def("optimal_k_aoi", &optimal_k_aoi, py::arg("params"));
    m.def("optimal_k_utility", &optimal_k_utility, py::arg("params"));
    m.def("optimal_k_aoi_uniform", &optimal_k_aoi_uniform, py::arg("params"));
    m.def("boundary_aoi", &boundary_aoi, py::arg("params"));
    m.def("boundary_utility", &boundary_utility, py::arg("params"));
    m.def("improvement_ratios", &improvement_ratios, py::arg("params"));
    m.def(
        "hyperexp_density",
        [](const SystemParams& p, int k) {
            const HyperexpDensity d = hyperexp_density(p, k);
            return py::dict(py::arg("rates") = d.rates, py::arg("weights") = d.weights);
        },
        py::arg("params"), py::arg("k"));

    m.def(
        "run_sim",
        [](const SystemParams& p, std::uint64_t runs, std::uint64_t seed, const std::string& target, int fan,
           unsigned threads) {
            SimConfig c{p};
            c.m = fan;
            c.runs = runs;
            c.seed = seed;
            c.threads = threads;
            if (target == "aoi")
                c.target = EstimatorTarget::aoi;
            else if (target == "utility")
                c.target = EstimatorTarget::utility;
            else if (target == "response_time")
                c.target = EstimatorTarget::response_time;
            else
                throw ParameterError("target must be 'aoi', 'utility' or 'response_time'");
            SimResult r;
            {
                py::gil_scoped_release release;
                r = run_sim(c);
            }
            return py::dict(py::arg("mean") = r.mean, py::arg("std_error") = r.std_error, py::arg("runs") = r.runs);
        },
        py::arg("params"), py::arg("runs") = 100000, py::arg("seed") = 1, py::arg("target") = "aoi",
        py::arg("m") = 0, py::arg("threads") = 0);

    py::enum_<Algorithm>(m, "Algorithm")
        .value("greedy", Algorithm::greedy)
        .value("greedy_n", Algorithm::greedy_n)
        .value("greedy_lp", Algorithm::greedy_lp)
        .value("ucb1", Algorithm::ucb1)
        .value("ucb_n", Algorithm::ucb_n)
        .value("ucb_lp", Algorithm::ucb_lp)
        .value("ucb_lfg", Algorithm::ucb_lfg);
    m.def("algorithms", [] {
        std::vector<std::string> names;
        for (Algorithm a : kAllAlgorithms) names.emplace_back(algorithm_name(a));
        return names;
    });
    m.def(
        "run_bandit",
        [](const std::string& name, const SystemParams& p, std::uint64_t horizon, std::uint64_t seed, double c,
           double d) {
            auto alg = parse_algorithm(name);
            if (!alg) throw ParameterError("unknown algorithm '" + name + "'");
            RegretTrace trace;
            {
                py::gil_scoped_release release;
                BanditEnv env = BanditEnv::exponential(p, seed);
                RandomSource rng = RandomSource(seed).derive(1);
                trace = run_algorithm(*alg, env, horizon, GreedyConfig{c, d}, rng);
            }
            return py::dict(py::arg("algorithm") = trace.algorithm, py::arg("arm") = trace.arm,
                            py::arg("cum_regret") = trace.cum_regret);
        },
        py::arg("algorithm"), py::arg("params"), py::arg("horizon"), py::arg("seed") = 1, py::arg("c") = 1.0,
        py::arg("d") = 0.05);

    m.def(
        "run_experiment",
        [](const std::string& spec_json) {
            const ExperimentSpec spec = spec_from_json(spec_json);
            ExperimentResult r;
            {
                py::gil_scoped_release release;
                r = run_experiment(spec);
            }
            std::string text;
            switch (r.kind) {
                case ExperimentKind::aoi_curve:
                case ExperimentKind::utility_curve: text = csv::to_string(curve_table(r.curve)); break;
                case ExperimentKind::param_sweep: text = csv::to_string(sweep_table(r.sweep)); break;
                case ExperimentKind::bandit_compare:
                    text = csv::to_string(bandit_summary_table(r.bandit_summary));
                    break;
            }
            return py::dict(py::arg("csv") = text, py::arg("files") = r.files);
        },
        py::arg("spec_json"), "Runs an experiment described by a JSON spec and returns its main table as CSV.");
}

#include "cli.hpp"

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pullsim/analytic.hpp"
#include "pullsim/error.hpp"
#include "pullsim/harness.hpp"

namespace pullsim {

namespace {

struct SystemOptions {
    int setup = 0;
    int n = 20;
    double lambda = 1.0;
    std::string dist = "exponential";
    double nu = 5.0;
    double a = 0.0;
    double h = 0.0;
    int shape = 2;
    double scale = 0.1;

    SystemParams build(const CLI::App& app) const {
        if (setup != 0) {
            SystemParams p = dist == "uniform" ? reference_setup_uniform(setup) : reference_setup(setup);
            if (app.count("--n")) p.n = n;
            if (app.count("--lambda")) p.lambda = lambda;
            p.validate();
            if (dist != "exponential" && dist != "uniform")
                throw ParameterError("--setup works with exponential or uniform response times");
            if (app.count("--nu") || app.count("--uniform-min") || app.count("--uniform-width"))
                throw ParameterError("--setup fixes the response distribution; drop --nu/--uniform-min/--uniform-width");
            return p;
        }
        if (dist == "exponential") return SystemParams::make(n, lambda, ResponseDist::exponential(nu));
        if (dist == "uniform") {
            // Without explicit bounds, match the mean of Exp(nu): [1/(2 nu), 3/(2 nu)].
            const double lo = app.count("--uniform-min") ? a : 1.0 / (2.0 * nu);
            const double width = app.count("--uniform-width") ? h : 1.0 / nu;
            return SystemParams::make(n, lambda, ResponseDist::uniform(lo, width));
        }
        return SystemParams::make(n, lambda, ResponseDist::gamma(shape, scale));
    }
};

void add_system_options(CLI::App& app, SystemOptions& o) {
    app.add_option("--setup", o.setup, "Reference setup 1, 2 or 3 (n=20; lambda,nu = 1,200 / 1,5 / 100,2)")
        ->check(CLI::Range(1, 3));
    app.add_option("--n", o.n, "Number of servers")->capture_default_str();
    app.add_option("--lambda", o.lambda, "Update rate of each server")->capture_default_str();
    app.add_option("--dist", o.dist, "Response time family")
        ->check(CLI::IsMember({"exponential", "uniform", "gamma"}))
        ->capture_default_str();
    app.add_option("--nu", o.nu, "Exponential response rate")->capture_default_str();
    app.add_option("--uniform-min", o.a, "Uniform lower bound (default 1/(2 nu))");
    app.add_option("--uniform-width", o.h, "Uniform width (default 1/nu)");
    app.add_option("--shape", o.shape, "Gamma shape r (integer)")->capture_default_str();
    app.add_option("--scale", o.scale, "Gamma scale theta")->capture_default_str();
}

struct OutputOptions {
    std::string format = "csv";
    std::string out;

    OutputFormat fmt() const { return format == "json" ? OutputFormat::json : OutputFormat::csv; }
};

void add_output_options(CLI::App& app, OutputOptions& o) {
    app.add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    app.add_option("--out", o.out, "Output file; a manifest is written next to it");
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

std::string fmt_num(double x) { return csv::format_double(x); }

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write '" + path + "'");
    f << text;
    if (!f.flush()) throw IoError("failed writing '" + path + "'");
}

// analytic ------------------------------------------------------------------------

int run_analytic(const SystemParams& p, int m, const OutputOptions& o, std::ostream& out) {
    const int fan = m == 0 ? p.n : m;
    ReplicationScheme{fan, 1}.validate(p);
    const bool exp = p.response.as_exponential() != nullptr;
    if (!exp && !(p.response.as_uniform() && fan == p.n))
        throw UnsupportedDistribution("no closed form for " + p.response.name() +
                                      " response times with m=" + std::to_string(fan) +
                                      "; use the 'simulate' subcommand instead");

    csv::Table table{{"k", "expected_aoi", "expected_utility"}, {}};
    for (int k = 1; k <= fan; ++k) {
        const ReplicationScheme s{fan, k};
        std::optional<double> u;
        if (exp) u = expected_utility_exp(p, s);
        table.rows.push_back({std::to_string(k), fmt_num(expected_aoi_closed_form(p, s)), csv::format_optional(u)});
    }

    // Optimal k and boundary flags describe the full (n, k) scheme.
    std::vector<std::pair<std::string, std::string>> summary;
    if (exp) {
        const OptimalK ka = optimal_k_aoi(p), ku = optimal_k_utility(p);
        const BoundaryFlags ba = boundary_aoi(p), bu = boundary_utility(p);
        summary = {{"k*_aoi", std::to_string(ka.k_star)},
                   {"k*_aoi_tie", fmt_bool(ka.is_tie)},
                   {"k*_utility", std::to_string(ku.k_star)},
                   {"k*_utility_tie", fmt_bool(ku.is_tie)},
                   {"wait_one", fmt_bool(ba.wait_one)},
                   {"wait_all", fmt_bool(ba.wait_all)},
                   {"wait_one_utility", fmt_bool(bu.wait_one)},
                   {"wait_all_utility", fmt_bool(bu.wait_all)}};
    } else {
        const int k = optimal_k_aoi_uniform(p);
        summary = {{"k*_aoi", std::to_string(k)}, {"wait_one", fmt_bool(k == 1)}, {"wait_all", fmt_bool(k == p.n)}};
    }

    if (o.fmt() == OutputFormat::json) {
        nlohmann::ordered_json j;
        for (const auto& [key, value] : summary) j[key] = nlohmann::json::parse(value);
        j["table"] = nlohmann::json::parse(render(table, OutputFormat::json));
        const std::string text = j.dump(2) + "\n";
        if (o.out.empty())
            out << text;
        else
            write_text(o.out, text);
        return 0;
    }
    for (const auto& [key, value] : summary) out << key << " = " << value << "\n";
    if (o.out.empty())
        out << "\n" << csv::to_string(table);
    else
        write_text(o.out, csv::to_string(table));
    return 0;
}

// experiment output ---------------------------------------------------------------

void emit(const ExperimentSpec& spec, std::ostream& out) {
    const ExperimentResult r = run_experiment(spec);
    if (!spec.output.empty()) {
        for (const auto& f : r.files) out << "wrote " << f << "\n";
        return;
    }
    switch (r.kind) {
        case ExperimentKind::aoi_curve:
        case ExperimentKind::utility_curve: out << render(curve_table(r.curve), spec.format); break;
        case ExperimentKind::param_sweep: out << render(sweep_table(r.sweep), spec.format); break;
        case ExperimentKind::bandit_compare: out << render(bandit_summary_table(r.bandit_summary), spec.format); break;
    }
}

std::vector<double> grid(double from, double to, int steps) {
    if (steps < 1) throw ParameterError("--steps must be >= 1");
    if (steps == 1) return {from};
    std::vector<double> v(static_cast<std::size_t>(steps));
    for (int i = 0; i < steps; ++i) v[static_cast<std::size_t>(i)] = from + (to - from) * i / (steps - 1);
    return v;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Compute, simulate and learn how many server responses to wait for."};
    app.name("pullsim");
    app.set_version_flag("--version", std::string(version_string()));
    app.require_subcommand(1);

    std::uint64_t seed = 1;
    std::uint64_t runs = 100000;
    unsigned threads = 0;
    auto add_run_options = [&](CLI::App& sub, bool with_runs) {
        sub.add_option("--seed", seed, "Base random seed")->capture_default_str();
        if (with_runs) sub.add_option("--runs", runs, "Monte Carlo requests")->capture_default_str();
        sub.add_option("--threads", threads, "Worker cap (0 = PULLSIM_THREADS or all cores)");
    };

    // analytic
    SystemOptions a_sys;
    OutputOptions a_out;
    int a_m = 0;
    CLI::App* analytic = app.add_subcommand("analytic", "Closed-form AoI, utility, optimal k and boundary flags");
    add_system_options(*analytic, a_sys);
    analytic->add_option("--m", a_m, "Fan-out (default n)");
    add_output_options(*analytic, a_out);

    // simulate
    SystemOptions s_sys;
    OutputOptions s_out;
    int s_m = 0;
    std::string s_target = "aoi", s_sampler = "memoryless", s_analytic = "auto";
    double s_horizon = 1e6;
    CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo AoI or utility curve over k");
    add_system_options(*simulate, s_sys);
    simulate->add_option("--m", s_m, "Fan-out (default n)");
    simulate->add_option("--target", s_target, "Estimated quantity")
        ->check(CLI::IsMember({"aoi", "utility"}))
        ->capture_default_str();
    simulate->add_option("--sampler", s_sampler, "Server AoI sampling")
        ->check(CLI::IsMember({"memoryless", "trajectory"}))
        ->capture_default_str();
    simulate->add_option("--horizon-updates", s_horizon, "Trajectory length in expected updates")
        ->capture_default_str();
    simulate->add_option("--analytic", s_analytic, "Closed-form column")
        ->check(CLI::IsMember({"auto", "required", "off"}))
        ->capture_default_str();
    add_run_options(*simulate, true);
    add_output_options(*simulate, s_out);

    // sweep
    SystemOptions w_sys;
    OutputOptions w_out;
    std::string w_param = "lambda", w_objective = "aoi";
    std::vector<double> w_values;
    double w_from = 0.25, w_to = 2.0;
    int w_steps = 8;
    CLI::App* sweep = app.add_subcommand("sweep", "Optimal k and improvement ratio over a parameter grid");
    add_system_options(*sweep, w_sys);
    sweep->add_option("--param", w_param, "Swept parameter")
        ->check(CLI::IsMember({"lambda", "nu", "n"}))
        ->capture_default_str();
    sweep->add_option("--objective", w_objective, "Optimized quantity")
        ->check(CLI::IsMember({"aoi", "utility"}))
        ->capture_default_str();
    auto* values_opt = sweep->add_option("--values", w_values, "Explicit increasing values")->delimiter(',');
    sweep->add_option("--from", w_from, "Grid start")->excludes(values_opt)->capture_default_str();
    sweep->add_option("--to", w_to, "Grid end")->excludes(values_opt)->capture_default_str();
    sweep->add_option("--steps", w_steps, "Grid points")->excludes(values_opt)->capture_default_str();
    add_output_options(*sweep, w_out);

    // bandit
    SystemOptions b_sys;
    OutputOptions b_out;
    std::vector<std::string> b_algorithms;
    std::uint64_t b_horizon = 1000000, b_record = 1000, b_mc = 2000000;
    std::size_t b_seeds = 10;
    GreedyConfig b_greedy;
    CLI::App* bandit = app.add_subcommand("bandit", "Compare learning algorithms by cumulative regret");
    add_system_options(*bandit, b_sys);
    bandit->add_option("--algorithms", b_algorithms,
                       "Subset of eps-greedy,eps-greedy-n,eps-greedy-lp,ucb1,ucb-n,ucb-lp,ucb-lfg")
        ->delimiter(',');
    bandit->add_option("--horizon", b_horizon, "Rounds T")->capture_default_str();
    bandit->add_option("--seeds", b_seeds, "Number of consecutive seeds from --seed")->capture_default_str();
    bandit->add_option("--record-every", b_record, "Trace thinning interval")->capture_default_str();
    bandit->add_option("--mc-runs", b_mc, "Requests for estimating arm means without a closed form")
        ->capture_default_str();
    bandit->add_option("--c", b_greedy.c, "Greedy exploration constant")->capture_default_str();
    bandit->add_option("--d", b_greedy.d, "Greedy gap parameter")->capture_default_str();
    add_run_options(*bandit, false);
    add_output_options(*bandit, b_out);

    // run
    std::string r_manifest, r_out;
    CLI::App* rerun = app.add_subcommand("run", "Re-run an experiment from its manifest");
    rerun->add_option("--manifest", r_manifest, "Manifest written by a previous run")->required();
    rerun->add_option("--out", r_out, "Output path (default: the recorded one)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << version_string() << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n";
        const CLI::App* failed = &app;
        for (const CLI::App* sub : app.get_subcommands())
            if (sub->parsed()) failed = sub;
        err << failed->help();
        return 2;
    }

    try {
        if (analytic->parsed()) return run_analytic(a_sys.build(*analytic), a_m, a_out, out);

        ExperimentSpec spec;
        spec.threads = threads;
        if (simulate->parsed()) {
            spec.kind = s_target == "aoi" ? ExperimentKind::aoi_curve : ExperimentKind::utility_curve;
            spec.params = s_sys.build(*simulate);
            spec.m = s_m;
            spec.runs = runs;
            spec.seeds = {seed};
            spec.sampler = s_sampler == "trajectory" ? AoiSampling::trajectory : AoiSampling::memoryless;
            spec.horizon_updates = s_horizon;
            spec.analytic = s_analytic == "required" ? AnalyticMode::required
                            : s_analytic == "off"    ? AnalyticMode::off
                                                     : AnalyticMode::automatic;
            spec.output = s_out.out;
            spec.format = s_out.fmt();
        } else if (sweep->parsed()) {
            spec.kind = ExperimentKind::param_sweep;
            spec.params = w_sys.build(*sweep);
            spec.sweep.parameter = w_param == "nu" ? SweepParameter::nu
                                   : w_param == "n" ? SweepParameter::n
                                                    : SweepParameter::lambda;
            spec.sweep.objective = w_objective == "utility" ? Objective::utility : Objective::aoi;
            spec.sweep.values = w_values.empty() ? grid(w_from, w_to, w_steps) : w_values;
            spec.output = w_out.out;
            spec.format = w_out.fmt();
        } else if (bandit->parsed()) {
            spec.kind = ExperimentKind::bandit_compare;
            spec.params = b_sys.build(*bandit);
            if (b_seeds < 1) throw ParameterError("--seeds must be >= 1");
            spec.seeds = consecutive_seeds(seed, b_seeds);
            if (!b_algorithms.empty()) {
                spec.bandit.algorithms.clear();
                for (const auto& name : b_algorithms) {
                    auto alg = parse_algorithm(name);
                    if (!alg) throw ParameterError("unknown algorithm '" + name + "'");
                    spec.bandit.algorithms.push_back(*alg);
                }
            }
            spec.bandit.horizon = b_horizon;
            spec.bandit.record_every = b_record;
            spec.bandit.mc_runs = b_mc;
            spec.bandit.greedy = b_greedy;
            spec.output = b_out.out;
            spec.format = b_out.fmt();
        } else {
            spec = load_manifest(r_manifest);
            if (!r_out.empty()) spec.output = r_out;
        }
        emit(spec, out);
        return 0;
    } catch (const ParameterError& e) {
        err << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const UnsupportedDistribution& e) {
        err << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const DegenerateRates& e) {
        err << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace pullsim

#include "pullsim/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pullsim/analytic.hpp"
#include "pullsim/error.hpp"
#include "pullsim/parallel.hpp"
#include "pullsim/sim.hpp"

#ifndef PULLSIM_VERSION_STRING
#define PULLSIM_VERSION_STRING "unknown"
#endif

namespace pullsim {

using nlohmann::json;

std::string_view version_string() { return PULLSIM_VERSION_STRING; }

// -- Names ----------------------------------------------------------------------

namespace {

template <class E>
struct NameTable {
    E value;
    std::string_view name;
};

constexpr NameTable<ExperimentKind> kKinds[] = {{ExperimentKind::aoi_curve, "aoi_curve"},
                                                 {ExperimentKind::utility_curve, "utility_curve"},
                                                 {ExperimentKind::param_sweep, "param_sweep"},
                                                 {ExperimentKind::bandit_compare, "bandit_compare"}};
constexpr NameTable<OutputFormat> kFormats[] = {{OutputFormat::csv, "csv"}, {OutputFormat::json, "json"}};
constexpr NameTable<SweepParameter> kSweepParams[] = {
    {SweepParameter::lambda, "lambda"}, {SweepParameter::nu, "nu"}, {SweepParameter::n, "n"}};
constexpr NameTable<Objective> kObjectives[] = {{Objective::aoi, "aoi"}, {Objective::utility, "utility"}};
constexpr NameTable<AnalyticMode> kAnalyticModes[] = {
    {AnalyticMode::automatic, "auto"}, {AnalyticMode::required, "required"}, {AnalyticMode::off, "off"}};
constexpr NameTable<AoiSampling> kSamplers[] = {{AoiSampling::memoryless, "memoryless"},
                                                {AoiSampling::trajectory, "trajectory"}};

template <class E, std::size_t N>
std::string_view name_of(const NameTable<E> (&table)[N], E value) {
    for (const auto& entry : table)
        if (entry.value == value) return entry.name;
    return "unknown";
}

template <class E, std::size_t N>
E value_of(const NameTable<E> (&table)[N], std::string_view name, std::string_view what) {
    for (const auto& entry : table)
        if (entry.name == name) return entry.value;
    throw ParameterError("unknown " + std::string(what) + " '" + std::string(name) + "'");
}

}  // namespace

std::string_view kind_name(ExperimentKind kind) { return name_of(kKinds, kind); }

// -- Spec -----------------------------------------------------------------------

std::vector<std::uint64_t> consecutive_seeds(std::uint64_t base, std::size_t count) {
    std::vector<std::uint64_t> seeds(count);
    for (std::size_t i = 0; i < count; ++i) seeds[i] = base + i;
    return seeds;
}

SystemParams reference_setup(int index) {
    switch (index) {
        case 1: return SystemParams::make(20, 1.0, ResponseDist::exponential(200.0));
        case 2: return SystemParams::make(20, 1.0, ResponseDist::exponential(5.0));
        case 3: return SystemParams::make(20, 100.0, ResponseDist::exponential(2.0));
    }
    throw ParameterError("reference setups are numbered 1 to 3");
}

SystemParams reference_setup_uniform(int index) {
    const SystemParams exp = reference_setup(index);
    const double nu = exp.response.as_exponential()->nu;
    return SystemParams::make(exp.n, exp.lambda, ResponseDist::uniform(1.0 / (2.0 * nu), 1.0 / nu));
}

void ExperimentSpec::validate() const {
    params.validate();
    if (seeds.empty()) throw ParameterError("experiment needs at least one seed");
    switch (kind) {
        case ExperimentKind::aoi_curve:
        case ExperimentKind::utility_curve: {
            const int fan = m == 0 ? params.n : m;
            if (fan < 1 || fan > params.n) throw ParameterError("fan-out m must be in [1, n]");
            if (runs < 1) throw ParameterError("runs must be >= 1");
            if (sampler == AoiSampling::trajectory && !(horizon_updates > 0.0))
                throw ParameterError("trajectory horizon must be positive");
            break;
        }
        case ExperimentKind::param_sweep: {
            if (!params.response.as_exponential())
                throw UnsupportedDistribution("parameter sweeps use closed forms and need exponential response times");
            if (sweep.values.empty()) throw ParameterError("sweep needs at least one value");
            for (std::size_t i = 1; i < sweep.values.size(); ++i)
                if (!(sweep.values[i] > sweep.values[i - 1]))
                    throw ParameterError("sweep values must be strictly increasing");
            for (double v : sweep.values) {
                if (!(v > 0.0) || !std::isfinite(v)) throw ParameterError("sweep values must be positive");
                if (sweep.parameter == SweepParameter::n && v != std::floor(v))
                    throw ParameterError("sweep over n needs integer values");
            }
            break;
        }
        case ExperimentKind::bandit_compare: {
            if (bandit.algorithms.empty()) throw ParameterError("bandit comparison needs at least one algorithm");
            if (bandit.horizon < 3) throw ParameterError("bandit horizon must be >= 3");
            if (bandit.record_every < 1) throw ParameterError("record_every must be >= 1");
            if (!(bandit.greedy.c > 0.0)) throw ParameterError("greedy c must be positive");
            if (!(bandit.greedy.d > 0.0 && bandit.greedy.d < 1.0)) throw ParameterError("greedy d must lie in (0, 1)");
            break;
        }
    }
}

namespace {

json response_to_json(const ResponseDist& r) {
    if (auto* e = r.as_exponential()) return {{"family", "exponential"}, {"nu", e->nu}};
    if (auto* u = r.as_uniform()) return {{"family", "uniform"}, {"a", u->a}, {"h", u->h}};
    const Gamma* g = r.as_gamma();
    return {{"family", "gamma"}, {"r", g->r}, {"theta", g->theta}};
}

ResponseDist response_from_json(const json& j) {
    const std::string family = j.at("family").get<std::string>();
    if (family == "exponential") return ResponseDist::exponential(j.at("nu").get<double>());
    if (family == "uniform") return ResponseDist::uniform(j.at("a").get<double>(), j.at("h").get<double>());
    if (family == "gamma") return ResponseDist::gamma(j.at("r").get<int>(), j.at("theta").get<double>());
    throw ParameterError("unknown response family '" + family + "'");
}

json spec_json(const ExperimentSpec& spec) {
    json algorithms = json::array();
    for (Algorithm a : spec.bandit.algorithms) algorithms.push_back(std::string(algorithm_name(a)));
    return {
        {"kind", kind_name(spec.kind)},
        {"params", {{"n", spec.params.n}, {"lambda", spec.params.lambda}, {"response", response_to_json(spec.params.response)}}},
        {"m", spec.m},
        {"runs", spec.runs},
        {"seeds", spec.seeds},
        {"sampler", name_of(kSamplers, spec.sampler)},
        {"horizon_updates", spec.horizon_updates},
        {"analytic", name_of(kAnalyticModes, spec.analytic)},
        {"sweep",
         {{"parameter", name_of(kSweepParams, spec.sweep.parameter)},
          {"values", spec.sweep.values},
          {"objective", name_of(kObjectives, spec.sweep.objective)}}},
        {"bandit",
         {{"algorithms", algorithms},
          {"horizon", spec.bandit.horizon},
          {"c", spec.bandit.greedy.c},
          {"d", spec.bandit.greedy.d},
          {"record_every", spec.bandit.record_every},
          {"mc_runs", spec.bandit.mc_runs}}},
        {"output", spec.output},
        {"format", name_of(kFormats, spec.format)},
        {"threads", spec.threads},
    };
}

ExperimentSpec spec_from(const json& j) {
    ExperimentSpec spec;
    spec.kind = value_of(kKinds, j.at("kind").get<std::string>(), "experiment kind");
    const json& p = j.at("params");
    spec.params = SystemParams::make(p.at("n").get<int>(), p.at("lambda").get<double>(), response_from_json(p.at("response")));
    spec.m = j.value("m", 0);
    spec.runs = j.value("runs", spec.runs);
    spec.seeds = j.value("seeds", spec.seeds);
    spec.sampler = value_of(kSamplers, j.value("sampler", std::string("memoryless")), "sampler");
    spec.horizon_updates = j.value("horizon_updates", spec.horizon_updates);
    spec.analytic = value_of(kAnalyticModes, j.value("analytic", std::string("auto")), "analytic mode");
    if (j.contains("sweep")) {
        const json& s = j.at("sweep");
        spec.sweep.parameter = value_of(kSweepParams, s.value("parameter", std::string("lambda")), "sweep parameter");
        spec.sweep.values = s.value("values", std::vector<double>{});
        spec.sweep.objective = value_of(kObjectives, s.value("objective", std::string("aoi")), "objective");
    }
    if (j.contains("bandit")) {
        const json& b = j.at("bandit");
        if (b.contains("algorithms")) {
            spec.bandit.algorithms.clear();
            for (const auto& name : b.at("algorithms")) {
                auto a = parse_algorithm(name.get<std::string>());
                if (!a) throw ParameterError("unknown algorithm '" + name.get<std::string>() + "'");
                spec.bandit.algorithms.push_back(*a);
            }
        }
        spec.bandit.horizon = b.value("horizon", spec.bandit.horizon);
        spec.bandit.greedy.c = b.value("c", spec.bandit.greedy.c);
        spec.bandit.greedy.d = b.value("d", spec.bandit.greedy.d);
        spec.bandit.record_every = b.value("record_every", spec.bandit.record_every);
        spec.bandit.mc_runs = b.value("mc_runs", spec.bandit.mc_runs);
    }
    spec.output = j.value("output", std::string());
    spec.format = value_of(kFormats, j.value("format", std::string("csv")), "format");
    spec.threads = j.value("threads", 0u);
    return spec;
}

}  // namespace

std::string spec_to_json(const ExperimentSpec& spec) { return spec_json(spec).dump(2); }

ExperimentSpec spec_from_json(std::string_view text) {
    try {
        return spec_from(json::parse(text));
    } catch (const json::exception& e) {
        throw ParameterError(std::string("invalid experiment spec: ") + e.what());
    }
}

ExperimentSpec load_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read manifest '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return spec_from(json::parse(ss.str()).at("spec"));
    } catch (const json::exception& e) {
        throw ParameterError("invalid manifest '" + path + "': " + e.what());
    }
}

std::string manifest_path(const std::string& output) {
    std::filesystem::path p(output);
    p.replace_extension(".manifest.json");
    return p.string();
}

std::string summary_path(const std::string& output, OutputFormat format) {
    std::filesystem::path p(output);
    p.replace_extension(format == OutputFormat::json ? ".summary.json" : ".summary.csv");
    return p.string();
}

// -- Tables ---------------------------------------------------------------------

csv::Table curve_table(const std::vector<CurveRow>& rows) {
    csv::Table t{{"k", "analytic", "simulated", "stderr"}, {}};
    for (const auto& r : rows)
        t.rows.push_back({std::to_string(r.k), csv::format_optional(r.analytic), csv::format_double(r.simulated),
                          csv::format_double(r.std_error)});
    return t;
}

csv::Table sweep_table(const std::vector<SweepRow>& rows) {
    csv::Table t{{"value", "k_star", "ratio"}, {}};
    for (const auto& r : rows)
        t.rows.push_back({csv::format_double(r.value), std::to_string(r.k_star), csv::format_double(r.ratio)});
    return t;
}

csv::Table bandit_table(const std::vector<BanditRow>& rows) {
    csv::Table t{{"t", "algorithm", "seed", "arm", "cum_regret"}, {}};
    for (const auto& r : rows)
        t.rows.push_back({std::to_string(r.t), r.algorithm, std::to_string(r.seed), std::to_string(r.arm),
                          csv::format_double(r.cum_regret)});
    return t;
}

csv::Table bandit_summary_table(const std::vector<BanditSummaryRow>& rows) {
    csv::Table t{{"t", "algorithm", "mean_cum_regret", "stderr"}, {}};
    for (const auto& r : rows)
        t.rows.push_back({std::to_string(r.t), r.algorithm, csv::format_double(r.mean_cum_regret),
                          csv::format_double(r.std_error)});
    return t;
}

std::vector<CurveRow> parse_curve_table(const csv::Table& table) {
    const std::size_t k = table.column("k"), a = table.column("analytic"), s = table.column("simulated"),
                      e = table.column("stderr");
    std::vector<CurveRow> rows;
    for (const auto& r : table.rows)
        rows.push_back({std::stoi(r[k]), csv::parse_optional(r[a]), csv::parse_double(r[s]), csv::parse_double(r[e])});
    return rows;
}

std::vector<SweepRow> parse_sweep_table(const csv::Table& table) {
    const std::size_t v = table.column("value"), k = table.column("k_star"), r = table.column("ratio");
    std::vector<SweepRow> rows;
    for (const auto& row : table.rows)
        rows.push_back({csv::parse_double(row[v]), std::stoi(row[k]), csv::parse_double(row[r])});
    return rows;
}

std::string render(const csv::Table& table, OutputFormat format) {
    if (format == OutputFormat::csv) return csv::to_string(table);
    // Cells stay as their canonical text; numbers are emitted unquoted.
    json rows = json::array();
    for (const auto& r : table.rows) {
        json row = json::array();
        for (const auto& cell : r) {
            if (cell.empty()) {
                row.push_back(nullptr);
                continue;
            }
            try {
                std::size_t used = 0;
                (void)std::stod(cell, &used);
                if (used == cell.size()) {
                    row.push_back(json::parse(cell));
                    continue;
                }
            } catch (const std::exception&) {
            }
            row.push_back(cell);
        }
        rows.push_back(std::move(row));
    }
    return json{{"columns", table.header}, {"rows", rows}}.dump(2) + "\n";
}

// -- Computation ----------------------------------------------------------------

namespace {

std::vector<CurveRow> compute_curve(const ExperimentSpec& spec) {
    const SystemParams& p = spec.params;
    const int m = spec.m == 0 ? p.n : spec.m;
    const bool aoi = spec.kind == ExperimentKind::aoi_curve;

    auto closed_form = [&](int k) -> std::optional<double> {
        const ReplicationScheme scheme{m, k};
        if (p.response.as_exponential()) return aoi ? expected_aoi(p, scheme) : expected_utility_exp(p, scheme);
        if (aoi && p.response.as_uniform() && m == p.n) return expected_aoi_uniform(p, scheme);
        return std::nullopt;
    };
    if (spec.analytic == AnalyticMode::required && !closed_form(1))
        throw UnsupportedDistribution("no closed form for " + std::string(aoi ? "expected AoI" : "expected utility") +
                                      " with " + p.response.name() + " response times (m=" + std::to_string(m) +
                                      "); use the simulated column (run_sim) instead");

    SimConfig config{p};
    config.m = m;
    config.runs = spec.runs;
    config.seed = spec.seeds.front();
    config.target = aoi ? EstimatorTarget::aoi : EstimatorTarget::utility;
    config.threads = spec.threads;
    const SimResult sim = spec.sampler == AoiSampling::trajectory ? run_sim_trajectory(config, spec.horizon_updates)
                                                                  : run_sim(config);

    std::vector<CurveRow> rows;
    for (int k = 1; k <= m; ++k) {
        std::optional<double> analytic;
        if (spec.analytic != AnalyticMode::off) analytic = closed_form(k);
        rows.push_back({k, analytic, sim.mean[k - 1], sim.std_error[k - 1]});
    }
    return rows;
}

std::vector<SweepRow> compute_sweep(const ExperimentSpec& spec) {
    const double nu = spec.params.response.as_exponential()->nu;
    std::vector<SweepRow> rows;
    for (double v : spec.sweep.values) {
        int n = spec.params.n;
        double lambda = spec.params.lambda, rate = nu;
        switch (spec.sweep.parameter) {
            case SweepParameter::lambda: lambda = v; break;
            case SweepParameter::nu: rate = v; break;
            case SweepParameter::n: n = static_cast<int>(v); break;
        }
        const SystemParams p = SystemParams::make(n, lambda, ResponseDist::exponential(rate));
        const ImprovementRatios ratios = improvement_ratios(p);
        if (spec.sweep.objective == Objective::aoi)
            rows.push_back({v, optimal_k_aoi(p).k_star, ratios.rho_aoi});
        else
            rows.push_back({v, optimal_k_utility(p).k_star, ratios.rho_utility});
    }
    return rows;
}

void compute_bandit(const ExperimentSpec& spec, ExperimentResult& result) {
    const BanditSpec& b = spec.bandit;
    const SystemParams& p = spec.params;

    std::vector<double> means;
    if (p.response.as_exponential()) {
        for (int k = 1; k <= p.n; ++k) means.push_back(expected_utility_exp(p, ReplicationScheme::full(p, k)));
    } else {
        means = estimate_arm_means(p, exponential_utility, b.mc_runs, spec.seeds.front(), spec.threads).mean;
    }

    std::vector<std::uint64_t> checkpoints;
    for (std::uint64_t t = b.record_every; t <= b.horizon; t += b.record_every) checkpoints.push_back(t);
    if (checkpoints.empty() || checkpoints.back() != b.horizon) checkpoints.push_back(b.horizon);

    const std::size_t n_seeds = spec.seeds.size();
    const std::size_t tasks = b.algorithms.size() * n_seeds;
    std::vector<std::vector<BanditRow>> per_task(tasks);

    parallel_for(tasks, resolve_threads(spec.threads), [&](std::size_t i) {
        const Algorithm algorithm = b.algorithms[i / n_seeds];
        const std::uint64_t seed = spec.seeds[i % n_seeds];
        // Same seed gives every algorithm the same request stream and exploration coins.
        BanditEnv env(p, exponential_utility, means, seed);
        RandomSource policy = RandomSource(seed).derive(1);
        const RegretTrace trace = run_algorithm(algorithm, env, b.horizon, b.greedy, policy);
        auto& rows = per_task[i];
        rows.reserve(checkpoints.size());
        for (std::uint64_t t : checkpoints)
            rows.push_back({t, trace.algorithm, seed, trace.arm[t - 1], trace.cum_regret[t - 1]});
    });

    for (auto& rows : per_task) result.bandit.insert(result.bandit.end(), rows.begin(), rows.end());

    for (std::size_t a = 0; a < b.algorithms.size(); ++a) {
        for (std::size_t c = 0; c < checkpoints.size(); ++c) {
            RunningStats stats;
            for (std::size_t s = 0; s < n_seeds; ++s) stats.add(per_task[a * n_seeds + s][c].cum_regret);
            result.bandit_summary.push_back({checkpoints[c], std::string(algorithm_name(b.algorithms[a])), stats.mean,
                                             stats.std_error()});
        }
    }
}

void write_file(const std::string& path, const std::string& content) {
    const std::filesystem::path parent = std::filesystem::path(path).parent_path();
    std::error_code ec;
    if (!parent.empty()) std::filesystem::create_directories(parent, ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << content;
    out.close();
    if (!out) throw IoError("failed writing '" + path + "'");
}

json provenance(const ExperimentSpec& spec) {
    switch (spec.kind) {
        case ExperimentKind::aoi_curve:
        case ExperimentKind::utility_curve:
            return {{"k", "wait count"},
                    {"analytic", spec.analytic == AnalyticMode::off ? "disabled" : "closed form; empty where none exists"},
                    {"simulated", std::string("monte carlo, ") + std::string(name_of(kSamplers, spec.sampler)) +
                                      " AoI sampling, seed " + std::to_string(spec.seeds.front())},
                    {"stderr", "standard error of the simulated mean"}};
        case ExperimentKind::param_sweep:
            return {{"value", std::string("swept ") + std::string(name_of(kSweepParams, spec.sweep.parameter))},
                    {"k_star", "closed form optimal wait count"},
                    {"ratio", "closed form improvement ratio over k = 1"}};
        case ExperimentKind::bandit_compare:
            return {{"cum_regret", "simulated pseudo-regret against closed-form (or estimated) arm means"},
                    {"mean_cum_regret", "mean over seeds"},
                    {"stderr", "standard error over seeds"}};
    }
    return json::object();
}

}  // namespace

ExperimentResult compute_experiment(const ExperimentSpec& spec) {
    spec.validate();
    ExperimentResult result{spec.kind, {}, {}, {}, {}, {}};
    switch (spec.kind) {
        case ExperimentKind::aoi_curve:
        case ExperimentKind::utility_curve: result.curve = compute_curve(spec); break;
        case ExperimentKind::param_sweep: result.sweep = compute_sweep(spec); break;
        case ExperimentKind::bandit_compare: compute_bandit(spec, result); break;
    }
    return result;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    ExperimentResult result = compute_experiment(spec);
    if (spec.output.empty()) return result;

    switch (spec.kind) {
        case ExperimentKind::aoi_curve:
        case ExperimentKind::utility_curve:
            write_file(spec.output, render(curve_table(result.curve), spec.format));
            result.files.push_back(spec.output);
            break;
        case ExperimentKind::param_sweep:
            write_file(spec.output, render(sweep_table(result.sweep), spec.format));
            result.files.push_back(spec.output);
            break;
        case ExperimentKind::bandit_compare: {
            write_file(spec.output, render(bandit_table(result.bandit), spec.format));
            result.files.push_back(spec.output);
            const std::string summary = summary_path(spec.output, spec.format);
            write_file(summary, render(bandit_summary_table(result.bandit_summary), spec.format));
            result.files.push_back(summary);
            break;
        }
    }

    const json manifest = {{"tool", "pullsim"},
                           {"version", version_string()},
                           {"spec", spec_json(spec)},
                           {"outputs", result.files},
                           {"provenance", provenance(spec)}};
    const std::string mpath = manifest_path(spec.output);
    write_file(mpath, manifest.dump(2) + "\n");
    result.files.push_back(mpath);
    return result;
}

}  // namespace pullsim

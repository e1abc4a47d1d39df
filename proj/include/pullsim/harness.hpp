#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pullsim/bandit.hpp"
#include "pullsim/csv.hpp"
#include "pullsim/model.hpp"

namespace pullsim {

enum class ExperimentKind { aoi_curve, utility_curve, param_sweep, bandit_compare };
enum class OutputFormat { csv, json };
enum class SweepParameter { lambda, nu, n };
enum class Objective { aoi, utility };

/// Whether a curve experiment fills the analytic column.
enum class AnalyticMode {
    automatic,  // closed form where one exists, empty field otherwise
    required,   // configuration error when no closed form exists
    off,
};

struct SweepSpec {
    SweepParameter parameter = SweepParameter::lambda;
    std::vector<double> values;  // strictly increasing
    Objective objective = Objective::aoi;
};

struct BanditSpec {
    std::vector<Algorithm> algorithms{std::begin(kAllAlgorithms), std::end(kAllAlgorithms)};
    std::uint64_t horizon = 1000000;
    GreedyConfig greedy;
    /// Trace rows are kept at t = record_every, 2 record_every, ... and at T.
    std::uint64_t record_every = 1000;
    /// Requests used to estimate arm means when no closed form exists.
    std::uint64_t mc_runs = 2000000;
};

struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::aoi_curve;
    SystemParams params = SystemParams::make(20, 1.0, ResponseDist::exponential(5.0));
    int m = 0;  // fan-out for curves; 0 means n
    std::uint64_t runs = 100000;
    std::vector<std::uint64_t> seeds{1};
    AoiSampling sampler = AoiSampling::memoryless;
    double horizon_updates = 1e6;
    AnalyticMode analytic = AnalyticMode::automatic;
    SweepSpec sweep;
    BanditSpec bandit;
    std::string output;  // empty: compute only, write nothing
    OutputFormat format = OutputFormat::csv;
    unsigned threads = 0;

    /// Throws ParameterError (or UnsupportedDistribution) on an invalid spec.
    void validate() const;
};

/// `count` consecutive seeds starting at `base`.
std::vector<std::uint64_t> consecutive_seeds(std::uint64_t base, std::size_t count = 10);

/// The three exponential reference setups with n = 20:
/// 1: lambda = 1, nu = 200; 2: lambda = 1, nu = 5; 3: lambda = 100, nu = 2.
SystemParams reference_setup(int index);
/// Same update rates with response times uniform on [1/(2 nu), 3/(2 nu)].
SystemParams reference_setup_uniform(int index);

struct CurveRow {
    int k;
    std::optional<double> analytic;
    double simulated;
    double std_error;
};

struct SweepRow {
    double value;
    int k_star;
    double ratio;
};

struct BanditRow {
    std::uint64_t t;
    std::string algorithm;
    std::uint64_t seed;
    int arm;
    double cum_regret;
};

struct BanditSummaryRow {
    std::uint64_t t;
    std::string algorithm;
    double mean_cum_regret;
    double std_error;
};

struct ExperimentResult {
    ExperimentKind kind;
    std::vector<CurveRow> curve;
    std::vector<SweepRow> sweep;
    std::vector<BanditRow> bandit;
    std::vector<BanditSummaryRow> bandit_summary;
    std::vector<std::string> files;  // written paths, manifest last
};

/// Computes the experiment without touching the file system.
ExperimentResult compute_experiment(const ExperimentSpec& spec);

/// Computes the experiment and, if spec.output is set, writes the data file(s)
/// and a JSON manifest next to them. Throws IoError if a path is unwritable.
ExperimentResult run_experiment(const ExperimentSpec& spec);

/// Tables in their on-disk column order.
csv::Table curve_table(const std::vector<CurveRow>& rows);
csv::Table sweep_table(const std::vector<SweepRow>& rows);
csv::Table bandit_table(const std::vector<BanditRow>& rows);
csv::Table bandit_summary_table(const std::vector<BanditSummaryRow>& rows);

std::vector<CurveRow> parse_curve_table(const csv::Table& table);
std::vector<SweepRow> parse_sweep_table(const csv::Table& table);

std::string render(const csv::Table& table, OutputFormat format);

std::string spec_to_json(const ExperimentSpec& spec);
ExperimentSpec spec_from_json(std::string_view text);

/// Reads the spec recorded in a manifest file.
ExperimentSpec load_manifest(const std::string& path);

/// Path of the manifest written for a given output path.
std::string manifest_path(const std::string& output);
/// Path of the aggregated regret file of a bandit experiment.
std::string summary_path(const std::string& output, OutputFormat format);

std::string_view kind_name(ExperimentKind kind);
std::string_view version_string();

}  // namespace pullsim

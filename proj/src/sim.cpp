#include "pullsim/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

#include "pullsim/error.hpp"
#include "pullsim/parallel.hpp"

namespace pullsim {

void RunningStats::add(double x) {
    ++count;
    const double d = x - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (x - mean);
}

void RunningStats::merge(const RunningStats& other) {
    if (other.count == 0) return;
    if (count == 0) {
        *this = other;
        return;
    }
    const double na = static_cast<double>(count);
    const double nb = static_cast<double>(other.count);
    const double total = na + nb;
    const double d = other.mean - mean;
    mean += d * nb / total;
    m2 += other.m2 + d * d * na * nb / total;
    count += other.count;
}

double RunningStats::variance() const { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }

double RunningStats::std_error() const {
    return count > 0 ? std::sqrt(variance() / static_cast<double>(count)) : 0.0;
}

unsigned resolve_threads(unsigned requested) {
    unsigned cap = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("PULLSIM_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) cap = static_cast<unsigned>(v);
    }
    return requested == 0 ? cap : std::min(requested, cap);
}

void SimConfig::validate() const {
    params.validate();
    if (runs < 1) throw ParameterError("simulation needs runs >= 1");
    const int fan = fan_out();
    if (fan < 1 || fan > params.n) throw ParameterError("fan-out m must be in [1, n]");
    if (target == EstimatorTarget::utility && !utility) throw ParameterError("utility target needs a utility function");
}

namespace {

SimResult simulate(const SimConfig& config, const SamplingOptions& options) {
    config.validate();
    const int m = config.fan_out();
    const std::uint64_t chunks = (config.runs + kSimChunkRuns - 1) / kSimChunkRuns;
    std::vector<std::vector<RunningStats>> partial(chunks, std::vector<RunningStats>(m));

    const RandomSource root(config.seed);
    parallel_for(chunks, resolve_threads(config.threads), [&](std::size_t c) {
        RandomSource rng = root.derive(c);
        const std::uint64_t begin = c * kSimChunkRuns;
        const std::uint64_t end = std::min(config.runs, begin + kSimChunkRuns);
        auto& stats = partial[c];
        PullSample sample;
        for (std::uint64_t run = begin; run < end; ++run) {
            sample_pull_into(config.params, m, rng, sample, options);
            for (int k = 0; k < m; ++k) {
                switch (config.target) {
                    case EstimatorTarget::aoi: stats[k].add(sample.delta_by_k[k]); break;
                    case EstimatorTarget::utility: stats[k].add(config.utility(sample.delta_by_k[k])); break;
                    case EstimatorTarget::response_time: stats[k].add(sample.response_times[k]); break;
                }
            }
        }
    });

    std::vector<RunningStats> total(m);
    for (const auto& chunk : partial)
        for (int k = 0; k < m; ++k) total[k].merge(chunk[k]);

    SimResult result;
    result.runs = config.runs;
    result.mean.reserve(m);
    result.std_error.reserve(m);
    for (const auto& s : total) {
        result.mean.push_back(s.mean);
        result.std_error.push_back(s.std_error());
    }
    return result;
}

}  // namespace

SimResult run_sim(const SimConfig& config) { return simulate(config, SamplingOptions{}); }

SimResult run_sim_trajectory(const SimConfig& config, double horizon_updates) {
    if (!(horizon_updates > 0.0)) throw ParameterError("trajectory horizon must be positive");
    return simulate(config, SamplingOptions{AoiSampling::trajectory, horizon_updates});
}

ArmMeans estimate_arm_means(const SystemParams& params, const UtilityFn& utility, std::uint64_t runs,
                            std::uint64_t seed, unsigned threads) {
    SimConfig config{params};
    config.runs = runs;
    config.seed = seed;
    config.target = EstimatorTarget::utility;
    config.utility = utility;
    config.threads = threads;
    SimResult r = run_sim(config);
    return {std::move(r.mean), std::move(r.std_error)};
}

}  // namespace pullsim

#pragma once

#include <cstdint>
#include <vector>

#include "pullsim/analytic.hpp"
#include "pullsim/model.hpp"

namespace pullsim {

/// Quantity averaged per wait count k.
enum class EstimatorTarget {
    aoi,            // AoI after k responses
    utility,        // U(AoI after k responses)
    response_time,  // k-th order statistic of the response times
};

struct SimConfig {
    SystemParams params;
    int m = 0;  // fan-out; 0 means all n servers
    std::uint64_t runs = 100000;
    std::uint64_t seed = 1;
    EstimatorTarget target = EstimatorTarget::aoi;
    UtilityFn utility = exponential_utility;
    /// Worker cap; 0 reads PULLSIM_THREADS and otherwise uses the hardware count.
    unsigned threads = 0;

    int fan_out() const { return m == 0 ? params.n : m; }
    void validate() const;
};

struct SimResult {
    std::vector<double> mean;       // entry k-1 for k = 1..m
    std::vector<double> std_error;  // standard error of each mean
    std::uint64_t runs = 0;
};

/// Running mean and variance (Welford). Merging is exact in the sense of
/// Chan et al., and the pooled result depends only on the merge order.
struct RunningStats {
    std::uint64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x);
    void merge(const RunningStats& other);
    double variance() const;  // unbiased
    double std_error() const;
};

/// Runs are processed in fixed-size chunks, each with its own stream derived
/// from (seed, chunk index). Results are identical for any worker count.
inline constexpr std::uint64_t kSimChunkRuns = 4096;

/// Monte Carlo over `runs` requests. Every request contributes to every k,
/// since one sample fixes the AoI for all wait counts at once.
SimResult run_sim(const SimConfig& config);

/// As run_sim, with each server's AoI read off an explicit Poisson update
/// trajectory at a request time uniform on [0, horizon_updates / lambda].
SimResult run_sim_trajectory(const SimConfig& config, double horizon_updates = 1e6);

struct ArmMeans {
    std::vector<double> mean;
    std::vector<double> std_error;
};

/// Monte Carlo mean utility of every arm k = 1..n, for bandit regret accounting.
ArmMeans estimate_arm_means(const SystemParams& params, const UtilityFn& utility, std::uint64_t runs,
                            std::uint64_t seed = 1, unsigned threads = 0);

/// Worker count after applying PULLSIM_THREADS (0 = auto) and `requested`.
unsigned resolve_threads(unsigned requested);

}  // namespace pullsim

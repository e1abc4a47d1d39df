#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "pullsim/random.hpp"

namespace pullsim {

struct Exponential {
    double nu;  // rate; mean response time is 1/nu
};

/// Uniform on [a, a + h].
struct Uniform {
    double a;
    double h;
};

/// Erlang: sum of r exponentials, each with mean theta.
struct Gamma {
    int r;
    double theta;
};

/// Response-time distribution of a single server.
class ResponseDist {
public:
    using Family = std::variant<Exponential, Uniform, Gamma>;

    static ResponseDist exponential(double nu);
    static ResponseDist uniform(double a, double h);
    static ResponseDist gamma(int r, double theta);

    const Family& family() const noexcept { return family_; }
    const Exponential* as_exponential() const noexcept { return std::get_if<Exponential>(&family_); }
    const Uniform* as_uniform() const noexcept { return std::get_if<Uniform>(&family_); }
    const Gamma* as_gamma() const noexcept { return std::get_if<Gamma>(&family_); }

    double mean() const noexcept;
    double sample(RandomSource& rng) const;

    /// Short family name: "exponential", "uniform" or "gamma".
    std::string name() const;

private:
    explicit ResponseDist(Family f) : family_(f) {}
    Family family_;
};

/// The system being queried: n statistically identical servers, each updated
/// by a Poisson process of rate lambda.
struct SystemParams {
    int n;
    double lambda;
    ResponseDist response;

    /// Throws ParameterError unless n >= 1 and lambda > 0.
    static SystemParams make(int n, double lambda, ResponseDist response);
    void validate() const;
};

/// Fan-out m and wait count k. The plain (n, k) scheme is m = n.
struct ReplicationScheme {
    int m;
    int k;

    static ReplicationScheme full(const SystemParams& params, int k) { return {params.n, k}; }
    /// Throws ParameterError unless 1 <= k <= m <= n.
    void validate(const SystemParams& params) const;
};

/// One request's realization over m servers, ordered by response time.
struct PullSample {
    std::vector<double> response_times;  // R_(1) <= ... <= R_(m)
    std::vector<double> aoi_at_request;   // AoI at request time, aligned with response_times
    std::vector<double> delta_by_k;       // entry k-1 is the user-side AoI after k responses

    std::size_t size() const noexcept { return response_times.size(); }
    /// min(aoi_at_request[0..k)).
    double freshest_aoi(std::size_t k) const;
};

/// How the per-server AoI at the request instant is drawn.
enum class AoiSampling {
    /// Draw it as Exp(lambda) directly. Exact by memorylessness.
    memoryless,
    /// Walk an explicit Poisson update trajectory up to a uniform request time.
    trajectory,
};

struct SamplingOptions {
    AoiSampling aoi = AoiSampling::memoryless;
    /// Trajectory only: the request time is uniform on [0, horizon_updates / lambda].
    double horizon_updates = 1e6;
};

/// Pairs response draws with AoI draws, sorts the pairs by response time and
/// fills delta_by_k. Both spans must have the same nonzero length.
PullSample assemble_pull(std::span<const double> response_draws, std::span<const double> aoi_draws);

/// Draws one request over scheme.m servers. The m contacted servers are
/// i.i.d., so choosing which m of the n servers are contacted has no effect on
/// the distribution and no subset is drawn.
PullSample sample_pull(const SystemParams& params, const ReplicationScheme& scheme, RandomSource& rng,
                       const SamplingOptions& options = {});

/// Allocation-free variant for hot loops. Draws over m servers into `out`,
/// reusing its buffers. m must be in [1, params.n].
void sample_pull_into(const SystemParams& params, int m, RandomSource& rng, PullSample& out,
                      const SamplingOptions& options = {});

double sample_erlang(int r, double theta, RandomSource& rng);

struct TrajectoryDraw {
    double aoi;                 // request_time minus the last update at or before it
    std::uint64_t updates = 0;  // updates in (0, request_time]
};

/// Simulates one server's Poisson update process from time 0, where an
/// initial update is assumed, up to request_time. Memory is constant.
TrajectoryDraw sample_aoi_trajectory(double lambda, double request_time, RandomSource& rng);

/// Number of Poisson(lambda) updates in (0, duration], by explicit stepping.
std::uint64_t count_updates(double lambda, double duration, RandomSource& rng);

}  // namespace pullsim

#include "pullsim/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "pullsim/error.hpp"

namespace pullsim {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Stable insertion sort by response time. m is small (tens of servers).
void sort_by_response(std::vector<std::pair<double, double>>& pairs) {
    for (std::size_t i = 1; i < pairs.size(); ++i) {
        auto cur = pairs[i];
        std::size_t j = i;
        while (j > 0 && pairs[j - 1].first > cur.first) {
            pairs[j] = pairs[j - 1];
            --j;
        }
        pairs[j] = cur;
    }
}

void fill_from_pairs(const std::vector<std::pair<double, double>>& pairs, PullSample& out) {
    const std::size_t m = pairs.size();
    out.response_times.resize(m);
    out.aoi_at_request.resize(m);
    out.delta_by_k.resize(m);
    double freshest = pairs.empty() ? 0.0 : pairs[0].second;
    for (std::size_t i = 0; i < m; ++i) {
        out.response_times[i] = pairs[i].first;
        out.aoi_at_request[i] = pairs[i].second;
        freshest = std::min(freshest, pairs[i].second);
        out.delta_by_k[i] = pairs[i].first + freshest;
    }
}

}  // namespace

ResponseDist ResponseDist::exponential(double nu) {
    if (!(nu > 0.0) || !std::isfinite(nu)) throw ParameterError("exponential response rate nu must be positive");
    return ResponseDist(Exponential{nu});
}

ResponseDist ResponseDist::uniform(double a, double h) {
    if (!(a >= 0.0) || !(h >= 0.0) || !std::isfinite(a) || !std::isfinite(h))
        throw ParameterError("uniform response bounds need a >= 0 and h >= 0");
    return ResponseDist(Uniform{a, h});
}

ResponseDist ResponseDist::gamma(int r, double theta) {
    if (r < 1) throw ParameterError("gamma response shape r must be >= 1");
    if (!(theta > 0.0) || !std::isfinite(theta)) throw ParameterError("gamma response scale theta must be positive");
    return ResponseDist(Gamma{r, theta});
}

double ResponseDist::mean() const noexcept {
    return std::visit(overloaded{
                          [](const Exponential& e) { return 1.0 / e.nu; },
                          [](const Uniform& u) { return u.a + u.h / 2.0; },
                          [](const Gamma& g) { return g.r * g.theta; },
                      },
                      family_);
}

double ResponseDist::sample(RandomSource& rng) const {
    return std::visit(overloaded{
                          [&](const Exponential& e) { return rng.exponential(e.nu); },
                          [&](const Uniform& u) { return u.a + u.h * rng.uniform(); },
                          [&](const Gamma& g) { return sample_erlang(g.r, g.theta, rng); },
                      },
                      family_);
}

std::string ResponseDist::name() const {
    return std::visit(overloaded{
                          [](const Exponential&) { return std::string("exponential"); },
                          [](const Uniform&) { return std::string("uniform"); },
                          [](const Gamma&) { return std::string("gamma"); },
                      },
                      family_);
}

SystemParams SystemParams::make(int n, double lambda, ResponseDist response) {
    SystemParams p{n, lambda, response};
    p.validate();
    return p;
}

void SystemParams::validate() const {
    if (n < 1) throw ParameterError("number of servers n must be >= 1");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ParameterError("update rate lambda must be positive");
}

void ReplicationScheme::validate(const SystemParams& params) const {
    if (!(1 <= k && k <= m && m <= params.n))
        throw ParameterError("replication scheme needs 1 <= k <= m <= n (got m=" + std::to_string(m) +
                             ", k=" + std::to_string(k) + ", n=" + std::to_string(params.n) + ")");
}

double PullSample::freshest_aoi(std::size_t k) const {
    double best = aoi_at_request.at(0);
    for (std::size_t i = 1; i < k; ++i) best = std::min(best, aoi_at_request.at(i));
    return best;
}

PullSample assemble_pull(std::span<const double> response_draws, std::span<const double> aoi_draws) {
    if (response_draws.empty() || response_draws.size() != aoi_draws.size())
        throw ParameterError("response and AoI draws must be non-empty and of equal length");
    std::vector<std::pair<double, double>> pairs(response_draws.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) pairs[i] = {response_draws[i], aoi_draws[i]};
    sort_by_response(pairs);
    PullSample out;
    fill_from_pairs(pairs, out);
    return out;
}

void sample_pull_into(const SystemParams& params, int m, RandomSource& rng, PullSample& out,
                      const SamplingOptions& options) {
    thread_local std::vector<std::pair<double, double>> pairs;
    pairs.resize(static_cast<std::size_t>(m));

    // Responses first, then AoIs, so the response stream is the same under both samplers.
    for (auto& p : pairs) p.first = params.response.sample(rng);
    if (options.aoi == AoiSampling::memoryless) {
        for (auto& p : pairs) p.second = rng.exponential(params.lambda);
    } else {
        const double request_time = rng.uniform() * options.horizon_updates / params.lambda;
        for (auto& p : pairs) p.second = sample_aoi_trajectory(params.lambda, request_time, rng).aoi;
    }
    sort_by_response(pairs);
    fill_from_pairs(pairs, out);
}

PullSample sample_pull(const SystemParams& params, const ReplicationScheme& scheme, RandomSource& rng,
                       const SamplingOptions& options) {
    params.validate();
    scheme.validate(params);
    PullSample out;
    sample_pull_into(params, scheme.m, rng, out, options);
    return out;
}

double sample_erlang(int r, double theta, RandomSource& rng) {
    if (r < 1) throw ParameterError("erlang shape r must be >= 1");
    if (!(theta > 0.0)) throw ParameterError("erlang scale theta must be positive");
    double sum = 0.0;
    for (int i = 0; i < r; ++i) sum += rng.exponential(1.0 / theta);
    return sum;
}

TrajectoryDraw sample_aoi_trajectory(double lambda, double request_time, RandomSource& rng) {
    double last = 0.0;
    std::uint64_t updates = 0;
    for (;;) {
        const double next = last + rng.exponential(lambda);
        if (next > request_time) break;
        last = next;
        ++updates;
    }
    return {request_time - last, updates};
}

std::uint64_t count_updates(double lambda, double duration, RandomSource& rng) {
    return sample_aoi_trajectory(lambda, duration, rng).updates;
}

}  // namespace pullsim

// Randomized property suites. Each runs at least 1000 generated cases.
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "pullsim/analytic.hpp"
#include "pullsim/bandit.hpp"
#include "pullsim/model.hpp"

using namespace pullsim;

namespace {

constexpr int kCases = 2000;

SystemParams random_exp(oracle::ParamGen& g, int max_n = 200) {
    return SystemParams::make(g.integer(2, max_n), g.log_uniform(1e-3, 1e3),
                              ResponseDist::exponential(g.log_uniform(1e-3, 1e3)));
}

ResponseDist random_response(oracle::ParamGen& g) {
    switch (g.integer(0, 2)) {
        case 0: return ResponseDist::exponential(g.log_uniform(1e-2, 1e2));
        case 1: return ResponseDist::uniform(g.uniform(0.0, 2.0), g.uniform(0.0, 2.0));
        default: return ResponseDist::gamma(g.integer(1, 6), g.log_uniform(1e-2, 1.0));
    }
}

}  // namespace

TEST_CASE("pull samples: sorted responses, nonincreasing freshness, exact decomposition") {
    oracle::ParamGen g(101);
    for (int c = 0; c < kCases; ++c) {
        const int n = g.integer(1, 40);
        const auto p = SystemParams::make(n, g.log_uniform(1e-2, 1e2), random_response(g));
        const int m = g.integer(1, n);
        RandomSource rng(g.engine()());
        const PullSample s = sample_pull(p, {m, 1}, rng);
        REQUIRE(s.size() == static_cast<std::size_t>(m));
        double prefix = s.aoi_at_request[0];
        for (int k = 1; k <= m; ++k) {
            prefix = std::min(prefix, s.aoi_at_request[k - 1]);
            REQUIRE(s.response_times[k - 1] >= 0.0);
            if (k > 1) {
                REQUIRE(s.response_times[k - 1] >= s.response_times[k - 2]);
                REQUIRE(s.freshest_aoi(k) <= s.freshest_aoi(k - 1));
            }
            REQUIRE(s.freshest_aoi(k) == prefix);
            REQUIRE(s.delta_by_k[k - 1] == s.response_times[k - 1] + prefix);
        }
    }
}

TEST_CASE("AoI increment is increasing in k and changes sign at most once") {
    oracle::ParamGen g(202);
    for (int c = 0; c < kCases; ++c) {
        const SystemParams p = random_exp(g);
        const double lambda = p.lambda, nu = p.response.as_exponential()->nu;
        int sign_changes = 0;
        for (int k = 1; k < p.n; ++k) {
            const double d = oracle::aoi_increment(p.n, lambda, nu, k);
            const double lib = expected_aoi(p, {p.n, k + 1}) - expected_aoi(p, {p.n, k});
            REQUIRE(lib == doctest::Approx(d).epsilon(1e-6).scale(1.0 / (p.n * nu) + 1.0 / lambda));
            if (k > 1) {
                const double prev = oracle::aoi_increment(p.n, lambda, nu, k - 1);
                REQUIRE(d > prev);
                sign_changes += (prev < 0.0) != (d < 0.0);
            }
        }
        REQUIRE(sign_changes <= 1);
    }
}

TEST_CASE("AoI boundary flags match the sign of the increment") {
    oracle::ParamGen g(303);
    for (int c = 0; c < kCases; ++c) {
        const SystemParams p = random_exp(g, 60);
        const double lambda = p.lambda, nu = p.response.as_exponential()->nu;
        const BoundaryFlags f = boundary_aoi(p);
        REQUIRE(f.wait_one == (oracle::aoi_increment(p.n, lambda, nu, 1) >= 0.0));
        REQUIRE(f.wait_all == (oracle::aoi_increment(p.n, lambda, nu, p.n - 1) <= 0.0));
    }
}

TEST_CASE("utility ratio is decreasing and marks where utility grows") {
    oracle::ParamGen g(404);
    for (int c = 0; c < kCases; ++c) {
        const SystemParams p = random_exp(g, 100);
        const double lambda = p.lambda, nu = p.response.as_exponential()->nu;
        for (int k = 1; k < p.n; ++k) {
            const double r = oracle::utility_ratio(p.n, lambda, nu, k);
            if (k > 1) REQUIRE(r < oracle::utility_ratio(p.n, lambda, nu, k - 1));
            const double uk = expected_utility_exp(p, {p.n, k}), uk1 = expected_utility_exp(p, {p.n, k + 1});
            REQUIRE(uk1 / uk == doctest::Approx(r).epsilon(1e-9));
            if (std::abs(r - 1.0) > 1e-9) REQUIRE((r > 1.0) == (uk1 > uk));
        }
    }
}

TEST_CASE("utility boundary flags match the ratio at the ends") {
    oracle::ParamGen g(505);
    for (int c = 0; c < kCases; ++c) {
        const SystemParams p = random_exp(g, 60);
        const double lambda = p.lambda, nu = p.response.as_exponential()->nu;
        const BoundaryFlags f = boundary_utility(p);
        REQUIRE(f.wait_one == (oracle::utility_ratio(p.n, lambda, nu, 1) <= 1.0));
        REQUIRE(f.wait_all == (oracle::utility_ratio(p.n, lambda, nu, p.n - 1) >= 1.0));
    }
}

TEST_CASE("optimal k agrees with brute force") {
    oracle::ParamGen g(606);
    for (int c = 0; c < kCases; ++c) {
        const SystemParams p = random_exp(g, 50);
        const double lambda = p.lambda, nu = p.response.as_exponential()->nu;
        const auto aoi_set = oracle::argmin_set(p.n, [&](int k) { return oracle::aoi_exp(p.n, lambda, nu, k); }, 1e-13);
        const auto util_set = oracle::argmax_set(p.n, [&](int k) { return oracle::utility_exp(p.n, lambda, nu, k); }, 1e-13);
        const OptimalK ka = optimal_k_aoi(p), ku = optimal_k_utility(p);
        REQUIRE(std::find(aoi_set.begin(), aoi_set.end(), ka.k_star) != aoi_set.end());
        REQUIRE(std::find(util_set.begin(), util_set.end(), ku.k_star) != util_set.end());
    }
}

TEST_CASE("AoI density weights and mean") {
    oracle::ParamGen g(707);
    int checked = 0;
    while (checked < kCases) {
        const auto p = SystemParams::make(g.integer(1, 30), g.log_uniform(1e-1, 1e1),
                                          ResponseDist::exponential(g.log_uniform(1e-1, 1e1)));
        const int k = g.integer(1, p.n);
        HyperexpDensity d;
        try {
            d = hyperexp_density(p, k);
        } catch (const std::domain_error&) {
            continue;
        }
        ++checked;
        const double sum = std::accumulate(d.weights.begin(), d.weights.end(), 0.0);
        const double scale = std::accumulate(d.weights.begin(), d.weights.end(), 0.0,
                                             [](double a, double w) { return a + std::abs(w); });
        // Weights can be large with alternating signs; the sum is exact up to cancellation.
        REQUIRE(std::abs(sum - 1.0) <= 1e-9 * std::max(1.0, scale));
        if (scale < 1e6) {
            REQUIRE(std::abs(sum - 1.0) < 1e-9);
            REQUIRE(d.mean() == doctest::Approx(oracle::aoi_exp(p.n, p.lambda, p.response.as_exponential()->nu, k))
                                    .epsilon(1e-9));
        }
    }
}

TEST_CASE("every step reveals exactly arms 1..k from one request") {
    oracle::ParamGen g(808);
    for (int c = 0; c < kCases; ++c) {
        const int n = g.integer(1, 30);
        const auto p = SystemParams::make(n, g.log_uniform(1e-2, 1e2), random_response(g));
        const std::vector<double> means(static_cast<std::size_t>(n), 0.5);
        BanditEnv env(p, exponential_utility, means, g.engine()());
        const int arm = g.integer(1, n);
        const ObservationSet& obs = env.step(arm);
        REQUIRE(obs.played_arm == arm);
        REQUIRE(obs.rewards.size() == static_cast<std::size_t>(arm));
        const PullSample& s = env.last_sample();
        REQUIRE(s.size() == static_cast<std::size_t>(n));
        for (int j = 1; j <= arm; ++j) {
            const double expected = std::exp(-(s.response_times[j - 1] + s.freshest_aoi(j)));
            REQUIRE(obs.reward_of(j) == doctest::Approx(expected).epsilon(1e-12));
            REQUIRE(obs.reward_of(j) >= 0.0);
            REQUIRE(obs.reward_of(j) <= 1.0);
        }
        REQUIRE_THROWS(obs.reward_of(arm + 1));
    }
}

TEST_CASE("arm statistics replay") {
    oracle::ParamGen g(909);
    for (int c = 0; c < kCases; ++c) {
        const int n = g.integer(1, 12);
        ArmStats stats(n);
        std::vector<std::vector<double>> log(static_cast<std::size_t>(n));
        const int rounds = g.integer(1, 60);
        for (int t = 0; t < rounds; ++t) {
            const int arm = g.integer(1, n);
            if (g.uniform(0, 1) < 0.5) {
                const double x = g.uniform(0, 1);
                stats.record(arm, x);
                log[arm - 1].push_back(x);
            } else {
                ObservationSet obs{arm, {}};
                for (int j = 1; j <= arm; ++j) {
                    obs.rewards.push_back(g.uniform(0, 1));
                    log[j - 1].push_back(obs.rewards.back());
                }
                stats.record_all(obs);
            }
        }
        for (int k = 1; k <= n; ++k) {
            const auto& xs = log[k - 1];
            REQUIRE(stats.count(k) == xs.size());
            const double mean = xs.empty() ? 0.0 : std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
            REQUIRE(stats.mean(k) == doctest::Approx(mean).epsilon(1e-12));
            if (!xs.empty()) {
                REQUIRE(stats.mean(k) >= 0.0);
                REQUIRE(stats.mean(k) <= 1.0);
            }
        }
    }
}

TEST_CASE("elimination set follows the strict confidence-bound rule") {
    oracle::ParamGen g(1010);
    int eliminated_total = 0;
    for (int c = 0; c < kCases; ++c) {
        const int n = g.integer(2, 15);
        ArmStats stats(n);
        for (int k = 1; k <= n; ++k) {
            const int samples = g.integer(0, 200);
            const double mu = g.uniform(0, 1);
            for (int i = 0; i < samples; ++i) stats.record(k, std::clamp(mu + g.uniform(-0.05, 0.05), 0.0, 1.0));
        }
        std::vector<int> active;
        for (int k = 1; k <= n; ++k)
            if (g.uniform(0, 1) < 0.8) active.push_back(k);
        if (active.empty()) active.push_back(n);
        const std::uint64_t T = static_cast<std::uint64_t>(g.log_uniform(10, 1e7));
        const double delta = std::ldexp(1.0, -g.integer(0, 5));
        const double logterm = std::log(static_cast<double>(T) * delta * delta);

        // Brute-force rule, written out independently.
        auto radius = [&](int k) { return std::sqrt(logterm / (2.0 * static_cast<double>(stats.count(k)))); };
        double best_lcb = -INFINITY;
        for (int k : active)
            if (stats.count(k) > 0) best_lcb = std::max(best_lcb, stats.mean(k) - radius(k));
        std::vector<int> expected;
        for (int k : active)
            if (stats.count(k) > 0 && stats.mean(k) + radius(k) < best_lcb) expected.push_back(k);

        const std::vector<int> got = elimination_set(stats, active, T, delta);
        REQUIRE(got == expected);
        eliminated_total += static_cast<int>(got.size());
    }
    CHECK(eliminated_total > 0);
}

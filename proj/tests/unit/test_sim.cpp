#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "oracles.hpp"
#include "pullsim/error.hpp"
#include "pullsim/sim.hpp"

using namespace pullsim;

namespace {

SimConfig config_for(double lambda, double nu, std::uint64_t runs, std::uint64_t seed = 1) {
    SimConfig c{SystemParams::make(20, lambda, ResponseDist::exponential(nu))};
    c.runs = runs;
    c.seed = seed;
    return c;
}

}  // namespace

TEST_CASE("running statistics") {
    RunningStats all, a, b;
    oracle::ParamGen gen(3);
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double x = gen.uniform(-5.0, 9.0);
        all.add(x);
        (i < 377 ? a : b).add(x);
        s += x;
        s2 += x * x;
    }
    a.merge(b);
    const double mean = s / 1000.0, var = (s2 - 1000.0 * mean * mean) / 999.0;
    CHECK(all.mean == doctest::Approx(mean).epsilon(1e-12));
    CHECK(all.variance() == doctest::Approx(var).epsilon(1e-10));
    CHECK(a.count == 1000);
    CHECK(a.mean == doctest::Approx(all.mean).epsilon(1e-12));
    CHECK(a.variance() == doctest::Approx(all.variance()).epsilon(1e-10));

    RunningStats empty;
    CHECK(empty.std_error() == 0.0);
    empty.merge(all);
    CHECK(empty.mean == all.mean);
}

TEST_CASE("config validation") {
    SimConfig c = config_for(1.0, 5.0, 0);
    CHECK_THROWS_AS(run_sim(c), ParameterError);
    c.runs = 10;
    c.m = 21;
    CHECK_THROWS_AS(run_sim(c), ParameterError);
    c.m = 0;
    c.target = EstimatorTarget::utility;
    c.utility = nullptr;
    CHECK_THROWS_AS(run_sim(c), ParameterError);
    CHECK_THROWS_AS(run_sim_trajectory(config_for(1, 1, 10), 0.0), ParameterError);
}

TEST_CASE("setup with fast responses: curve matches and decreases up to its optimum") {
    const SimConfig c = config_for(1.0, 200.0, 100000);
    const SimResult r = run_sim(c);
    REQUIRE(r.mean.size() == 20);
    CHECK(r.runs == 100000);
    for (int k = 1; k <= 20; ++k) {
        CAPTURE(k);
        CHECK(r.mean[k - 1] == doctest::Approx(oracle::aoi_exp(20, 1.0, 200.0, k)).epsilon(0.02));
        CHECK(r.std_error[k - 1] >= 0.0);
    }
    // The exact optimum here is k = 19, so the curve falls until then.
    for (int k = 1; k < 19; ++k) CHECK(r.mean[k] < r.mean[k - 1]);
}

TEST_CASE("setup with frequent updates: curve increases") {
    const SimResult r = run_sim(config_for(100.0, 2.0, 100000));
    for (int k = 1; k <= 20; ++k)
        CHECK(r.mean[k - 1] == doctest::Approx(oracle::aoi_exp(20, 100.0, 2.0, k)).epsilon(0.02));
    for (int k = 1; k < 20; ++k) CHECK(r.mean[k] > r.mean[k - 1]);
}

TEST_CASE("interior minimum near the closed-form optimum") {
    const SimResult r = run_sim(config_for(1.0, 5.0, 100000));
    int best = 1;
    for (int k = 2; k <= 20; ++k)
        if (r.mean[k - 1] < r.mean[best - 1]) best = k;
    CHECK(best >= 7);
    CHECK(best <= 9);
}

TEST_CASE("utility target matches the closed form") {
    SimConfig c = config_for(1.0, 5.0, 100000);
    c.target = EstimatorTarget::utility;
    const SimResult r = run_sim(c);
    for (int k = 1; k <= 20; ++k)
        CHECK(r.mean[k - 1] == doctest::Approx(oracle::utility_exp(20, 1.0, 5.0, k)).epsilon(0.02));
}

TEST_CASE("uniform responses: AoI and order statistics") {
    SimConfig c{SystemParams::make(20, 1.0, ResponseDist::uniform(0.1, 0.2))};
    c.runs = 100000;
    const SimResult aoi = run_sim(c);
    c.target = EstimatorTarget::response_time;
    const SimResult resp = run_sim(c);
    for (int k = 1; k <= 20; ++k) {
        CAPTURE(k);
        CHECK(aoi.mean[k - 1] == doctest::Approx(oracle::aoi_uniform(20, 1.0, 0.1, 0.2, k)).epsilon(0.02));
        CHECK(resp.mean[k - 1] == doctest::Approx(0.1 + k * 0.2 / 21.0).epsilon(0.02));
    }
}

TEST_CASE("partial fan-out uses m in place of n") {
    SimConfig c = config_for(1.0, 5.0, 100000);
    c.m = 8;
    const SimResult r = run_sim(c);
    REQUIRE(r.mean.size() == 8);
    for (int k = 1; k <= 8; ++k) CHECK(r.mean[k - 1] == doctest::Approx(oracle::aoi_exp(8, 1.0, 5.0, k)).epsilon(0.02));
}

TEST_CASE("gamma responses run through the simulator") {
    SimConfig c{SystemParams::make(10, 1.0, ResponseDist::gamma(5, 0.04))};
    c.runs = 20000;
    c.target = EstimatorTarget::response_time;
    const SimResult r = run_sim(c);
    double mean = 0.0;
    for (double x : r.mean) mean += x;
    // The average of all order statistics is the plain mean r theta.
    CHECK(mean / 10.0 == doctest::Approx(0.2).epsilon(0.02));
}

TEST_CASE("results do not depend on the worker count") {
    ::setenv("PULLSIM_THREADS", "4", 1);
    SimConfig c = config_for(1.0, 5.0, 30000, 9);
    c.threads = 1;
    const SimResult one = run_sim(c);
    c.threads = 4;
    const SimResult four = run_sim(c);
    CHECK(one.mean == four.mean);
    CHECK(one.std_error == four.std_error);
    const SimResult again = run_sim(c);
    CHECK(again.mean == four.mean);
    ::unsetenv("PULLSIM_THREADS");
}

TEST_CASE("standard error shrinks as one over the square root of runs") {
    const SimResult small = run_sim(config_for(1.0, 5.0, 20000, 3));
    const SimResult large = run_sim(config_for(1.0, 5.0, 80000, 4));
    for (int k = 1; k <= 20; ++k) {
        CAPTURE(k);
        CHECK(small.std_error[k - 1] / large.std_error[k - 1] == doctest::Approx(2.0).epsilon(0.2));
    }
}

TEST_CASE("trajectory sampler agrees with the memoryless shortcut") {
    SimConfig c = config_for(1.0, 5.0, 20000, 5);
    const SimResult fast = run_sim(c);
    c.seed = 6;
    const SimResult traj = run_sim_trajectory(c, 200.0);
    for (int k = 1; k <= 20; ++k) {
        CAPTURE(k);
        const double tol = 3.0 * std::hypot(fast.std_error[k - 1], traj.std_error[k - 1]);
        CHECK(std::abs(fast.mean[k - 1] - traj.mean[k - 1]) <= tol);
    }
    const SimResult again = run_sim_trajectory(c, 200.0);
    CHECK(again.mean == traj.mean);
}

TEST_CASE("arm mean estimates") {
    const auto p = SystemParams::make(20, 1.0, ResponseDist::exponential(5.0));
    const ArmMeans est = estimate_arm_means(p, exponential_utility, 200000, 2);
    for (int k = 1; k <= 20; ++k) {
        CAPTURE(k);
        CHECK(est.std_error[k - 1] < 1e-3);
        CHECK(std::abs(est.mean[k - 1] - oracle::utility_exp(20, 1.0, 5.0, k)) <= 3.0 * est.std_error[k - 1]);
    }
    int peak = 1;
    for (int k = 2; k <= 20; ++k)
        if (est.mean[k - 1] > est.mean[peak - 1]) peak = k;
    CHECK(std::abs(peak - 8) <= 1);

    const ArmMeans ones = estimate_arm_means(p, [](double) { return 1.0; }, 1000);
    for (double m : ones.mean) CHECK(m == 1.0);
}

TEST_CASE("thread cap from the environment") {
    ::setenv("PULLSIM_THREADS", "2", 1);
    CHECK(resolve_threads(0) == 2);
    CHECK(resolve_threads(1) == 1);
    CHECK(resolve_threads(8) == 2);
    ::setenv("PULLSIM_THREADS", "0", 1);
    CHECK(resolve_threads(3) >= 1);
    ::unsetenv("PULLSIM_THREADS");
}

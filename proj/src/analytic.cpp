#include "pullsim/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "pullsim/error.hpp"

namespace pullsim {

namespace {

const Exponential& require_exponential(const SystemParams& params, const char* what) {
    params.validate();
    const Exponential* e = params.response.as_exponential();
    if (!e)
        throw UnsupportedDistribution(std::string(what) + " has no closed form for " + params.response.name() +
                                      " response times; use the simulator");
    return *e;
}

// Positive root of a*k^2 + b*k - c = 0 written without cancellation.
double positive_root(double a, double b, double c) { return 2.0 * c / (std::sqrt(b * b + 4.0 * a * c) + b); }

constexpr double kTieTol = 1e-12;

// Sign of a*k^2 + b*k - c, with residuals within kTieTol of zero reported as 0.
int quadratic_sign(double a, double b, double c, double k) {
    const double residual = a * k * k + b * k - c;
    const double scale = a * k * k + b * k + c;
    if (std::abs(residual) <= kTieTol * scale) return 0;
    return residual > 0.0 ? 1 : -1;
}

// Both optimal-k results share one shape: the stationary point of a quadratic
// a*k^2 + b*k - c decides the optimum, capped at n.
OptimalK optimal_from_quadratic(double a, double b, double c, int n) {
    const double root = positive_root(a, b, c);
    const double nearest = std::round(root);
    if (nearest >= 1.0 && nearest <= n - 1 && quadratic_sign(a, b, c, nearest) == 0)
        return {static_cast<int>(nearest), true};
    const double up = std::ceil(root);
    if (up >= n) return {n, false};
    return {std::max(1, static_cast<int>(up)), false};
}

// k = 1 is optimal iff the stationary quadratic is nonnegative at k = 1, and
// k = n iff it is nonpositive at n - 1. For AoI these reduce to
// lambda >= nu (n - 1) / 2 and lambda <= nu / (n (n - 1)); for utility to
// lambda >= nu (n - 1) / 2 - 1/2 and lambda <= nu / (n (n - 1)) - 1/n.
// Evaluating the quadratic keeps exact ties consistent with optimal_k_*.
BoundaryFlags boundary_from_quadratic(double a, double b, double c, int n) {
    if (n == 1) return {true, true};
    return {quadratic_sign(a, b, c, 1.0) >= 0, quadratic_sign(a, b, c, n - 1.0) <= 0};
}

}  // namespace

double exponential_utility(double aoi) { return std::exp(-aoi); }

double harmonic(int n) {
    double sum = 0.0;
    // Smallest terms first.
    for (int l = n; l >= 1; --l) sum += 1.0 / l;
    return sum;
}

double expected_order_statistic_exp(double nu, int m, int k) {
    double sum = 0.0;
    for (int j = k; j >= 1; --j) sum += 1.0 / (m + 1 - j);
    return sum / nu;
}

double expected_aoi(const SystemParams& params, const ReplicationScheme& scheme) {
    const Exponential& e = require_exponential(params, "expected AoI");
    scheme.validate(params);
    return (harmonic(scheme.m) - harmonic(scheme.m - scheme.k)) / e.nu + 1.0 / (scheme.k * params.lambda);
}

double expected_aoi_uniform(const SystemParams& params, const ReplicationScheme& scheme) {
    params.validate();
    const Uniform* u = params.response.as_uniform();
    if (!u) throw UnsupportedDistribution("uniform AoI formula requires uniform response times");
    scheme.validate(params);
    if (scheme.m != params.n)
        throw UnsupportedDistribution("uniform AoI closed form needs full fan-out (m == n); use the simulator");
    return scheme.k * u->h / (params.n + 1) + u->a + 1.0 / (scheme.k * params.lambda);
}

double expected_aoi_closed_form(const SystemParams& params, const ReplicationScheme& scheme) {
    if (params.response.as_uniform()) return expected_aoi_uniform(params, scheme);
    return expected_aoi(params, scheme);
}

double expected_utility_exp(const SystemParams& params, const ReplicationScheme& scheme) {
    const Exponential& e = require_exponential(params, "expected utility");
    scheme.validate(params);
    const double kl = scheme.k * params.lambda;
    double value = kl / (kl + 1.0);
    for (int j = 1; j <= scheme.k; ++j) {
        const double rate = (scheme.m + 1 - j) * e.nu;
        value *= rate / (rate + 1.0);
    }
    return value;
}

OptimalK optimal_k_aoi(const SystemParams& params) {
    const Exponential& e = require_exponential(params, "optimal k");
    // lambda k^2 + (lambda + nu) k - n nu = 0 at the stationary point.
    return optimal_from_quadratic(params.lambda, params.lambda + e.nu, params.n * e.nu, params.n);
}

OptimalK optimal_k_utility(const SystemParams& params) {
    const Exponential& e = require_exponential(params, "optimal k");
    return optimal_from_quadratic(params.lambda, params.lambda + e.nu + 1.0, params.n * e.nu, params.n);
}

int optimal_k_aoi_uniform(const SystemParams& params) {
    params.validate();
    const Uniform* u = params.response.as_uniform();
    if (!u) throw UnsupportedDistribution("uniform optimal k requires uniform response times");
    // Constant response time: only the freshness term varies and it decreases in k.
    if (u->h == 0.0) return params.n;
    const double hl = u->h * params.lambda;
    const double root = 2.0 * (params.n + 1) / (std::sqrt(hl * hl + 4.0 * hl * (params.n + 1)) + hl);
    const double up = std::ceil(root);
    if (up >= params.n) return params.n;
    return std::max(1, static_cast<int>(up));
}

BoundaryFlags boundary_aoi(const SystemParams& params) {
    const Exponential& e = require_exponential(params, "AoI boundary test");
    return boundary_from_quadratic(params.lambda, params.lambda + e.nu, params.n * e.nu, params.n);
}

BoundaryFlags boundary_utility(const SystemParams& params) {
    const Exponential& e = require_exponential(params, "utility boundary test");
    return boundary_from_quadratic(params.lambda, params.lambda + e.nu + 1.0, params.n * e.nu, params.n);
}

double HyperexpDensity::pdf(double x) const {
    if (x < 0.0) return 0.0;
    double f = 0.0;
    for (std::size_t i = 0; i < rates.size(); ++i) f += weights[i] * rates[i] * std::exp(-rates[i] * x);
    return f;
}

double HyperexpDensity::cdf(double x) const {
    if (x <= 0.0) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < rates.size(); ++i) s += weights[i] * -std::expm1(-rates[i] * x);
    return s;
}

double HyperexpDensity::mean() const {
    double s = 0.0;
    for (std::size_t i = 0; i < rates.size(); ++i) s += weights[i] / rates[i];
    return s;
}

HyperexpDensity hyperexp_density(const SystemParams& params, int k) {
    const Exponential& e = require_exponential(params, "AoI density");
    ReplicationScheme::full(params, k).validate(params);

    HyperexpDensity d;
    d.rates.reserve(k + 1);
    for (int i = 1; i <= k; ++i) d.rates.push_back((params.n + 1 - i) * e.nu);
    d.rates.push_back(k * params.lambda);

    const std::size_t r = d.rates.size();
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = i + 1; j < r; ++j)
            if (std::abs(d.rates[i] - d.rates[j]) <= kRateCoincidenceTol * std::max(d.rates[i], d.rates[j]))
                throw DegenerateRates("AoI density rates " + std::to_string(d.rates[i]) + " and " +
                                      std::to_string(d.rates[j]) +
                                      " coincide; estimate by Monte Carlo instead");

    d.weights.assign(r, 1.0);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < r; ++j)
            if (j != i) d.weights[i] *= d.rates[j] / (d.rates[j] - d.rates[i]);
    return d;
}

UtilityEstimate expected_utility_general(const SystemParams& params, int k, const UtilityFn& utility,
                                         const MonteCarloFallback& fallback) {
    HyperexpDensity density;
    try {
        density = hyperexp_density(params, k);
    } catch (const DegenerateRates&) {
        RandomSource rng(fallback.seed);
        PullSample sample;
        double sum = 0.0, sum_sq = 0.0;
        for (std::uint64_t i = 0; i < fallback.runs; ++i) {
            sample_pull_into(params, params.n, rng, sample);
            const double u = utility(sample.delta_by_k[k - 1]);
            sum += u;
            sum_sq += u * u;
        }
        const double runs = static_cast<double>(fallback.runs);
        const double mean = sum / runs;
        const double var = runs > 1 ? std::max(0.0, (sum_sq - runs * mean * mean) / (runs - 1)) : 0.0;
        return {mean, std::sqrt(var / runs), true};
    }

    constexpr double abs_tol = 1e-8;
    const double min_rate = *std::min_element(density.rates.begin(), density.rates.end());
    double upper = 50.0 / min_rate;

    // U is non-increasing and non-negative, so the tail beyond `upper` is at
    // most U(upper) * sum |w_i| exp(-a_i upper).
    auto tail_bound = [&](double x) {
        double s = 0.0;
        for (std::size_t i = 0; i < density.rates.size(); ++i)
            s += std::abs(density.weights[i]) * std::exp(-density.rates[i] * x);
        return std::max(0.0, utility(x)) * s;
    };
    while (tail_bound(upper) > abs_tol / 10) upper *= 2.0;

    auto integrand = [&](double x) { return utility(x) * density.pdf(x); };
    double quad_error = 0.0;
    // Mixed-sign weights leave rounding noise near eps * sum |w_i| a_i in the
    // integrand. A tolerance below that noise splits every panel down to the
    // depth cap, so keep it well above. A jump in U still refines only the
    // panels around the jump.
    const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        integrand, 0.0, upper, 20, 1e-10, &quad_error);
    return {value, quad_error + tail_bound(upper), false};
}

ImprovementRatios improvement_ratios(const SystemParams& params) {
    const OptimalK aoi = optimal_k_aoi(params);
    const OptimalK util = optimal_k_utility(params);
    const double aoi_first = expected_aoi(params, ReplicationScheme::full(params, 1));
    const double aoi_best = expected_aoi(params, ReplicationScheme::full(params, aoi.k_star));
    const double util_first = expected_utility_exp(params, ReplicationScheme::full(params, 1));
    const double util_best = expected_utility_exp(params, ReplicationScheme::full(params, util.k_star));
    return {aoi_first / aoi_best, util_best / util_first};
}

}  // namespace pullsim

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "pullsim/model.hpp"

namespace pullsim {

/// Utility of an AoI value. Must be measurable, non-negative and non-increasing.
using UtilityFn = std::function<double(double)>;

/// U(x) = exp(-x).
double exponential_utility(double aoi);

/// H(n) = 1 + 1/2 + ... + 1/n by direct summation; H(0) = 0.
double harmonic(int n);

/// Expected k-th order statistic of m i.i.d. Exp(nu) response times.
double expected_order_statistic_exp(double nu, int m, int k);

/// Closed-form expected AoI after k of m responses, exponential response times.
/// Throws UnsupportedDistribution for any other family.
double expected_aoi(const SystemParams& params, const ReplicationScheme& scheme);

/// Closed-form expected AoI for uniform response times. Only full fan-out
/// (m == n) has a closed form; anything else throws UnsupportedDistribution.
double expected_aoi_uniform(const SystemParams& params, const ReplicationScheme& scheme);

/// Expected AoI for whichever closed form applies to the response family.
double expected_aoi_closed_form(const SystemParams& params, const ReplicationScheme& scheme);

/// E[exp(-AoI)] after k of m responses, exponential response times.
double expected_utility_exp(const SystemParams& params, const ReplicationScheme& scheme);

struct OptimalK {
    int k_star;
    /// The interior stationary point is an exact integer, so k_star and
    /// k_star + 1 are both optimal. k_star is the smaller of the two.
    bool is_tie;
};

/// AoI-minimizing wait count over k in 1..n (exponential response times).
OptimalK optimal_k_aoi(const SystemParams& params);

/// Utility-maximizing wait count over k in 1..n for U(x) = exp(-x).
OptimalK optimal_k_utility(const SystemParams& params);

/// AoI-minimizing wait count for uniform response times. Width h == 0 gives n.
int optimal_k_aoi_uniform(const SystemParams& params);

struct BoundaryFlags {
    bool wait_one;  // k* = 1 is optimal
    bool wait_all;  // k* = n is optimal
};

BoundaryFlags boundary_aoi(const SystemParams& params);
BoundaryFlags boundary_utility(const SystemParams& params);

/// Density of the user-side AoI as a weighted sum of exponential densities,
/// f(x) = sum_i w_i a_i exp(-a_i x). Weights may be negative.
struct HyperexpDensity {
    std::vector<double> rates;
    std::vector<double> weights;

    double pdf(double x) const;
    double cdf(double x) const;
    double mean() const;
};

/// Builds the density for wait count k with n servers. Throws DegenerateRates
/// when two rates coincide within 1e-9 relative tolerance.
HyperexpDensity hyperexp_density(const SystemParams& params, int k);

/// Relative tolerance used to call two phase rates coincident.
inline constexpr double kRateCoincidenceTol = 1e-9;

struct UtilityEstimate {
    double value;
    /// Quadrature error estimate, or the standard error of the Monte Carlo fallback.
    double error;
    bool monte_carlo;
};

struct MonteCarloFallback {
    std::uint64_t runs = 200000;
    std::uint64_t seed = 0x5eed;
};

/// E[U(AoI)] after k responses by adaptive quadrature of the AoI density.
/// Coincident rates switch to a Monte Carlo estimate.
UtilityEstimate expected_utility_general(const SystemParams& params, int k, const UtilityFn& utility,
                                         const MonteCarloFallback& fallback = {});

struct ImprovementRatios {
    double rho_aoi;      // E[AoI(1)] / E[AoI(k*)]
    double rho_utility;  // E[U(k*)] / E[U(1)]
};

ImprovementRatios improvement_ratios(const SystemParams& params);

}  // namespace pullsim

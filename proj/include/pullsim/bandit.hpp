#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pullsim/analytic.hpp"
#include "pullsim/model.hpp"
#include "pullsim/random.hpp"

namespace pullsim {

/// Rewards revealed by one round. Playing arm k reveals arms 1..k, all taken
/// from the same request.
struct ObservationSet {
    int played_arm = 0;
    std::vector<double> rewards;  // rewards[j] belongs to arm j + 1; size == played_arm

    double reward_of(int arm) const { return rewards.at(static_cast<std::size_t>(arm - 1)); }
};

/// Arms are wait counts k = 1..n. Each step draws a fresh request over all n
/// servers; the reward of arm k is U(AoI after k responses) / U(0).
class BanditEnv {
public:
    BanditEnv(SystemParams params, UtilityFn utility, std::vector<double> true_means, std::uint64_t seed);

    /// Exponential utility with true means from the closed form when the
    /// response time is exponential, otherwise from a Monte Carlo estimate
    /// with `mc_runs` requests.
    static BanditEnv exponential(const SystemParams& params, std::uint64_t seed, std::uint64_t mc_runs = 2000000);

    int arms() const noexcept { return params_.n; }
    const SystemParams& params() const noexcept { return params_; }
    const std::vector<double>& true_means() const noexcept { return true_means_; }
    double best_mean() const noexcept { return best_mean_; }
    /// Lowest-index arm attaining the best mean.
    int best_arm() const noexcept { return best_arm_; }

    /// Plays `arm` (1-based). The returned reference is valid until the next step.
    const ObservationSet& step(int arm);

    /// Request drawn by the most recent step.
    const PullSample& last_sample() const noexcept { return sample_; }

private:
    SystemParams params_;
    UtilityFn utility_;
    std::vector<double> true_means_;
    double best_mean_ = 0.0;
    int best_arm_ = 1;
    double utility_at_zero_ = 1.0;
    bool exp_utility_ = false;
    RandomSource rng_;
    PullSample sample_;
    ObservationSet obs_;
};

/// Per-arm sample sums and counts. Means are recomputed as sum / count.
class ArmStats {
public:
    explicit ArmStats(int arms) : sum_(static_cast<std::size_t>(arms), 0.0), count_(static_cast<std::size_t>(arms), 0) {}

    int arms() const noexcept { return static_cast<int>(sum_.size()); }
    void record(int arm, double reward);
    /// Records every revealed reward of the round.
    void record_all(const ObservationSet& obs);

    double mean(int arm) const;  // 0 for an arm with no samples
    std::uint64_t count(int arm) const { return count_.at(static_cast<std::size_t>(arm - 1)); }

private:
    std::vector<double> sum_;
    std::vector<std::uint64_t> count_;
};

/// One stage of the arm-elimination algorithms.
struct StageRecord {
    int stage = 0;
    double delta = 1.0;
    std::uint64_t t_m = 0;
    std::uint64_t planned_rounds = 0;  // t_m - t_{m-1}, clamped at zero
    std::uint64_t plays = 0;           // rounds actually played in the stage
    std::vector<int> active_before;
    std::vector<int> active_after;
};

struct RegretTrace {
    std::string algorithm;
    std::vector<std::int32_t> arm;     // I_t, 1-based
    std::vector<double> reward;        // reward of the played arm
    std::vector<double> cum_regret;    // sum over s <= t of mu* - mu_{I_s}
    std::vector<StageRecord> stages;   // elimination algorithms only

    std::size_t rounds() const noexcept { return arm.size(); }
    double final_regret() const noexcept { return cum_regret.empty() ? 0.0 : cum_regret.back(); }
};

struct GreedyConfig {
    double c = 1.0;
    double d = 0.05;
};

enum class Algorithm { greedy, greedy_n, greedy_lp, ucb1, ucb_n, ucb_lp, ucb_lfg };

inline constexpr Algorithm kAllAlgorithms[] = {Algorithm::greedy, Algorithm::greedy_n, Algorithm::greedy_lp,
                                               Algorithm::ucb1,   Algorithm::ucb_n,    Algorithm::ucb_lp,
                                               Algorithm::ucb_lfg};

std::string_view algorithm_name(Algorithm a);
std::optional<Algorithm> parse_algorithm(std::string_view name);

/// Exploration rate min{1, c n / (d^2 t)}.
double epsilon_schedule(const GreedyConfig& cfg, int arms, std::uint64_t t);

/// Epsilon-greedy with uniform exploration. With side observations every
/// revealed reward updates the statistics (epsilon-greedy-N); otherwise only
/// the played arm's own reward does.
RegretTrace run_epsilon_greedy(BanditEnv& env, std::uint64_t horizon, const GreedyConfig& cfg, bool use_side_obs,
                               RandomSource& rng);

/// Epsilon-greedy that always explores arm n, which reveals every arm.
RegretTrace run_epsilon_greedy_lp(BanditEnv& env, std::uint64_t horizon, const GreedyConfig& cfg,
                                  RandomSource& rng);

/// UCB1, or UCB-N with side observations. UCB1 plays each arm once to start;
/// UCB-N starts with one play of arm n, which samples every arm.
RegretTrace run_ucb1(BanditEnv& env, std::uint64_t horizon, bool use_side_obs);

/// Staged arm elimination that explores by playing arm n while
/// 2|B_m| delta_m >= 1 and each active arm otherwise. horizon must be >= 3.
RegretTrace run_ucb_lp(BanditEnv& env, std::uint64_t horizon);

/// Staged arm elimination that explores by playing the largest active arm.
RegretTrace run_ucb_lfg(BanditEnv& env, std::uint64_t horizon);

/// Dispatches on `algorithm`. `rng` drives exploration for the greedy family.
RegretTrace run_algorithm(Algorithm algorithm, BanditEnv& env, std::uint64_t horizon, const GreedyConfig& cfg,
                          RandomSource& rng);

/// Number of elimination stages, floor(log2(T / e) / 2) + 1.
int elimination_stage_count(std::uint64_t horizon);

/// t_m = ceil(2 log(T delta^2) / delta^2).
std::uint64_t stage_sample_target(std::uint64_t horizon, double delta);

/// Arms j in `active` whose upper bound falls strictly below the best lower
/// bound among `active`, with radius sqrt(log(T delta^2) / (2 T_j)). Arms
/// without samples are never eliminated and never set the lower bound.
std::vector<int> elimination_set(const ArmStats& stats, std::span<const int> active, std::uint64_t horizon,
                                 double delta);

/// Pseudo-regret mu* T - sum_t mu_{I_t} of a sequence of plays.
double compute_regret(std::span<const std::int32_t> arms, const std::vector<double>& true_means);
double compute_regret(const RegretTrace& trace, const std::vector<double>& true_means);

}  // namespace pullsim

#include "pullsim/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "pullsim/error.hpp"
#include "pullsim/sim.hpp"

namespace pullsim {

// -- Environment ---------------------------------------------------------------

BanditEnv::BanditEnv(SystemParams params, UtilityFn utility, std::vector<double> true_means, std::uint64_t seed)
    : params_(params), utility_(std::move(utility)), true_means_(std::move(true_means)), rng_(seed) {
    params_.validate();
    if (!utility_) throw ParameterError("bandit environment needs a utility function");
    if (true_means_.size() != static_cast<std::size_t>(params_.n))
        throw ParameterError("bandit environment needs one true mean per arm");
    for (double mu : true_means_)
        if (!(mu >= 0.0 && mu <= 1.0)) throw ParameterError("arm means must lie in [0, 1]");
    utility_at_zero_ = utility_(0.0);
    if (!(utility_at_zero_ > 0.0)) throw ParameterError("utility must be positive at zero AoI");
    if (auto* fn = utility_.target<double (*)(double)>()) exp_utility_ = (*fn == &exponential_utility);

    for (int k = 1; k <= params_.n; ++k) {
        if (true_means_[k - 1] > best_mean_) {
            best_mean_ = true_means_[k - 1];
            best_arm_ = k;
        }
    }
    obs_.rewards.reserve(static_cast<std::size_t>(params_.n));
}

BanditEnv BanditEnv::exponential(const SystemParams& params, std::uint64_t seed, std::uint64_t mc_runs) {
    std::vector<double> means;
    if (params.response.as_exponential()) {
        for (int k = 1; k <= params.n; ++k) means.push_back(expected_utility_exp(params, ReplicationScheme::full(params, k)));
    } else {
        means = estimate_arm_means(params, exponential_utility, mc_runs, seed ^ 0xa5a5a5a5ULL).mean;
    }
    return BanditEnv(params, exponential_utility, std::move(means), seed);
}

const ObservationSet& BanditEnv::step(int arm) {
    if (arm < 1 || arm > params_.n) throw ParameterError("arm index out of range");
    sample_pull_into(params_, params_.n, rng_, sample_);
    obs_.played_arm = arm;
    obs_.rewards.resize(static_cast<std::size_t>(arm));
    if (exp_utility_) {
        for (int j = 0; j < arm; ++j) obs_.rewards[j] = std::exp(-sample_.delta_by_k[j]);
    } else {
        for (int j = 0; j < arm; ++j) obs_.rewards[j] = utility_(sample_.delta_by_k[j]) / utility_at_zero_;
    }
    return obs_;
}

// -- Statistics ----------------------------------------------------------------

void ArmStats::record(int arm, double reward) {
    const auto i = static_cast<std::size_t>(arm - 1);
    sum_.at(i) += reward;
    ++count_[i];
}

void ArmStats::record_all(const ObservationSet& obs) {
    for (std::size_t i = 0; i < obs.rewards.size(); ++i) {
        sum_[i] += obs.rewards[i];
        ++count_[i];
    }
}

double ArmStats::mean(int arm) const {
    const auto i = static_cast<std::size_t>(arm - 1);
    return count_.at(i) == 0 ? 0.0 : sum_[i] / static_cast<double>(count_[i]);
}

// -- Shared plumbing -------------------------------------------------------------

namespace {

class Player {
public:
    Player(BanditEnv& env, std::uint64_t horizon, bool side_obs, std::string_view name)
        : env_(env), horizon_(horizon), side_obs_(side_obs), stats_(env.arms()) {
        if (horizon < 1) throw ParameterError("bandit horizon T must be >= 1");
        trace_.algorithm = std::string(name);
        trace_.arm.reserve(horizon);
        trace_.reward.reserve(horizon);
        trace_.cum_regret.reserve(horizon);
    }

    bool done() const noexcept { return played_ >= horizon_; }
    std::uint64_t played() const noexcept { return played_; }
    std::uint64_t remaining() const noexcept { return horizon_ - played_; }
    std::uint64_t horizon() const noexcept { return horizon_; }
    const ArmStats& stats() const noexcept { return stats_; }
    RegretTrace& trace() noexcept { return trace_; }

    void play(int arm) {
        const ObservationSet& obs = env_.step(arm);
        const double reward = obs.rewards[static_cast<std::size_t>(arm - 1)];
        if (side_obs_) {
            stats_.record_all(obs);
        } else {
            stats_.record(arm, reward);
        }
        cum_ += env_.best_mean() - env_.true_means()[static_cast<std::size_t>(arm - 1)];
        trace_.arm.push_back(arm);
        trace_.reward.push_back(reward);
        trace_.cum_regret.push_back(cum_);
        ++played_;
    }

    /// Plays `arm` up to `times` rounds; returns how many were played.
    std::uint64_t play_repeatedly(int arm, std::uint64_t times) {
        const std::uint64_t n = std::min(times, remaining());
        for (std::uint64_t i = 0; i < n; ++i) play(arm);
        return n;
    }

    int greedy_arm() const {
        int best = 1;
        double best_mean = stats_.mean(1);
        for (int k = 2; k <= stats_.arms(); ++k) {
            const double m = stats_.mean(k);
            if (m > best_mean) {
                best_mean = m;
                best = k;
            }
        }
        return best;
    }

    RegretTrace finish() { return std::move(trace_); }

private:
    BanditEnv& env_;
    std::uint64_t horizon_;
    bool side_obs_;
    ArmStats stats_;
    RegretTrace trace_;
    std::uint64_t played_ = 0;
    double cum_ = 0.0;
};

RegretTrace run_greedy_family(BanditEnv& env, std::uint64_t horizon, const GreedyConfig& cfg, RandomSource& rng,
                              Algorithm variant) {
    if (!(cfg.c > 0.0)) throw ParameterError("greedy parameter c must be positive");
    if (!(cfg.d > 0.0 && cfg.d < 1.0)) throw ParameterError("greedy parameter d must lie in (0, 1)");
    const bool side = variant != Algorithm::greedy;
    Player player(env, horizon, side, algorithm_name(variant));
    const int n = env.arms();
    for (std::uint64_t t = 1; t <= horizon; ++t) {
        const bool explore = rng.uniform() < epsilon_schedule(cfg, n, t);
        int arm;
        if (!explore) {
            arm = player.greedy_arm();
        } else if (variant == Algorithm::greedy_lp) {
            arm = n;
        } else {
            arm = 1 + static_cast<int>(rng.uniform_index(static_cast<std::size_t>(n)));
        }
        player.play(arm);
    }
    return player.finish();
}

RegretTrace run_staged(BanditEnv& env, std::uint64_t horizon, bool largest_active) {
    if (horizon < 3) throw ParameterError("arm elimination needs horizon T >= 3");
    const int n = env.arms();
    Player player(env, horizon, true, largest_active ? "ucb-lfg" : "ucb-lp");

    std::vector<int> active(static_cast<std::size_t>(n));
    std::iota(active.begin(), active.end(), 1);
    double delta = 1.0;
    std::uint64_t previous_target = 0;
    const int stages = elimination_stage_count(horizon);

    for (int m = 0; m < stages && !player.done(); ++m) {
        StageRecord rec;
        rec.stage = m;
        rec.delta = delta;
        rec.active_before = active;
        const std::uint64_t start = player.played();

        if (active.size() == 1) {
            player.play_repeatedly(active.front(), player.remaining());
            rec.plays = player.played() - start;
            rec.active_after = active;
            player.trace().stages.push_back(std::move(rec));
            break;
        }

        rec.t_m = stage_sample_target(horizon, delta);
        rec.planned_rounds = rec.t_m > previous_target ? rec.t_m - previous_target : 0;
        previous_target = rec.t_m;

        if (largest_active) {
            player.play_repeatedly(active.back(), rec.planned_rounds);
        } else if (2.0 * static_cast<double>(active.size()) * delta >= 1.0) {
            player.play_repeatedly(n, rec.planned_rounds);
        } else {
            for (int k : active) player.play_repeatedly(k, rec.planned_rounds);
        }
        rec.plays = player.played() - start;

        if (!player.done()) {
            const std::vector<int> eliminated = elimination_set(player.stats(), active, horizon, delta);
            std::erase_if(active, [&](int k) { return std::binary_search(eliminated.begin(), eliminated.end(), k); });
            delta /= 2.0;
        }
        rec.active_after = active;
        player.trace().stages.push_back(std::move(rec));
    }

    // Stages can run out before T. The rest goes to the best surviving arm.
    if (!player.done()) {
        int arm = active.front();
        double best = player.stats().mean(arm);
        for (int k : active) {
            if (player.stats().mean(k) > best) {
                best = player.stats().mean(k);
                arm = k;
            }
        }
        player.play_repeatedly(arm, player.remaining());
    }
    return player.finish();
}

}  // namespace

// -- Algorithms ----------------------------------------------------------------

std::string_view algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::greedy: return "eps-greedy";
        case Algorithm::greedy_n: return "eps-greedy-n";
        case Algorithm::greedy_lp: return "eps-greedy-lp";
        case Algorithm::ucb1: return "ucb1";
        case Algorithm::ucb_n: return "ucb-n";
        case Algorithm::ucb_lp: return "ucb-lp";
        case Algorithm::ucb_lfg: return "ucb-lfg";
    }
    return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
    for (Algorithm a : kAllAlgorithms)
        if (algorithm_name(a) == name) return a;
    return std::nullopt;
}

double epsilon_schedule(const GreedyConfig& cfg, int arms, std::uint64_t t) {
    return std::min(1.0, cfg.c * arms / (cfg.d * cfg.d * static_cast<double>(t)));
}

RegretTrace run_epsilon_greedy(BanditEnv& env, std::uint64_t horizon, const GreedyConfig& cfg, bool use_side_obs,
                               RandomSource& rng) {
    return run_greedy_family(env, horizon, cfg, rng, use_side_obs ? Algorithm::greedy_n : Algorithm::greedy);
}

RegretTrace run_epsilon_greedy_lp(BanditEnv& env, std::uint64_t horizon, const GreedyConfig& cfg,
                                  RandomSource& rng) {
    return run_greedy_family(env, horizon, cfg, rng, Algorithm::greedy_lp);
}

RegretTrace run_ucb1(BanditEnv& env, std::uint64_t horizon, bool use_side_obs) {
    Player player(env, horizon, use_side_obs, use_side_obs ? "ucb-n" : "ucb1");
    const int n = env.arms();

    if (use_side_obs) {
        player.play(n);
    } else {
        for (int k = 1; k <= n && !player.done(); ++k) player.play(k);
    }

    const ArmStats& stats = player.stats();
    while (!player.done()) {
        const double two_log_t = 2.0 * std::log(static_cast<double>(player.played() + 1));
        int best = 1;
        double best_index = -1.0;
        for (int k = 1; k <= n; ++k) {
            const double index = stats.mean(k) + std::sqrt(two_log_t / static_cast<double>(stats.count(k)));
            if (index > best_index) {
                best_index = index;
                best = k;
            }
        }
        player.play(best);
    }
    return player.finish();
}

RegretTrace run_ucb_lp(BanditEnv& env, std::uint64_t horizon) { return run_staged(env, horizon, false); }

RegretTrace run_ucb_lfg(BanditEnv& env, std::uint64_t horizon) { return run_staged(env, horizon, true); }

RegretTrace run_algorithm(Algorithm algorithm, BanditEnv& env, std::uint64_t horizon, const GreedyConfig& cfg,
                          RandomSource& rng) {
    switch (algorithm) {
        case Algorithm::greedy: return run_epsilon_greedy(env, horizon, cfg, false, rng);
        case Algorithm::greedy_n: return run_epsilon_greedy(env, horizon, cfg, true, rng);
        case Algorithm::greedy_lp: return run_epsilon_greedy_lp(env, horizon, cfg, rng);
        case Algorithm::ucb1: return run_ucb1(env, horizon, false);
        case Algorithm::ucb_n: return run_ucb1(env, horizon, true);
        case Algorithm::ucb_lp: return run_ucb_lp(env, horizon);
        case Algorithm::ucb_lfg: return run_ucb_lfg(env, horizon);
    }
    throw ParameterError("unknown algorithm");
}

int elimination_stage_count(std::uint64_t horizon) {
    const double last = std::floor(0.5 * std::log2(static_cast<double>(horizon) / std::numbers::e));
    return last < 0 ? 0 : static_cast<int>(last) + 1;
}

std::uint64_t stage_sample_target(std::uint64_t horizon, double delta) {
    const double d2 = delta * delta;
    return static_cast<std::uint64_t>(std::ceil(2.0 * std::log(static_cast<double>(horizon) * d2) / d2));
}

std::vector<int> elimination_set(const ArmStats& stats, std::span<const int> active, std::uint64_t horizon,
                                 double delta) {
    const double log_term = std::log(static_cast<double>(horizon) * delta * delta);
    auto radius = [&](int k) { return std::sqrt(log_term / (2.0 * static_cast<double>(stats.count(k)))); };

    bool have_lower = false;
    double best_lower = 0.0;
    for (int k : active) {
        if (stats.count(k) == 0) continue;
        const double lower = stats.mean(k) - radius(k);
        if (!have_lower || lower > best_lower) {
            best_lower = lower;
            have_lower = true;
        }
    }

    std::vector<int> out;
    if (!have_lower) return out;
    for (int j : active) {
        if (stats.count(j) == 0) continue;
        if (stats.mean(j) + radius(j) < best_lower) out.push_back(j);
    }
    std::sort(out.begin(), out.end());
    return out;
}

double compute_regret(std::span<const std::int32_t> arms, const std::vector<double>& true_means) {
    if (arms.empty()) throw ParameterError("regret of an empty trace is undefined");
    const double best = *std::max_element(true_means.begin(), true_means.end());
    double collected = 0.0;
    for (std::int32_t a : arms) collected += true_means.at(static_cast<std::size_t>(a - 1));
    return best * static_cast<double>(arms.size()) - collected;
}

double compute_regret(const RegretTrace& trace, const std::vector<double>& true_means) {
    return compute_regret(std::span<const std::int32_t>(trace.arm), true_means);
}

}  // namespace pullsim

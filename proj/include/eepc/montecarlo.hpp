#pragma once

#include <span>
#include <vector>

#include "eepc/config.hpp"
#include "eepc/game.hpp"
#include "eepc/lsa.hpp"
#include "eepc/model.hpp"

// Seeded random scenarios, finite-system trials and aggregation against the
// large-system predictions. Trials are independent jobs keyed by
// (seed, trial_index); the parallel path distributes them over OpenMP threads
// and reduces in trial-index order, so results are bit-identical to the
// serial reference at any thread count.

namespace eepc {

enum class ExecutionPolicy { Serial, Parallel };

// Deterministic scenario realization for one trial.
Scenario generate_scenario(const SystemConfig& config, long trial_index);

struct TrialResult {
    EquilibriumResult equilibrium;
    std::vector<double> gains;  // realized composite gains
    bool feasible = true;       // false when the receiver could not be formed
};

// Runs `trials` equilibria (or closed-form-powered evaluations) of the given
// receiver. With PowerRule::LsaClosedForm the powers come from the
// decentralized rule on each user's realized gain and the finite-system
// receiver only measures the resulting SINRs.
std::vector<TrialResult> run_trials(const SystemConfig& config, ReceiverKind receiver,
                                    PowerRule rule, int trials, ExecutionPolicy policy);

struct SweepPoint {
    int num_users = 0;
    bool feasible = false;
    double lsa_mean_power = 0.0;
    double lsa_mean_utility = 0.0;
    double sim_mean_power = 0.0;
    double sim_mean_utility = 0.0;
    double relative_gap = 0.0;          // |lsa - sim| / sim on mean utility
    int trials = 0;
    double confidence_halfwidth = 0.0;  // 1.96 x standard error of the trial means
    double convergence_rate = 1.0;
};

// Utility/power versus number of users: per K, `trials` seeded scenarios with
// powers from the chosen rule, paired with the quantile-profile prediction.
std::vector<SweepPoint> run_comparison_sweep(const SystemConfig& base,
                                             std::span<const int> user_counts,
                                             ReceiverKind receiver, PowerRule rule, int trials,
                                             ExecutionPolicy policy = ExecutionPolicy::Parallel);

struct ProfileRow {
    double predicted_gain = 0.0;
    double predicted_power = 0.0;
    double predicted_sinr = 0.0;
    double predicted_utility = 0.0;
    bool predicted_capped = false;
    double sim_gain = 0.0;
    double sim_power = 0.0;
    double sim_sinr = 0.0;
    double sim_utility = 0.0;
    double sim_capped_fraction = 0.0;
};

struct ProfileComparison {
    std::vector<ProfileRow> rows;  // strongest user first
    bool feasible = false;
    int trials = 0;
    int converged_trials = 0;
    int lsa_capped = 0;              // u2 from the prediction
    double sim_mean_capped = 0.0;    // mean capped count across trials
    double rank_corr_power = 0.0;    // prediction vs gain-sorted simulation
    double rank_corr_utility = 0.0;
};

// Gain-sorted per-user profiles averaged across trials, paired with the
// unconstrained prediction (max_power infinite) or the capped procedure.
ProfileComparison profile_comparison(const SystemConfig& config, int trials,
                                     ExecutionPolicy policy = ExecutionPolicy::Parallel);

// Spearman rank correlation with average ranks on ties.
double spearman_rank_correlation(std::span<const double> a, std::span<const double> b);

// Mean and 1.96/sqrt(n) confidence halfwidth of a sample.
struct MeanStats {
    double mean = 0.0;
    double halfwidth = 0.0;
};
MeanStats mean_with_halfwidth(std::span<const double> values);

}  // namespace eepc

#include "eepc/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>

#include "eepc/receivers.hpp"
#include "eepc/rng.hpp"

namespace eepc {

Scenario generate_scenario(const SystemConfig& config, long trial_index) {
    config.validate();
    Scenario sc;
    sc.config = config;
    sc.trial_index = trial_index;
    const int users = config.num_users;
    const int n = config.processing_gain;
    const int paths = config.num_paths;
    const int spread = config.effective_delay_spread();
    const std::uint64_t trial_seed = mix64(config.seed, static_cast<std::uint64_t>(trial_index));

    sc.codes.reserve(users);
    sc.channels.reserve(users);
    sc.offsets.reserve(users);
    for (int k = 0; k < users; ++k) {
        sc.codes.push_back(generate_code(trial_seed, k, n));

        auto gain_rng = make_rng(mix64(trial_seed, stream::gains, static_cast<std::uint64_t>(k)));
        std::vector<double> gains(paths);
        config.fading.sample_gains(gain_rng, gains);

        // First path at 0, later paths at distinct delays from {1..spread} so
        // the replicas stay resolvable.
        auto delay_rng =
            make_rng(mix64(trial_seed, stream::delays, static_cast<std::uint64_t>(k)));
        std::vector<int> pool(spread);
        std::iota(pool.begin(), pool.end(), 1);
        std::vector<int> delays(paths, 0);
        for (int l = 1; l < paths; ++l) {
            const int pick = uniform_int(delay_rng, static_cast<int>(pool.size()));
            delays[l] = pool[pick];
            pool.erase(pool.begin() + pick);
        }
        std::sort(delays.begin() + 1, delays.end());

        sc.channels.push_back(MultipathChannel::make(std::move(gains), std::move(delays)));

        auto offset_rng =
            make_rng(mix64(trial_seed, stream::offsets, static_cast<std::uint64_t>(k)));
        sc.offsets.push_back(uniform_int(offset_rng, config.offset_spread + 1));
    }
    return sc;
}

namespace {

// Closed-form powers on the realized gains, SINRs measured by the
// finite-system receiver; no iteration.
TrialResult closed_form_trial(const Scenario& scenario, ReceiverKind receiver,
                              double target_sinr) {
    const SystemConfig& cfg = scenario.config;
    const int users = cfg.num_users;
    TrialResult out;
    out.gains.resize(users);
    EquilibriumResult& eq = out.equilibrium;
    eq.powers.resize(users);
    for (int k = 0; k < users; ++k) {
        out.gains[k] = scenario.channels[k].composite_gain;
        const DecentralizedPower p = decentralized_power(
            out.gains[k], cfg.load(), target_sinr, cfg.noise_half, receiver, cfg.num_paths);
        if (!p.feasible) {
            out.feasible = false;
            return out;
        }
        eq.powers[k] = p.power;
    }
    eq.sinrs.resize(users);
    eq.utilities.resize(users);
    for (int k = 0; k < users; ++k) {
        const ObserverFrame frame = build_observer_frame(scenario, k);
        eq.sinrs[k] = run_receiver(receiver, frame, eq.powers, cfg.noise_half).sinr;
        eq.utilities[k] = utility(eq.powers[k], eq.sinrs[k], cfg);
    }
    eq.iterations = 1;
    eq.converged = true;
    return out;
}

TrialResult run_one_trial(const SystemConfig& config, ReceiverKind receiver, PowerRule rule,
                          double target_sinr, long trial_index) {
    const Scenario scenario = generate_scenario(config, trial_index);
    if (rule == PowerRule::LsaClosedForm)
        return closed_form_trial(scenario, receiver, target_sinr);
    TrialResult out;
    out.equilibrium = run_equilibrium(scenario, receiver);
    out.gains.resize(config.num_users);
    for (int k = 0; k < config.num_users; ++k)
        out.gains[k] = scenario.channels[k].composite_gain;
    return out;
}

// Runs one job per trial, serial or OpenMP; slots are written by trial index
// so the output never depends on the schedule. Exceptions other than
// infeasibility are replayed after the loop.
template <class Fn>
void for_each_trial(int trials, ExecutionPolicy policy, Fn&& fn) {
    std::exception_ptr error;
    if (policy == ExecutionPolicy::Parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int t = 0; t < trials; ++t) {
            try {
                fn(t);
            } catch (...) {
#pragma omp critical
                if (!error) error = std::current_exception();
            }
        }
    } else {
        for (int t = 0; t < trials; ++t) {
            try {
                fn(t);
            } catch (...) {
                if (!error) error = std::current_exception();
            }
        }
    }
    if (error) std::rethrow_exception(error);
}

}  // namespace

std::vector<TrialResult> run_trials(const SystemConfig& config, ReceiverKind receiver,
                                    PowerRule rule, int trials, ExecutionPolicy policy) {
    if (trials < 1) throw std::invalid_argument("run_trials: trials must be >= 1");
    const double target_sinr = solve_target_sinr(config.packet_length);
    std::vector<TrialResult> results(trials);
    for_each_trial(trials, policy, [&](int t) {
        try {
            results[t] = run_one_trial(config, receiver, rule, target_sinr, t);
        } catch (const InfeasibleError&) {
            results[t].feasible = false;
        }
    });
    return results;
}

MeanStats mean_with_halfwidth(std::span<const double> values) {
    MeanStats stats;
    const auto n = values.size();
    if (n == 0) return stats;
    stats.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
    if (n > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - stats.mean) * (v - stats.mean);
        stats.halfwidth = 1.96 * std::sqrt(ss / static_cast<double>(n - 1)) /
                          std::sqrt(static_cast<double>(n));
    }
    return stats;
}

std::vector<SweepPoint> run_comparison_sweep(const SystemConfig& base,
                                             std::span<const int> user_counts,
                                             ReceiverKind receiver, PowerRule rule, int trials,
                                             ExecutionPolicy policy) {
    const double target_sinr = solve_target_sinr(base.packet_length);
    std::vector<SweepPoint> points;
    points.reserve(user_counts.size());
    for (int users : user_counts) {
        SystemConfig config = base;
        config.num_users = users;
        SweepPoint point;
        point.num_users = users;
        point.trials = trials;

        const LsaPrediction prediction =
            predict_profiles(config, target_sinr, receiver, QuantileMode::Midpoint);
        if (!prediction.feasible) {
            points.push_back(point);
            continue;
        }
        point.lsa_mean_power =
            std::accumulate(prediction.powers.begin(), prediction.powers.end(), 0.0) / users;
        point.lsa_mean_utility =
            std::accumulate(prediction.utilities.begin(), prediction.utilities.end(), 0.0) /
            users;

        const std::vector<TrialResult> results = run_trials(config, receiver, rule, trials, policy);
        std::vector<double> trial_power, trial_utility;
        int converged = 0;
        bool all_feasible = true;
        for (const TrialResult& r : results) {
            if (!r.feasible) {
                all_feasible = false;
                continue;
            }
            if (!r.equilibrium.converged) continue;  // keep the means honest
            ++converged;
            trial_power.push_back(r.equilibrium.powers.mean());
            trial_utility.push_back(r.equilibrium.utilities.mean());
        }
        if (!all_feasible || trial_utility.empty()) {
            points.push_back(point);
            continue;
        }
        point.feasible = true;
        point.convergence_rate = static_cast<double>(converged) / trials;
        point.sim_mean_power = mean_with_halfwidth(trial_power).mean;
        const MeanStats u = mean_with_halfwidth(trial_utility);
        point.sim_mean_utility = u.mean;
        point.confidence_halfwidth = u.halfwidth;
        point.relative_gap =
            std::abs(point.lsa_mean_utility - point.sim_mean_utility) / point.sim_mean_utility;
        points.push_back(point);
    }
    return points;
}

namespace {

std::vector<double> ranks_with_ties(std::span<const double> values) {
    const auto n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double spearman_rank_correlation(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2)
        throw std::invalid_argument("spearman: need two equal-length samples");
    const std::vector<double> ra = ranks_with_ties(a);
    const std::vector<double> rb = ranks_with_ties(b);
    const double n = static_cast<double>(a.size());
    const double mean = (n + 1.0) / 2.0;
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cov += (ra[i] - mean) * (rb[i] - mean);
        va += (ra[i] - mean) * (ra[i] - mean);
        vb += (rb[i] - mean) * (rb[i] - mean);
    }
    if (va == 0.0 || vb == 0.0) return 0.0;
    return cov / std::sqrt(va * vb);
}

ProfileComparison profile_comparison(const SystemConfig& config, int trials,
                                     ExecutionPolicy policy) {
    const double target_sinr = solve_target_sinr(config.packet_length);
    const int users = config.num_users;
    ProfileComparison out;
    out.trials = trials;

    const bool capped_mode = std::isfinite(config.max_power);
    LsaPrediction prediction;
    ConstrainedProfile constrained;
    if (capped_mode) {
        constrained = constrained_profile(config, target_sinr, config.max_power,
                                          QuantileMode::Midpoint);
        out.feasible = constrained.feasible;
        out.lsa_capped = constrained.num_capped;
    } else {
        prediction = predict_profiles(config, target_sinr, ReceiverKind::Mmse,
                                      QuantileMode::Midpoint);
        out.feasible = prediction.feasible;
    }
    if (!out.feasible) return out;

    out.rows.resize(users);
    for (int k = 0; k < users; ++k) {
        ProfileRow& row = out.rows[k];
        if (capped_mode) {
            row.predicted_gain = constrained.gains[k];
            row.predicted_power = constrained.powers[k];
            row.predicted_sinr = constrained.sinrs[k];
            row.predicted_utility = constrained.utilities[k];
            row.predicted_capped = constrained.capped[k];
        } else {
            row.predicted_gain = prediction.gains[k];
            row.predicted_power = prediction.powers[k];
            row.predicted_sinr = target_sinr;
            row.predicted_utility = prediction.utilities[k];
        }
    }

    const std::vector<TrialResult> results =
        run_trials(config, ReceiverKind::Mmse, PowerRule::GameIteration, trials, policy);

    // Index-wise average of the gain-sorted per-user results, reduced in
    // trial order.
    int used = 0;
    long capped_total = 0;
    for (const TrialResult& r : results) {
        if (!r.feasible || !r.equilibrium.converged) continue;
        ++used;
        capped_total += static_cast<long>(r.equilibrium.capped.size());
        std::vector<int> order(users);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return r.gains[a] > r.gains[b]; });
        std::vector<bool> capped(users, false);
        for (int k : r.equilibrium.capped) capped[k] = true;
        for (int k = 0; k < users; ++k) {
            const int u = order[k];
            out.rows[k].sim_gain += r.gains[u];
            out.rows[k].sim_power += r.equilibrium.powers[u];
            out.rows[k].sim_sinr += r.equilibrium.sinrs[u];
            out.rows[k].sim_utility += r.equilibrium.utilities[u];
            out.rows[k].sim_capped_fraction += capped[u] ? 1.0 : 0.0;
        }
    }
    out.converged_trials = used;
    if (used == 0) return out;
    for (ProfileRow& row : out.rows) {
        row.sim_gain /= used;
        row.sim_power /= used;
        row.sim_sinr /= used;
        row.sim_utility /= used;
        row.sim_capped_fraction /= used;
    }
    out.sim_mean_capped = static_cast<double>(capped_total) / used;

    std::vector<double> pred_power(users), sim_power(users), pred_utility(users),
        sim_utility(users);
    for (int k = 0; k < users; ++k) {
        pred_power[k] = out.rows[k].predicted_power;
        sim_power[k] = out.rows[k].sim_power;
        pred_utility[k] = out.rows[k].predicted_utility;
        sim_utility[k] = out.rows[k].sim_utility;
    }
    out.rank_corr_power = spearman_rank_correlation(pred_power, sim_power);
    out.rank_corr_utility = spearman_rank_correlation(pred_utility, sim_utility);
    return out;
}

}  // namespace eepc

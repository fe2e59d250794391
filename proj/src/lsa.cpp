#include "eepc/lsa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "eepc/game.hpp"
#include "eepc/rootfind.hpp"

namespace eepc {

double feasible_load_bound(ReceiverKind kind, double target_sinr, int paths) {
    switch (kind) {
        case ReceiverKind::Mmse: return (1.0 + target_sinr) / target_sinr;
        case ReceiverKind::MatchedFilter: return 1.0 / target_sinr;
        case ReceiverKind::Decorrelator: return 1.0 / paths;
    }
    throw std::logic_error("feasible_load_bound: unknown receiver kind");
}

namespace {

// beta * I(a, beta) = a beta / (1 + a beta); increasing in beta, so the fixed
// points below become monotone scalar equations.
double scaled_interference(double a, double beta) {
    const double ab = a * beta;
    return ab / (1.0 + ab);
}

}  // namespace

double solve_beta_data(double load, double noise_half, double received_power, double xi_sq,
                       int paths) {
    if (load == 0.0) return 1.0 / noise_half;
    auto excess = [&](double beta) {
        const double interference = (paths - 1) * scaled_interference(xi_sq, beta) +
                                    scaled_interference(received_power + xi_sq, beta);
        return beta * noise_half + load * interference - 1.0;
    };
    return bisect(excess, 0.0, 1.0 / noise_half);
}

double solve_beta_data_general(double noise_half, std::span<const LsaInterferer> interferers,
                               double inv_processing_gain, int paths) {
    if (interferers.empty() || inv_processing_gain == 0.0) return 1.0 / noise_half;
    auto excess = [&](double beta) {
        double interference = 0.0;
        for (const LsaInterferer& h : interferers)
            interference += (paths - 1) * scaled_interference(h.xi_sq, beta) +
                            scaled_interference(h.received_power + h.xi_sq, beta);
        return beta * noise_half + inv_processing_gain * interference - 1.0;
    };
    return bisect(excess, 0.0, 1.0 / noise_half);
}

double asymptotic_sinr(double power, double gain_estimate, double xi_sq, double beta_data) {
    return power * gain_estimate * beta_data / (1.0 + xi_sq * beta_data);
}

double equal_received_power(double load, double target_sinr, double noise_half,
                            ReceiverKind kind, int paths) {
    const double bound = feasible_load_bound(kind, target_sinr, paths);
    if (!(load < bound)) throw InfeasibleError("load reaches the receiver feasibility bound");
    return target_sinr * noise_half / (1.0 - load / bound);
}

DecentralizedPower decentralized_power(double composite_gain, double load, double target_sinr,
                                       double noise_half, ReceiverKind kind, int paths) {
    if (!(composite_gain > 0.0))
        throw std::invalid_argument("decentralized_power: composite gain must be positive");
    DecentralizedPower out;
    out.load_bound = feasible_load_bound(kind, target_sinr, paths);
    if (!(load < out.load_bound)) return out;
    out.feasible = true;
    out.power = equal_received_power(load, target_sinr, noise_half, kind, paths) / composite_gain;
    return out;
}

std::vector<double> quantile_gains(const FadingModel& fading, int paths, int num_users,
                                   QuantileMode mode) {
    if (num_users < 1) throw std::invalid_argument("quantile_gains: K must be >= 1");
    const double offset = mode == QuantileMode::Midpoint ? 0.5 : 0.0;
    std::vector<double> gains(num_users);
    for (int k = 1; k <= num_users; ++k) {
        const double q = (num_users - k + offset) / num_users;
        gains[k - 1] = fading.composite_quantile(q, paths);
    }
    return gains;
}

LsaPrediction predict_profiles(const SystemConfig& config, double target_sinr,
                               ReceiverKind receiver, QuantileMode mode) {
    LsaPrediction out;
    out.receiver = receiver;
    out.gains = quantile_gains(config.fading, config.num_paths, config.num_users, mode);
    const double load = config.load();
    const double bound = feasible_load_bound(receiver, target_sinr, config.num_paths);
    if (!(load < bound)) return out;

    out.feasible = true;
    out.received_power =
        equal_received_power(load, target_sinr, config.noise_half, receiver, config.num_paths);
    switch (receiver) {
        case ReceiverKind::Mmse:
            out.beta_data = target_sinr / out.received_power;
            break;
        case ReceiverKind::MatchedFilter:
            out.beta_data = 1.0 / (config.noise_half + load * out.received_power);
            break;
        case ReceiverKind::Decorrelator:
            out.beta_data = (1.0 - load * config.num_paths) / config.noise_half;
            break;
    }
    out.powers.resize(out.gains.size());
    out.utilities.resize(out.gains.size());
    for (std::size_t k = 0; k < out.gains.size(); ++k) {
        out.powers[k] = out.received_power / out.gains[k];  // inf at a zero quantile
        out.utilities[k] = std::isfinite(out.powers[k])
                               ? utility(out.powers[k], target_sinr, config)
                               : 0.0;
    }
    return out;
}

std::pair<double, double> training_error_variance(double avg_received_power, int training_symbols,
                                                  double load, int paths, double noise_half) {
    if (training_symbols < 1)
        throw std::invalid_argument("training_error_variance: N_T must be >= 1");
    if (!(avg_received_power > 0.0))
        throw std::invalid_argument("training_error_variance: P must be positive");
    // The fixed point is a quadratic in beta_c:
    //   noise_half P beta^2 + (noise_half + load L P - N_T P) beta - N_T = 0;
    // take the positive root through the cancellation-free branch.
    const double p = avg_received_power;
    const double nt = static_cast<double>(training_symbols);
    const double a = noise_half * p;
    const double b = noise_half + load * paths * p - nt * p;
    const double sq = std::sqrt(b * b + 4.0 * a * nt);
    const double beta_c = b <= 0.0 ? (sq - b) / (2.0 * a) : 2.0 * nt / (b + sq);
    const double xi_sq = p / (1.0 + p * beta_c);
    return {xi_sq, beta_c};
}

double solve_beta_data_training(double load, double noise_half, double xi_sq, double target_sinr,
                                int paths) {
    // Every user is received at P = target (1 + xi_sq beta) / beta, which
    // collapses the data fixed point to one monotone equation in beta.
    if (!(load * target_sinr / (1.0 + target_sinr) < 1.0))
        throw InfeasibleError("load reaches the receiver feasibility bound");
    if (load == 0.0) return 1.0 / noise_half;
    auto excess = [&](double beta) {
        const double scaled_received = target_sinr * (1.0 + xi_sq * beta) + xi_sq * beta;
        const double interference = (paths - 1) * scaled_interference(xi_sq, beta) +
                                    scaled_received / (1.0 + scaled_received);
        return beta * noise_half + load * interference - 1.0;
    };
    return bisect(excess, 0.0, 1.0 / noise_half);
}

TrainingSweepPoint training_point(const SystemConfig& config, double target_sinr,
                                  double avg_received_power, int training_symbols,
                                  QuantileMode mode) {
    TrainingSweepPoint point;
    point.training_symbols = training_symbols;
    const double load = config.load();
    auto [xi_sq, beta_c] = training_error_variance(avg_received_power, training_symbols, load,
                                                   config.num_paths, config.noise_half);
    point.xi_sq = xi_sq;
    point.beta_c = beta_c;
    if (!(load < feasible_load_bound(ReceiverKind::Mmse, target_sinr, config.num_paths)))
        return point;

    point.feasible = true;
    point.beta_d_star =
        solve_beta_data_training(load, config.noise_half, xi_sq, target_sinr, config.num_paths);
    const double received = target_sinr * (1.0 + xi_sq * point.beta_d_star) / point.beta_d_star;
    const std::vector<double> gains =
        quantile_gains(config.fading, config.num_paths, config.num_users, mode);
    double total = 0.0;
    for (double g : gains) {
        const double power = received / g;
        total += std::isfinite(power) ? utility(power, target_sinr, config.data_rate,
                                                config.packet_length, training_symbols)
                                      : 0.0;
    }
    point.mean_utility = total / static_cast<double>(gains.size());
    return point;
}

TrainingSweep training_sweep(const SystemConfig& config, double target_sinr,
                             double avg_received_power, QuantileMode mode) {
    double working_power = avg_received_power;
    if (!(working_power > 0.0))
        working_power = equal_received_power(config.load(), target_sinr, config.noise_half,
                                             ReceiverKind::Mmse, config.num_paths);
    TrainingSweep sweep;
    sweep.points.reserve(config.packet_length - 1);
    for (int nt = 1; nt < config.packet_length; ++nt)
        sweep.points.push_back(training_point(config, target_sinr, working_power, nt, mode));
    int best = 0;
    for (std::size_t i = 1; i < sweep.points.size(); ++i)
        if (sweep.points[i].mean_utility > sweep.points[best].mean_utility)
            best = static_cast<int>(i);
    sweep.best_training_symbols = sweep.points[best].training_symbols;
    return sweep;
}

namespace {

// Implicit own-SINR of a user received at `own_power` against u1 interferers
// at `uncapped_power` and the listed capped received powers (self excluded by
// the caller). Monotone in the SINR, solved by bisection.
double capped_user_sinr(double own_power, double uncapped_power, int num_uncapped,
                        std::span<const double> capped_received, double inv_processing_gain,
                        double noise_half) {
    if (own_power <= 0.0) return 0.0;
    auto excess = [&](double sinr) {
        double lhs = sinr * noise_half;
        lhs += num_uncapped * inv_processing_gain * sinr * own_power * uncapped_power /
               (own_power + uncapped_power * sinr);
        for (double m : capped_received)
            lhs += inv_processing_gain * sinr * own_power * m / (own_power + m * sinr);
        return lhs - own_power;
    };
    return bisect(excess, 0.0, own_power / noise_half);
}

}  // namespace

ConstrainedProfile constrained_profile(const SystemConfig& config, double target_sinr,
                                       double max_power, QuantileMode mode) {
    if (!(max_power > 0.0))
        throw std::invalid_argument("constrained_profile: P_max must be positive");
    ConstrainedProfile out;
    out.gains = quantile_gains(config.fading, config.num_paths, config.num_users, mode);
    const double load = config.load();
    const double noise_half = config.noise_half;
    const int num_users = config.num_users;
    const double inv_n = 1.0 / config.processing_gain;
    if (!(load < feasible_load_bound(ReceiverKind::Mmse, target_sinr, config.num_paths)))
        return out;
    out.feasible = true;

    const double unconstrained_received = equal_received_power(
        load, target_sinr, noise_half, ReceiverKind::Mmse, config.num_paths);

    // Users whose unconstrained transmit power exceeds the cap; by the
    // order-statistics grid these are the weakest gains, i.e. a suffix.
    int num_capped = 0;
    for (int k = 0; k < num_users; ++k)
        if (!(unconstrained_received / out.gains[k] <= max_power)) ++num_capped;
    out.num_capped = num_capped;
    const int num_uncapped = num_users - num_capped;

    std::vector<double> capped_received(num_capped);
    for (int i = 0; i < num_capped; ++i)
        capped_received[i] = max_power * out.gains[num_uncapped + i];

    double received = unconstrained_received;
    if (num_capped > 0) {
        // Common received power of the uncapped users when the capped ones
        // contribute only their reduced interference.
        auto excess = [&](double p) {
            double value = 1.0 / target_sinr - noise_half / p -
                           num_uncapped * inv_n / (1.0 + target_sinr);
            for (double m : capped_received) value -= inv_n * m / (p + m * target_sinr);
            return value;
        };
        received = bisect_expanding(excess, noise_half * target_sinr,
                                    2.0 * noise_half * target_sinr);
    }
    out.received_power = received;

    out.powers.resize(num_users);
    out.sinrs.resize(num_users);
    out.utilities.resize(num_users);
    out.capped.resize(num_users);
    for (int k = 0; k < num_users; ++k) {
        // The capped set stays the one the interference model was built on
        // (single pass); members transmit at the cap even when the re-solved
        // received power would ask for slightly less.
        const bool at_cap = k >= num_uncapped;
        out.capped[k] = at_cap;
        out.powers[k] = at_cap ? max_power : received / out.gains[k];
        if (!at_cap) {
            out.sinrs[k] = target_sinr;
        } else {
            std::vector<double> others;
            others.reserve(capped_received.size());
            for (int i = 0; i < num_capped; ++i)
                if (num_uncapped + i != k) others.push_back(capped_received[i]);
            out.sinrs[k] = capped_user_sinr(max_power * out.gains[k], received, num_uncapped,
                                            others, inv_n, noise_half);
        }
        out.utilities[k] = utility(out.powers[k], out.sinrs[k], config);
    }
    return out;
}

}  // namespace eepc

#include "eepc/game.hpp"

#include <cmath>
#include <stdexcept>

#include "eepc/receivers.hpp"
#include "eepc/rootfind.hpp"

namespace eepc {

double EfficiencyFunction::operator()(double sinr) const {
    if (sinr <= 0.0) return 0.0;
    return std::pow(-std::expm1(-0.5 * sinr), packet_length);
}

double EfficiencyFunction::derivative(double sinr) const {
    if (sinr <= 0.0) return 0.0;
    const double base = -std::expm1(-0.5 * sinr);
    return 0.5 * packet_length * std::pow(base, packet_length - 1) * std::exp(-0.5 * sinr);
}

double solve_target_sinr(int packet_length) {
    if (packet_length < 2)
        throw std::invalid_argument("solve_target_sinr: packet length must be >= 2");
    // In x = sinr/2 the stationarity condition reads exp(x) = 1 + B x, with a
    // single positive root for B >= 2.
    const double b = static_cast<double>(packet_length);
    auto residual = [b](double x) { return std::expm1(x) - b * x; };
    double hi = 1.0;
    while (residual(hi) <= 0.0) hi *= 2.0;
    const double x = bisect(residual, 1.0 / b, hi, {1e-12, 200});
    return 2.0 * x;
}

double utility(double power, double sinr, double data_rate, int packet_length,
               int training_symbols) {
    if (!(power > 0.0)) throw std::invalid_argument("utility: power must be positive");
    const double overhead = static_cast<double>(packet_length - training_symbols) / packet_length;
    return data_rate * overhead * EfficiencyFunction{packet_length}(sinr) / power;
}

double utility(double power, double sinr, const SystemConfig& config) {
    return utility(power, sinr, config.data_rate, config.packet_length, config.training_symbols);
}

double best_response_power(double power, double sinr, double target_sinr, double max_power) {
    return std::min(power * (target_sinr / sinr), max_power);
}

namespace {

// Matched filter and decorrelator directions do not depend on the powers, so
// their SINRs reduce to a weighted sum over precomputed correlations.
struct FixedFilterTerms {
    Eigen::VectorXd filter;
    Eigen::VectorXd column_corr_sq;  // squared correlations with every composite column
    double desired_corr = 0.0;
    double norm_sq = 0.0;
};

double fixed_filter_sinr(const FixedFilterTerms& t, const Eigen::VectorXd& powers,
                         double noise_half, int user) {
    double total = noise_half * t.norm_sq;
    const int users = static_cast<int>(powers.size());
    for (int h = 0; h < users; ++h)
        total += powers[h] * (t.column_corr_sq[2 * h] + t.column_corr_sq[2 * h + 1]);
    const double signal = powers[user] * t.desired_corr * t.desired_corr;
    return signal / (total - signal);
}

}  // namespace

EquilibriumResult run_equilibrium(const Scenario& scenario, ReceiverKind receiver,
                                  const EquilibriumOptions& options) {
    const SystemConfig& cfg = scenario.config;
    cfg.validate();
    const int users = cfg.num_users;
    const double target = solve_target_sinr(cfg.packet_length);
    const double max_power = cfg.max_power;

    std::vector<ObserverFrame> frames(users);
    for (int k = 0; k < users; ++k) frames[k] = build_observer_frame(scenario, k);

    std::vector<FixedFilterTerms> fixed(users);
    if (receiver != ReceiverKind::Mmse) {
        for (int k = 0; k < users; ++k) {
            Eigen::VectorXd x = frames[k].desired_proj;
            if (receiver == ReceiverKind::Decorrelator) {
                const Eigen::MatrixXd nuisance = nuisance_columns_projected(frames[k]);
                if (nuisance.cols() > 0) {
                    if (nuisance.cols() >= x.size())
                        throw InfeasibleError(
                            "decorrelator: nuisance count reaches the projected dimension");
                    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(nuisance);
                    x -= nuisance * cod.solve(frames[k].desired_proj);
                    if (x.norm() <= 1e-10 * frames[k].desired_proj.norm())
                        throw InfeasibleError(
                            "decorrelator: desired signature lies in the nuisance span");
                }
            }
            fixed[k].filter = x;
            fixed[k].column_corr_sq =
                (frames[k].composites_proj.transpose() * x).array().square();
            fixed[k].desired_corr = frames[k].desired_proj.dot(x);
            fixed[k].norm_sq = x.squaredNorm();
        }
    }

    EquilibriumResult result;
    const double p0 = options.initial_power > 0.0 ? options.initial_power : cfg.noise_half;
    Eigen::VectorXd powers = Eigen::VectorXd::Constant(users, p0);
    Eigen::VectorXd sinrs = Eigen::VectorXd::Zero(users);
    std::vector<bool> capped(users, false);
    if (options.record_trace) result.trace.push_back(powers);

    bool converged = false;
    int iteration = 0;
    while (iteration < options.max_iterations && !converged) {
        ++iteration;
        if (receiver == ReceiverKind::Mmse) {
            for (int k = 0; k < users; ++k)
                sinrs[k] = run_receiver(ReceiverKind::Mmse, frames[k], powers, cfg.noise_half).sinr;
        } else {
            for (int k = 0; k < users; ++k)
                sinrs[k] = fixed_filter_sinr(fixed[k], powers, cfg.noise_half, k);
        }

        converged = true;
        for (int k = 0; k < users; ++k) {
            const double unconstrained = powers[k] * (target / sinrs[k]);
            if (unconstrained >= max_power) {
                converged = converged && powers[k] == max_power;
                powers[k] = max_power;
                capped[k] = true;
            } else {
                converged = converged && std::abs(sinrs[k] - target) <= options.sinr_tolerance * target;
                powers[k] = unconstrained;
                capped[k] = false;
            }
            if (!std::isfinite(powers[k])) {
                converged = false;
                iteration = options.max_iterations;  // diverged, stop updating
            }
        }
        if (options.record_trace) result.trace.push_back(powers);
    }

    // Final filter pass so the reported SINRs match the reported powers.
    if (powers.allFinite()) {
        if (receiver == ReceiverKind::Mmse) {
            for (int k = 0; k < users; ++k)
                sinrs[k] = run_receiver(ReceiverKind::Mmse, frames[k], powers, cfg.noise_half).sinr;
        } else {
            for (int k = 0; k < users; ++k)
                sinrs[k] = fixed_filter_sinr(fixed[k], powers, cfg.noise_half, k);
        }
    }

    result.powers = powers;
    result.sinrs = sinrs;
    result.utilities = Eigen::VectorXd(users);
    for (int k = 0; k < users; ++k)
        result.utilities[k] =
            std::isfinite(powers[k]) ? utility(powers[k], sinrs[k], cfg) : 0.0;
    result.iterations = iteration;
    result.converged = converged;
    for (int k = 0; k < users; ++k)
        if (capped[k]) result.capped.push_back(k);
    return result;
}

}  // namespace eepc

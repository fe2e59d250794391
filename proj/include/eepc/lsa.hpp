#pragma once

#include <span>
#include <utility>
#include <vector>

#include "eepc/config.hpp"

// Large-system closed forms: the asymptotic SINR multiplier fixed points, the
// decentralized power rules per receiver, order-statistics profile prediction,
// training-length optimization and the capped-power procedure.

namespace eepc {

// Effective-interference kernel a / (1 + a b).
inline double effective_interference(double a, double b) { return a / (1.0 + a * b); }

// Largest load (users per chip) at which the target SINR stays reachable.
double feasible_load_bound(ReceiverKind kind, double target_sinr, int paths);

// MMSE data-detection multiplier with all interferers received at the same
// power: unique root of
//   beta = 1 / (noise_half + load ((L-1) I(xi_sq, beta) + I(P + xi_sq, beta))).
double solve_beta_data(double load, double noise_half, double received_power, double xi_sq,
                       int paths);

struct LsaInterferer {
    double received_power = 0.0;
    double xi_sq = 0.0;  // channel estimation error variance
};

// General per-user form of the same fixed point; inv_processing_gain is 1/N.
double solve_beta_data_general(double noise_half, std::span<const LsaInterferer> interferers,
                               double inv_processing_gain, int paths);

// Asymptotic MMSE output SINR: p g_est beta / (1 + xi_sq beta).
double asymptotic_sinr(double power, double gain_estimate, double xi_sq, double beta_data);

// Equal received power making the asymptotic SINR hit the target:
// target_sinr * noise_half / (1 - load / bound).
double equal_received_power(double load, double target_sinr, double noise_half,
                            ReceiverKind kind, int paths);

struct DecentralizedPower {
    bool feasible = false;
    double power = 0.0;
    double load_bound = 0.0;  // the limit that binds this receiver
};

// Transmit power needed by a user of the given composite gain, from its own
// channel knowledge only. Infeasible when the load reaches the receiver bound.
DecentralizedPower decentralized_power(double composite_gain, double load, double target_sinr,
                                       double noise_half, ReceiverKind kind, int paths);

// Inverse-CDF grid of composite gains, strongest user first.
//   Exact: F^{-1}((K-k)/K), k = 1..K (weakest entry is F^{-1}(0) = 0)
//   Midpoint:   F^{-1}((K-k+1/2)/K)
std::vector<double> quantile_gains(const FadingModel& fading, int paths, int num_users,
                                   QuantileMode mode);

struct LsaPrediction {
    double beta_data = 0.0;
    double received_power = 0.0;
    std::vector<double> gains;      // quantile grid used
    std::vector<double> powers;
    std::vector<double> utilities;
    bool feasible = false;
    ReceiverKind receiver = ReceiverKind::Mmse;
};

// Power and utility profiles across users predicted from first-order fading
// statistics alone. Infeasible predictions carry no profile values.
LsaPrediction predict_profiles(const SystemConfig& config, double target_sinr,
                               ReceiverKind receiver, QuantileMode mode);

// Training-based channel estimation: error variance and its multiplier,
//   beta_c = 1 / (noise_half/N_T + (load L / N_T) P / (1 + P beta_c)),
//   xi_sq  = P / (1 + P beta_c),
// solved in closed form (stable quadratic root). Returns (xi_sq, beta_c).
std::pair<double, double> training_error_variance(double avg_received_power, int training_symbols,
                                                  double load, int paths, double noise_half);

// Data-detection multiplier when every user is received at the power that
// meets the target under estimation error xi_sq (coupled one-dimensional
// fixed point). Throws InfeasibleError past the MMSE load bound.
double solve_beta_data_training(double load, double noise_half, double xi_sq, double target_sinr,
                                int paths);

struct TrainingSweepPoint {
    int training_symbols = 0;  // N_T
    double xi_sq = 0.0;
    double beta_c = 0.0;
    double beta_d_star = 0.0;
    double mean_utility = 0.0;
    bool feasible = false;
};

TrainingSweepPoint training_point(const SystemConfig& config, double target_sinr,
                                  double avg_received_power, int training_symbols,
                                  QuantileMode mode);

struct TrainingSweep {
    std::vector<TrainingSweepPoint> points;  // training_symbols = 1 .. B-1
    int best_training_symbols = 0;           // first utility maximizer
};

// Sweeps the training length; avg_received_power <= 0 selects the
// unconstrained equal received power as the working point.
TrainingSweep training_sweep(const SystemConfig& config, double target_sinr,
                             double avg_received_power, QuantileMode mode);

struct ConstrainedProfile {
    bool feasible = false;
    double received_power = 0.0;   // common received power of uncapped users
    int num_capped = 0;            // u2
    std::vector<double> gains;
    std::vector<double> powers;
    std::vector<double> sinrs;
    std::vector<double> utilities;
    std::vector<bool> capped;
};

// Capped-power prediction (MMSE): counts the users whose unconstrained power
// exceeds max_power, re-solves the uncapped received power with the capped
// users contributing reduced interference, then applies the min rule.
ConstrainedProfile constrained_profile(const SystemConfig& config, double target_sinr,
                                       double max_power, QuantileMode mode);

}  // namespace eepc

#pragma once

#include <Eigen/Dense>
#include <vector>

#include "eepc/config.hpp"
#include "eepc/model.hpp"

// The non-cooperative power control game: each user tunes its transmit power
// toward the common target SINR while the receive filters track the current
// interference. Updates are Jacobi-style (all users simultaneously).

namespace eepc {

// Packet success proxy f(sinr) = (1 - exp(-sinr/2))^B.
struct EfficiencyFunction {
    int packet_length = 120;

    double operator()(double sinr) const;
    double derivative(double sinr) const;
};

// Unique positive root of f(g) = g f'(g), i.e. exp(g/2) = 1 + B g / 2.
// Requires packet_length >= 2 (the root degenerates to 0 at B = 1).
double solve_target_sinr(int packet_length);

// Bits reliably delivered per Joule: R ((B - N_T)/B) f(sinr) / power.
double utility(double power, double sinr, double data_rate, int packet_length,
               int training_symbols);
double utility(double power, double sinr, const SystemConfig& config);

// Multiplicative SINR-target update, capped at max_power.
double best_response_power(double power, double sinr, double target_sinr, double max_power);

struct EquilibriumOptions {
    int max_iterations = 500;
    double sinr_tolerance = 1e-6;     // relative, on uncapped users
    double initial_power = -1.0;      // < 0 means noise_half
    bool record_trace = false;        // keep per-iteration power vectors
};

struct EquilibriumResult {
    Eigen::VectorXd powers;
    Eigen::VectorXd sinrs;
    Eigen::VectorXd utilities;
    int iterations = 0;
    bool converged = false;
    std::vector<int> capped;                 // users held at max_power
    std::vector<Eigen::VectorXd> trace;      // filled when record_trace is set
};

// Alternates filter updates (per `receivers`) and power updates until every
// uncapped user sits at the target SINR. Throws InfeasibleError only when the
// decorrelator cannot be formed; plain non-convergence is reported in-band.
EquilibriumResult run_equilibrium(const Scenario& scenario, ReceiverKind receiver,
                                  const EquilibriumOptions& options = {});

}  // namespace eepc

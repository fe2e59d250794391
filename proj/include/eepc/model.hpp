#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "eepc/config.hpp"

// Discrete-time chip-level signal model: spreading codes, multipath channels,
// windowed signal replicas, the ISI-nulling projection and the received-vector
// covariance. Everything here is a pure function of its inputs.

namespace eepc {

struct MultipathChannel {
    std::vector<double> gains;   // signed path gains
    std::vector<int> delays;     // chip offsets, nondecreasing, delays[0] == 0
    double composite_gain = 0.0; // cached sum of squared gains

    // Validates the delay convention and caches the composite gain.
    static MultipathChannel make(std::vector<double> gains, std::vector<int> delays);
};

// Random binary spreading code, entries +-1/sqrt(N), deterministic in
// (seed, user_index).
Eigen::VectorXd generate_code(std::uint64_t seed, int user_index, int n_chips);

struct WindowedReplica {
    Eigen::VectorXd current;   // chips of the current symbol visible in the window
    Eigen::VectorXd previous;  // tail of the previous symbol
};

// Splits a code delayed by `delay` chips across the observation window:
// current[delay..N-1] = code[0..N-1-delay], previous[0..delay-1] = code[N-delay..N-1].
WindowedReplica build_windowed_replicas(const Eigen::VectorXd& code, int delay);

// Orthonormal basis of the subspace orthogonal to isi_vector: N x (N-1)
// columns when the vector is nonzero, the N x N identity in the ISI-free
// degenerate case.
Eigen::MatrixXd isi_null_basis(const Eigen::VectorXd& isi_vector, double tol = 1e-12);

// A user's own-window signal structure.
struct UserSignals {
    Eigen::VectorXd code;
    std::vector<Eigen::VectorXd> replicas_current;
    std::vector<Eigen::VectorXd> replicas_previous;
    Eigen::VectorXd composite_current;  // sum_l gain_l * replica_l
    Eigen::VectorXd isi_vector;         // sum_l gain_l * previous-symbol replica_l
    Eigen::MatrixXd isi_null;           // basis orthogonal to isi_vector
};

UserSignals build_user_signals(const Eigen::VectorXd& code, const MultipathChannel& channel);

// One full scenario realization. Offsets are per-user chip offsets relative
// to a common clock; each user's own observation window starts at its own
// first-arriving path.
struct Scenario {
    SystemConfig config;
    std::vector<Eigen::VectorXd> codes;
    std::vector<MultipathChannel> channels;
    std::vector<int> offsets;
    long trial_index = 0;
};

// Composite (current, previous) pair of one user's signal as seen in a window
// shifted rel_offset chips earlier. Effective per-path delays wrap modulo N,
// so every user contributes exactly two adjacent symbols to the window.
WindowedReplica window_composite(const Eigen::VectorXd& code, const MultipathChannel& channel,
                                 int rel_offset, int n_chips);

// Everything the receivers need about one user's observation window,
// precomputed once per scenario: the composite vectors of all users windowed
// to this user's interval, the ISI-nulling basis and the projected copies.
struct ObserverFrame {
    int user = 0;
    Eigen::VectorXd desired;           // own current-symbol composite
    Eigen::MatrixXd composites;        // N x 2K, columns [u0 cur, u0 prev, u1 cur, ...]
    Eigen::MatrixXd isi_null;
    Eigen::VectorXd desired_proj;      // isi_null^T * desired
    Eigen::MatrixXd composites_proj;   // isi_null^T * composites
};

ObserverFrame build_observer_frame(const Scenario& scenario, int user);

// Received-vector covariance in user `target_user`'s window under equiprobable
// iid +-1 symbols: sum_h p_h (cur_h cur_h^T + prev_h prev_h^T) + noise_half * I.
Eigen::MatrixXd assemble_covariance(const ObserverFrame& frame, const Eigen::VectorXd& powers,
                                    double noise_half);
Eigen::MatrixXd assemble_covariance(const Scenario& scenario, const Eigen::VectorXd& powers,
                                    int target_user);

// Same covariance restricted to the ISI-nulled subspace,
// isi_null^T M isi_null, assembled directly from the projected composites.
Eigen::MatrixXd assemble_covariance_projected(const ObserverFrame& frame,
                                              const Eigen::VectorXd& powers, double noise_half);

}  // namespace eepc

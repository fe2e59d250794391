#pragma once

#include <Eigen/Dense>

#include "eepc/config.hpp"
#include "eepc/model.hpp"

// Linear detectors on the ISI-nulled observation space and the exact output
// SINR of an arbitrary filter.

namespace eepc {

struct FilterResult {
    Eigen::VectorXd filter;  // lives in the projected space
    double sinr = 0.0;
};

// Output SINR of filter x against the projected covariance:
//   sinr = p (x^T h)^2 / (x^T (M_proj - p h h^T) x)
// with h the projected desired composite. The subtraction removes the desired
// current-symbol contribution; own ISI is already nulled by the projection.
double output_sinr(const Eigen::VectorXd& filter, const Eigen::MatrixXd& cov_proj,
                   const Eigen::VectorXd& desired_proj, double power);

// SINR-maximizing filter x = sqrt(p) M_proj^{-1} h, solved via LDLT.
FilterResult mmse_filter_projected(const Eigen::MatrixXd& cov_proj,
                                   const Eigen::VectorXd& desired_proj, double power);

// x = h.
FilterResult matched_filter_projected(const Eigen::MatrixXd& cov_proj,
                                      const Eigen::VectorXd& desired_proj, double power);

// Zero-forcer: projects h off the span of the nuisance columns via a
// rank-revealing least squares solve. Throws InfeasibleError when the
// nuisance subspace leaves no room for the desired signal.
FilterResult decorrelating_filter_projected(const Eigen::MatrixXd& cov_proj,
                                            const Eigen::VectorXd& desired_proj,
                                            const Eigen::MatrixXd& nuisance_proj, double power);

// Wrappers taking the unprojected covariance and the ISI-null basis.
FilterResult mmse_filter(const Eigen::MatrixXd& cov, const Eigen::MatrixXd& isi_null,
                         const Eigen::VectorXd& desired, double power);
FilterResult matched_filter(const Eigen::MatrixXd& cov, const Eigen::MatrixXd& isi_null,
                            const Eigen::VectorXd& desired, double power);
FilterResult decorrelating_filter(const Eigen::MatrixXd& cov, const Eigen::MatrixXd& isi_null,
                                  const Eigen::VectorXd& desired,
                                  const Eigen::MatrixXd& nuisance_vectors, double power);

// Interfering users' composite columns (current and previous symbol) from an
// observer frame, already projected; input to the decorrelator.
Eigen::MatrixXd nuisance_columns_projected(const ObserverFrame& frame);

// Dispatch on receiver kind against a precomputed frame and power vector.
FilterResult run_receiver(ReceiverKind kind, const ObserverFrame& frame,
                          const Eigen::VectorXd& powers, double noise_half);

}  // namespace eepc

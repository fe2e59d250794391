#include "eepc/receivers.hpp"

#include <cmath>
#include <stdexcept>

namespace eepc {

double output_sinr(const Eigen::VectorXd& filter, const Eigen::MatrixXd& cov_proj,
                   const Eigen::VectorXd& desired_proj, double power) {
    const double signal_corr = filter.dot(desired_proj);
    const double numerator = power * signal_corr * signal_corr;
    const double denominator = filter.dot(cov_proj * filter) - numerator;
    if (denominator <= 0.0)
        throw std::runtime_error("output_sinr: nonpositive interference-plus-noise energy");
    return numerator / denominator;
}

FilterResult mmse_filter_projected(const Eigen::MatrixXd& cov_proj,
                                   const Eigen::VectorXd& desired_proj, double power) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(cov_proj);
    if (ldlt.info() != Eigen::Success)
        throw std::runtime_error("mmse_filter: projected covariance not positive definite");
    FilterResult out;
    out.filter = std::sqrt(power) * ldlt.solve(desired_proj);
    out.sinr = output_sinr(out.filter, cov_proj, desired_proj, power);
    return out;
}

FilterResult matched_filter_projected(const Eigen::MatrixXd& cov_proj,
                                      const Eigen::VectorXd& desired_proj, double power) {
    if (desired_proj.norm() == 0.0)
        throw std::invalid_argument("matched_filter: zero composite signature");
    FilterResult out;
    out.filter = desired_proj;
    out.sinr = output_sinr(out.filter, cov_proj, desired_proj, power);
    return out;
}

FilterResult decorrelating_filter_projected(const Eigen::MatrixXd& cov_proj,
                                            const Eigen::VectorXd& desired_proj,
                                            const Eigen::MatrixXd& nuisance_proj, double power) {
    const auto dim = desired_proj.size();
    FilterResult out;
    if (nuisance_proj.cols() == 0) {
        out.filter = desired_proj;
    } else {
        if (nuisance_proj.cols() >= dim)
            throw InfeasibleError("decorrelator: nuisance count reaches the projected dimension");
        // Residual of the least-squares fit of the desired vector onto the
        // nuisance span; the rank-revealing solve tolerates dependent columns.
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(nuisance_proj);
        out.filter = desired_proj - nuisance_proj * cod.solve(desired_proj);
        if (out.filter.norm() <= 1e-10 * desired_proj.norm())
            throw InfeasibleError("decorrelator: desired signature lies in the nuisance span");
    }
    out.sinr = output_sinr(out.filter, cov_proj, desired_proj, power);
    return out;
}

namespace {

Eigen::MatrixXd project_covariance(const Eigen::MatrixXd& cov, const Eigen::MatrixXd& isi_null) {
    return isi_null.transpose() * cov * isi_null;
}

}  // namespace

FilterResult mmse_filter(const Eigen::MatrixXd& cov, const Eigen::MatrixXd& isi_null,
                         const Eigen::VectorXd& desired, double power) {
    return mmse_filter_projected(project_covariance(cov, isi_null),
                                 isi_null.transpose() * desired, power);
}

FilterResult matched_filter(const Eigen::MatrixXd& cov, const Eigen::MatrixXd& isi_null,
                            const Eigen::VectorXd& desired, double power) {
    return matched_filter_projected(project_covariance(cov, isi_null),
                                    isi_null.transpose() * desired, power);
}

FilterResult decorrelating_filter(const Eigen::MatrixXd& cov, const Eigen::MatrixXd& isi_null,
                                  const Eigen::VectorXd& desired,
                                  const Eigen::MatrixXd& nuisance_vectors, double power) {
    return decorrelating_filter_projected(project_covariance(cov, isi_null),
                                          isi_null.transpose() * desired,
                                          isi_null.transpose() * nuisance_vectors, power);
}

Eigen::MatrixXd nuisance_columns_projected(const ObserverFrame& frame) {
    const auto dim = frame.composites_proj.rows();
    const int users = static_cast<int>(frame.composites_proj.cols() / 2);
    Eigen::MatrixXd nuisance(dim, 2 * (users - 1));
    int col = 0;
    for (int h = 0; h < users; ++h) {
        if (h == frame.user) continue;
        nuisance.col(col++) = frame.composites_proj.col(2 * h);
        nuisance.col(col++) = frame.composites_proj.col(2 * h + 1);
    }
    return nuisance;
}

FilterResult run_receiver(ReceiverKind kind, const ObserverFrame& frame,
                          const Eigen::VectorXd& powers, double noise_half) {
    const Eigen::MatrixXd cov_proj = assemble_covariance_projected(frame, powers, noise_half);
    const double own_power = powers[frame.user];
    switch (kind) {
        case ReceiverKind::Mmse:
            return mmse_filter_projected(cov_proj, frame.desired_proj, own_power);
        case ReceiverKind::MatchedFilter:
            return matched_filter_projected(cov_proj, frame.desired_proj, own_power);
        case ReceiverKind::Decorrelator:
            return decorrelating_filter_projected(cov_proj, frame.desired_proj,
                                                  nuisance_columns_projected(frame), own_power);
    }
    throw std::logic_error("run_receiver: unknown receiver kind");
}

}  // namespace eepc

#include "eepc/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "eepc/rng.hpp"

namespace eepc {

MultipathChannel MultipathChannel::make(std::vector<double> gains, std::vector<int> delays) {
    if (gains.empty() || gains.size() != delays.size())
        throw std::invalid_argument("channel: gains/delays size mismatch");
    if (delays.front() != 0) throw std::invalid_argument("channel: first path delay must be 0");
    if (!std::is_sorted(delays.begin(), delays.end()))
        throw std::invalid_argument("channel: delays must be nondecreasing");
    MultipathChannel ch;
    ch.gains = std::move(gains);
    ch.delays = std::move(delays);
    ch.composite_gain = 0.0;
    for (double g : ch.gains) ch.composite_gain += g * g;
    return ch;
}

Eigen::VectorXd generate_code(std::uint64_t seed, int user_index, int n_chips) {
    if (n_chips < 1) throw std::invalid_argument("generate_code: N must be >= 1");
    auto rng = make_rng(mix64(seed, stream::code, static_cast<std::uint64_t>(user_index)));
    const double chip = 1.0 / std::sqrt(static_cast<double>(n_chips));
    Eigen::VectorXd code(n_chips);
    for (int i = 0; i < n_chips; ++i) code[i] = (rng() & 1u) ? chip : -chip;
    return code;
}

namespace {

WindowedReplica split_at_delay(const Eigen::VectorXd& code, int delay) {
    const int n = static_cast<int>(code.size());
    WindowedReplica out;
    out.current = Eigen::VectorXd::Zero(n);
    out.previous = Eigen::VectorXd::Zero(n);
    out.current.segment(delay, n - delay) = code.head(n - delay);
    out.previous.head(delay) = code.tail(delay);
    return out;
}

}  // namespace

WindowedReplica build_windowed_replicas(const Eigen::VectorXd& code, int delay) {
    const int n = static_cast<int>(code.size());
    if (delay < 0 || delay >= n) throw std::out_of_range("build_windowed_replicas: delay");
    return split_at_delay(code, delay);
}

Eigen::MatrixXd isi_null_basis(const Eigen::VectorXd& isi_vector, double tol) {
    const int n = static_cast<int>(isi_vector.size());
    if (isi_vector.norm() <= tol) return Eigen::MatrixXd::Identity(n, n);
    // Householder QR of the single column: the trailing N-1 columns of Q span
    // the orthogonal complement.
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(isi_vector);
    Eigen::MatrixXd q = qr.householderQ();
    return q.rightCols(n - 1);
}

UserSignals build_user_signals(const Eigen::VectorXd& code, const MultipathChannel& channel) {
    const int n = static_cast<int>(code.size());
    const int paths = static_cast<int>(channel.gains.size());
    UserSignals s;
    s.code = code;
    s.replicas_current.reserve(paths);
    s.replicas_previous.reserve(paths);
    s.composite_current = Eigen::VectorXd::Zero(n);
    s.isi_vector = Eigen::VectorXd::Zero(n);
    for (int l = 0; l < paths; ++l) {
        WindowedReplica rep = build_windowed_replicas(code, channel.delays[l]);
        s.composite_current += channel.gains[l] * rep.current;
        s.isi_vector += channel.gains[l] * rep.previous;
        s.replicas_current.push_back(std::move(rep.current));
        s.replicas_previous.push_back(std::move(rep.previous));
    }
    s.isi_null = isi_null_basis(s.isi_vector);
    return s;
}

WindowedReplica window_composite(const Eigen::VectorXd& code, const MultipathChannel& channel,
                                 int rel_offset, int n_chips) {
    WindowedReplica acc;
    acc.current = Eigen::VectorXd::Zero(n_chips);
    acc.previous = Eigen::VectorXd::Zero(n_chips);
    const int paths = static_cast<int>(channel.gains.size());
    for (int l = 0; l < paths; ++l) {
        const int delay = (rel_offset + channel.delays[l]) % n_chips;
        WindowedReplica rep = split_at_delay(code, delay);
        acc.current += channel.gains[l] * rep.current;
        acc.previous += channel.gains[l] * rep.previous;
    }
    return acc;
}

ObserverFrame build_observer_frame(const Scenario& scenario, int user) {
    const SystemConfig& cfg = scenario.config;
    const int n = cfg.processing_gain;
    const int k = cfg.num_users;
    if (user < 0 || user >= k) throw std::out_of_range("build_observer_frame: user");

    ObserverFrame frame;
    frame.user = user;
    frame.composites.resize(n, 2 * k);
    const int base = scenario.offsets[user];
    for (int h = 0; h < k; ++h) {
        const int rel = ((scenario.offsets[h] - base) % n + n) % n;
        WindowedReplica comp = window_composite(scenario.codes[h], scenario.channels[h], rel, n);
        frame.composites.col(2 * h) = comp.current;
        frame.composites.col(2 * h + 1) = comp.previous;
    }
    frame.desired = frame.composites.col(2 * user);
    frame.isi_null = isi_null_basis(frame.composites.col(2 * user + 1));
    frame.desired_proj = frame.isi_null.transpose() * frame.desired;
    frame.composites_proj = frame.isi_null.transpose() * frame.composites;
    return frame;
}

namespace {

Eigen::MatrixXd covariance_from_columns(const Eigen::MatrixXd& columns,
                                        const Eigen::VectorXd& powers, double noise_half) {
    const int dim = static_cast<int>(columns.rows());
    const int users = static_cast<int>(powers.size());
    Eigen::MatrixXd scaled(dim, 2 * users);
    for (int h = 0; h < users; ++h) {
        const double root = std::sqrt(powers[h]);
        scaled.col(2 * h) = root * columns.col(2 * h);
        scaled.col(2 * h + 1) = root * columns.col(2 * h + 1);
    }
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim, dim);
    cov.selfadjointView<Eigen::Lower>().rankUpdate(scaled);
    cov.diagonal().array() += noise_half;
    return cov.selfadjointView<Eigen::Lower>();
}

}  // namespace

Eigen::MatrixXd assemble_covariance(const ObserverFrame& frame, const Eigen::VectorXd& powers,
                                    double noise_half) {
    if (2 * powers.size() != frame.composites.cols())
        throw std::invalid_argument("assemble_covariance: powers dimension mismatch");
    if ((powers.array() < 0.0).any())
        throw std::invalid_argument("assemble_covariance: negative power");
    return covariance_from_columns(frame.composites, powers, noise_half);
}

Eigen::MatrixXd assemble_covariance(const Scenario& scenario, const Eigen::VectorXd& powers,
                                    int target_user) {
    return assemble_covariance(build_observer_frame(scenario, target_user), powers,
                               scenario.config.noise_half);
}

Eigen::MatrixXd assemble_covariance_projected(const ObserverFrame& frame,
                                              const Eigen::VectorXd& powers, double noise_half) {
    if (2 * powers.size() != frame.composites_proj.cols())
        throw std::invalid_argument("assemble_covariance_projected: powers dimension mismatch");
    return covariance_from_columns(frame.composites_proj, powers, noise_half);
}

}  // namespace eepc

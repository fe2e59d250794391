#include "eepc/config.hpp"

#include <algorithm>
#include <boost/math/distributions/gamma.hpp>
#include <cmath>

#include "eepc/rng.hpp"

namespace eepc {

const char* to_string(ReceiverKind kind) {
    switch (kind) {
        case ReceiverKind::Mmse: return "mmse";
        case ReceiverKind::MatchedFilter: return "mf";
        case ReceiverKind::Decorrelator: return "dec";
    }
    return "?";
}

const char* to_string(QuantileMode mode) {
    return mode == QuantileMode::Midpoint ? "midpoint" : "exact";
}

const char* to_string(PowerRule rule) {
    return rule == PowerRule::GameIteration ? "game" : "lsa";
}

const char* to_string(FadingKind kind) {
    return kind == FadingKind::RealGaussianPaths ? "gaussian" : "exponential";
}

ReceiverKind parse_receiver(const std::string& name) {
    if (name == "mmse") return ReceiverKind::Mmse;
    if (name == "mf" || name == "matched-filter") return ReceiverKind::MatchedFilter;
    if (name == "dec" || name == "decorrelator") return ReceiverKind::Decorrelator;
    throw std::invalid_argument("unknown receiver: " + name);
}

QuantileMode parse_quantile_mode(const std::string& name) {
    if (name == "midpoint") return QuantileMode::Midpoint;
    if (name == "exact") return QuantileMode::Exact;
    throw std::invalid_argument("unknown quantile mode: " + name);
}

PowerRule parse_power_rule(const std::string& name) {
    if (name == "game") return PowerRule::GameIteration;
    if (name == "lsa") return PowerRule::LsaClosedForm;
    throw std::invalid_argument("unknown power rule: " + name);
}

FadingKind parse_fading_kind(const std::string& name) {
    if (name == "gaussian") return FadingKind::RealGaussianPaths;
    if (name == "exponential") return FadingKind::ExponentialPathPower;
    throw std::invalid_argument("unknown fading kind: " + name);
}

namespace {

// Composite gain ~ Gamma(shape, scale) for both fading kinds.
boost::math::gamma_distribution<double> composite_distribution(const FadingModel& fading,
                                                               int paths) {
    if (fading.kind == FadingKind::ExponentialPathPower) {
        return {static_cast<double>(paths), fading.scale};
    }
    // chi-squared with `paths` degrees of freedom, scaled by scale/paths
    return {0.5 * paths, 2.0 * fading.scale / paths};
}

}  // namespace

double FadingModel::composite_cdf(double x, int paths) const {
    if (x <= 0.0) return 0.0;
    return boost::math::cdf(composite_distribution(*this, paths), x);
}

double FadingModel::composite_quantile(double q, int paths) const {
    if (q <= 0.0) return 0.0;
    return boost::math::quantile(composite_distribution(*this, paths), q);
}

double FadingModel::composite_pdf(double x, int paths) const {
    if (x <= 0.0) return 0.0;
    return boost::math::pdf(composite_distribution(*this, paths), x);
}

double FadingModel::composite_mean(int paths) const {
    return kind == FadingKind::ExponentialPathPower ? paths * scale : scale;
}

void FadingModel::sample_gains(std::mt19937_64& rng, std::span<double> gains_out) const {
    const int paths = static_cast<int>(gains_out.size());
    if (kind == FadingKind::ExponentialPathPower) {
        for (double& g : gains_out) {
            const double power = sample_exponential(rng, scale);
            const double sign = uniform01(rng) < 0.5 ? -1.0 : 1.0;
            g = sign * std::sqrt(power);
        }
    } else {
        const double sd = std::sqrt(scale / paths);
        for (double& g : gains_out) g = sd * sample_normal(rng);
    }
}

int SystemConfig::effective_delay_spread() const {
    if (delay_spread >= 0) return delay_spread;
    return std::max(num_paths - 1, processing_gain / 32);
}

void SystemConfig::validate() const {
    auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
    if (num_users < 1) fail("K must be >= 1");
    if (processing_gain < 1) fail("N must be >= 1");
    if (num_paths < 1) fail("L must be >= 1");
    if (num_paths >= processing_gain) fail("L must be < N");
    if (packet_length < 2) fail("B must be >= 2");
    if (training_symbols < 0 || training_symbols >= packet_length)
        fail("N_T must satisfy 0 <= N_T < B");
    if (!(data_rate > 0.0)) fail("R must be positive");
    if (!(noise_half > 0.0)) fail("noise_psd_half must be positive");
    if (!(max_power > 0.0)) fail("P_max must be positive");
    if (!(fading.scale > 0.0)) fail("fading.scale must be positive");
    const int spread = effective_delay_spread();
    if (spread >= processing_gain) fail("delay_spread must be < N");
    if (spread < num_paths - 1) fail("delay_spread must allow L-1 distinct path delays");
    if (offset_spread < 0 || offset_spread >= processing_gain)
        fail("offset_spread must satisfy 0 <= offset_spread < N");
}

}  // namespace eepc

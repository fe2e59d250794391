#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>

namespace eepc {

inline constexpr const char* kVersion = "0.1.0";

enum class ReceiverKind { Mmse, MatchedFilter, Decorrelator };
enum class QuantileMode { Midpoint, Exact };
enum class PowerRule { GameIteration, LsaClosedForm };
enum class FadingKind { RealGaussianPaths, ExponentialPathPower };

const char* to_string(ReceiverKind kind);
const char* to_string(QuantileMode mode);
const char* to_string(PowerRule rule);
const char* to_string(FadingKind kind);

ReceiverKind parse_receiver(const std::string& name);
QuantileMode parse_quantile_mode(const std::string& name);
PowerRule parse_power_rule(const std::string& name);
FadingKind parse_fading_kind(const std::string& name);

// Thrown when a requested operating point cannot support the target SINR
// (load beyond a receiver's limit, or a zero-forcer with no room left).
class InfeasibleError : public std::runtime_error {
  public:
    explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

// Per-user multipath fading law. The composite gain (sum of squared path
// gains) is Gamma-distributed under both kinds, which gives closed-form CDF
// and quantiles:
//   RealGaussianPaths:   path gains iid N(0, scale/L); composite mean = scale
//   ExponentialPathPower: squared path gains iid Exp(mean = scale) with random
//                         sign on the gain; composite mean = L * scale
struct FadingModel {
    FadingKind kind = FadingKind::RealGaussianPaths;
    double scale = 1.0;

    double composite_cdf(double x, int paths) const;
    double composite_quantile(double q, int paths) const;
    double composite_pdf(double x, int paths) const;
    double composite_mean(int paths) const;
    void sample_gains(std::mt19937_64& rng, std::span<double> gains_out) const;
};

// All scenario scalars. The load K/N is always derived, never stored.
struct SystemConfig {
    int num_users = 16;         // K
    int processing_gain = 64;   // N, chips per symbol
    int num_paths = 3;          // L, multipath replicas per user
    int packet_length = 120;    // B, symbols per packet
    int training_symbols = 0;   // N_T
    double data_rate = 1.0e5;   // R, bits/s
    double noise_half = 1.0e-3; // per-sample noise variance
    double max_power = std::numeric_limits<double>::infinity();
    // Multipath delays beyond the first path are distinct chips from
    // {1..delay_spread}; -1 selects max(L-1, N/32). User timing offsets are
    // uniform over {0..offset_spread}. Keeping both spreads well below N is
    // what makes the large-system forms (which neglect ISI) applicable;
    // spreads near N give a fully asynchronous system.
    int delay_spread = -1;
    int offset_spread = 0;
    FadingModel fading;
    std::uint64_t seed = 1;

    double load() const { return static_cast<double>(num_users) / processing_gain; }
    int effective_delay_spread() const;

    // Throws std::invalid_argument on any violated constraint.
    void validate() const;
};

}  // namespace eepc

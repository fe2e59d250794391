// Times the Monte Carlo trial engine: serial reference versus the OpenMP
// path, and checks that both produce bit-identical aggregates.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>

#include <omp.h>

#include "eepc/montecarlo.hpp"

namespace {

double run_once(const eepc::SystemConfig& config, int trials, eepc::ExecutionPolicy policy,
                double* checksum) {
    const auto start = std::chrono::steady_clock::now();
    const std::vector<eepc::TrialResult> results = eepc::run_trials(
        config, eepc::ReceiverKind::Mmse, eepc::PowerRule::GameIteration, trials, policy);
    const auto stop = std::chrono::steady_clock::now();
    double sum = 0.0;
    for (const eepc::TrialResult& r : results) sum += r.equilibrium.utilities.sum();
    *checksum = sum;
    return std::chrono::duration<double>(stop - start).count();
}

}  // namespace

int main(int argc, char** argv) {
    eepc::SystemConfig config;
    config.num_users = 24;
    config.processing_gain = 64;
    config.num_paths = 3;
    config.seed = 7;
    int trials = 32;
    for (int i = 1; i + 1 < argc; i += 2) {
        if (std::strcmp(argv[i], "--trials") == 0) trials = std::stoi(argv[i + 1]);
        else if (std::strcmp(argv[i], "--K") == 0) config.num_users = std::stoi(argv[i + 1]);
        else if (std::strcmp(argv[i], "--N") == 0) config.processing_gain = std::stoi(argv[i + 1]);
    }

    double serial_sum = 0.0, parallel_sum = 0.0;
    const double t_serial = run_once(config, trials, eepc::ExecutionPolicy::Serial, &serial_sum);
    const double t_parallel =
        run_once(config, trials, eepc::ExecutionPolicy::Parallel, &parallel_sum);

    std::printf("trials=%d K=%d N=%d threads=%d\n", trials, config.num_users,
                config.processing_gain, omp_get_max_threads());
    std::printf("serial:   %.3f s\n", t_serial);
    std::printf("parallel: %.3f s  (speedup %.2fx)\n", t_parallel, t_serial / t_parallel);
    if (serial_sum != parallel_sum) {
        std::printf("MISMATCH: serial and parallel aggregates differ\n");
        return 1;
    }
    std::printf("aggregates identical\n");
    return 0;
}

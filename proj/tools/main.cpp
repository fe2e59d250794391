// Command-line front end: resolves configuration from defaults, an optional
// key=value file and flag overrides (flags win), dispatches the experiment
// commands and writes CSV/JSON results plus a run manifest.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "eepc/csvio.hpp"
#include "eepc/game.hpp"
#include "eepc/lsa.hpp"
#include "eepc/montecarlo.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitNonConvergence = 3;

struct Settings {
    eepc::SystemConfig config;
    int trials = 100;
    std::string receiver = "mmse";
    std::string power_rule = "game";
    std::string quantile_mode = "midpoint";
    std::string out_dir;
    std::string k_grid;           // compare-receivers / training-sweep
    double received_power = 0.0;  // training-sweep working point; <= 0 means auto

    eepc::ReceiverKind receiver_kind() const { return eepc::parse_receiver(receiver); }
    eepc::PowerRule rule() const { return eepc::parse_power_rule(power_rule); }
    eepc::QuantileMode quantiles() const { return eepc::parse_quantile_mode(quantile_mode); }
};

double parse_positive_or_inf(const std::string& text, const std::string& key) {
    if (text == "inf" || text == "infinity") return std::numeric_limits<double>::infinity();
    try {
        return std::stod(text);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad value for " + key + ": " + text);
    }
}

// Plain key=value file, '#' starts a comment. Unknown keys are rejected.
void apply_config_file(Settings& s, const std::string& path,
                       const std::map<std::string, bool>& overridden) {
    std::ifstream file(path);
    if (!file) throw std::invalid_argument("cannot read config file: " + path);
    std::string line;
    int line_no = 0;
    while (std::getline(file, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        const auto eq = line.find('=');
        auto trim = [](std::string t) {
            const auto a = t.find_first_not_of(" \t\r");
            if (a == std::string::npos) return std::string();
            const auto b = t.find_last_not_of(" \t\r");
            return t.substr(a, b - a + 1);
        };
        if (eq == std::string::npos) {
            if (!trim(line).empty())
                throw std::invalid_argument(path + ":" + std::to_string(line_no) +
                                            ": expected key=value");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (auto it = overridden.find(key); it != overridden.end() && it->second)
            continue;  // a command-line flag wins
        if (key == "K") s.config.num_users = std::stoi(value);
        else if (key == "N") s.config.processing_gain = std::stoi(value);
        else if (key == "L") s.config.num_paths = std::stoi(value);
        else if (key == "B") s.config.packet_length = std::stoi(value);
        else if (key == "N_T") s.config.training_symbols = std::stoi(value);
        else if (key == "R") s.config.data_rate = std::stod(value);
        else if (key == "noise_psd_half") s.config.noise_half = std::stod(value);
        else if (key == "P_max") s.config.max_power = parse_positive_or_inf(value, key);
        else if (key == "delay_spread") s.config.delay_spread = std::stoi(value);
        else if (key == "offset_spread") s.config.offset_spread = std::stoi(value);
        else if (key == "fading.kind") s.config.fading.kind = eepc::parse_fading_kind(value);
        else if (key == "fading.scale") s.config.fading.scale = std::stod(value);
        else if (key == "seed") s.config.seed = std::stoull(value);
        else if (key == "trials") s.trials = std::stoi(value);
        else if (key == "receiver") s.receiver = value;
        else if (key == "power_rule") s.power_rule = value;
        else if (key == "quantile_mode") s.quantile_mode = value;
        else throw std::invalid_argument(path + ": unknown config key: " + key);
    }
}

std::vector<int> parse_user_grid(const std::string& text) {
    std::vector<int> grid;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        grid.push_back(std::stoi(item));
        if (grid.back() < 1) throw std::invalid_argument("K grid entries must be >= 1");
    }
    if (grid.empty()) throw std::invalid_argument("empty K grid");
    return grid;
}

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json config_to_json(const Settings& s) {
    const eepc::SystemConfig& c = s.config;
    json j;
    j["K"] = c.num_users;
    j["N"] = c.processing_gain;
    j["L"] = c.num_paths;
    j["B"] = c.packet_length;
    j["N_T"] = c.training_symbols;
    j["R"] = c.data_rate;
    j["noise_psd_half"] = c.noise_half;
    if (std::isfinite(c.max_power)) j["P_max"] = c.max_power;
    else j["P_max"] = "inf";
    j["delay_spread"] = c.delay_spread;
    j["offset_spread"] = c.offset_spread;
    j["fading.kind"] = eepc::to_string(c.fading.kind);
    j["fading.scale"] = c.fading.scale;
    j["seed"] = c.seed;
    j["trials"] = s.trials;
    j["receiver"] = s.receiver;
    j["power_rule"] = s.power_rule;
    j["quantile_mode"] = s.quantile_mode;
    return j;
}

fs::path resolve_out_dir(const Settings& s) {
    if (!s.out_dir.empty()) return s.out_dir;
    if (const char* env = std::getenv("EEPC_OUT_DIR"); env && *env) return env;
    return "out";
}

void write_manifest(const fs::path& dir, const std::string& command, const Settings& s,
                    const std::vector<std::string>& outputs, const json& extra) {
    json manifest;
    manifest["command"] = command;
    manifest["version"] = eepc::kVersion;
    manifest["timestamp"] = utc_timestamp();
    manifest["seed"] = s.config.seed;
    manifest["config"] = config_to_json(s);
    manifest["outputs"] = outputs;
    if (!extra.is_null()) manifest["extra"] = extra;
    std::ofstream file(dir / "manifest.json", std::ios::binary);
    file << manifest.dump(2) << '\n';
}

int cmd_predict(const Settings& s) {
    s.config.validate();
    const double target = eepc::solve_target_sinr(s.config.packet_length);
    const eepc::ReceiverKind kind = s.receiver_kind();
    const eepc::LsaPrediction pred =
        eepc::predict_profiles(s.config, target, kind, s.quantiles());
    if (!pred.feasible) {
        std::cerr << "infeasible: load " << s.config.load() << " reaches the "
                  << eepc::to_string(kind) << " bound "
                  << eepc::feasible_load_bound(kind, target, s.config.num_paths) << "\n";
        return kExitInfeasible;
    }
    eepc::CsvWriter csv({"k", "quantile_gain", "power", "utility", "receiver", "feasible"});
    for (std::size_t k = 0; k < pred.gains.size(); ++k)
        csv.add_row({eepc::cell(static_cast<int>(k + 1)), eepc::cell(pred.gains[k]),
                     eepc::cell(pred.powers[k]), eepc::cell(pred.utilities[k]),
                     eepc::to_string(kind), eepc::cell(true)});

    const fs::path dir = resolve_out_dir(s);
    fs::create_directories(dir);
    csv.write((dir / "profiles.csv").string());
    json extra;
    extra["target_sinr"] = target;
    extra["beta_d"] = pred.beta_data;
    extra["received_power"] = pred.received_power;
    write_manifest(dir, "predict", s, {"profiles.csv"}, extra);
    std::cout << "wrote " << (dir / "profiles.csv").string() << "\n";
    return kExitOk;
}

int cmd_simulate(const Settings& s) {
    s.config.validate();
    if (s.trials < 1) throw std::invalid_argument("trials must be >= 1");
    const double target = eepc::solve_target_sinr(s.config.packet_length);
    const eepc::ReceiverKind kind = s.receiver_kind();
    const eepc::PowerRule rule = s.rule();
    if (rule == eepc::PowerRule::LsaClosedForm &&
        !(s.config.load() < eepc::feasible_load_bound(kind, target, s.config.num_paths))) {
        std::cerr << "infeasible: load " << s.config.load() << " reaches the "
                  << eepc::to_string(kind) << " bound\n";
        return kExitInfeasible;
    }

    const std::vector<eepc::TrialResult> results =
        eepc::run_trials(s.config, kind, rule, s.trials, eepc::ExecutionPolicy::Parallel);
    for (const eepc::TrialResult& r : results) {
        if (!r.feasible) {
            std::cerr << "infeasible: receiver could not be formed for this scenario\n";
            return kExitInfeasible;
        }
    }

    eepc::CsvWriter csv({"trial", "k", "gain", "power", "sinr", "utility", "capped"});
    std::vector<double> trial_power, trial_utility, trial_sinr;
    int converged = 0;
    for (std::size_t t = 0; t < results.size(); ++t) {
        const eepc::EquilibriumResult& eq = results[t].equilibrium;
        if (eq.converged) ++converged;
        std::vector<bool> capped(s.config.num_users, false);
        for (int k : eq.capped) capped[k] = true;
        for (int k = 0; k < s.config.num_users; ++k)
            csv.add_row({eepc::cell(static_cast<long>(t)), eepc::cell(k + 1),
                         eepc::cell(results[t].gains[k]), eepc::cell(eq.powers[k]),
                         eepc::cell(eq.sinrs[k]), eepc::cell(eq.utilities[k]),
                         eepc::cell(static_cast<bool>(capped[k]))});
        trial_power.push_back(eq.powers.mean());
        trial_utility.push_back(eq.utilities.mean());
        trial_sinr.push_back(eq.sinrs.mean());
    }
    const double convergence_rate = static_cast<double>(converged) / s.trials;
    const eepc::MeanStats power_stats = eepc::mean_with_halfwidth(trial_power);
    const eepc::MeanStats utility_stats = eepc::mean_with_halfwidth(trial_utility);
    const eepc::MeanStats sinr_stats = eepc::mean_with_halfwidth(trial_sinr);

    const fs::path dir = resolve_out_dir(s);
    fs::create_directories(dir);
    csv.write((dir / "equilibrium.csv").string());

    json summary;
    summary["target_sinr"] = target;
    summary["trials"] = s.trials;
    summary["convergence_rate"] = convergence_rate;
    summary["mean_power"] = power_stats.mean;
    summary["mean_power_halfwidth"] = power_stats.halfwidth;
    summary["mean_utility"] = utility_stats.mean;
    summary["mean_utility_halfwidth"] = utility_stats.halfwidth;
    summary["mean_sinr"] = sinr_stats.mean;
    summary["mean_sinr_halfwidth"] = sinr_stats.halfwidth;
    summary["config"] = config_to_json(s);
    {
        std::ofstream file(dir / "summary.json", std::ios::binary);
        file << summary.dump(2) << '\n';
    }
    write_manifest(dir, "simulate", s, {"equilibrium.csv", "summary.json"}, json());
    std::cout << "wrote " << (dir / "equilibrium.csv").string() << " and summary.json\n";
    if (convergence_rate < 0.9) {
        std::cerr << "convergence failures above threshold: rate " << convergence_rate << "\n";
        return kExitNonConvergence;
    }
    return kExitOk;
}

int cmd_compare_receivers(const Settings& s) {
    s.config.validate();
    const double target = eepc::solve_target_sinr(s.config.packet_length);
    std::vector<int> grid;
    if (!s.k_grid.empty()) {
        grid = parse_user_grid(s.k_grid);
    } else {
        for (int i = 1; i <= 8; ++i)
            grid.push_back(std::max(1, i * s.config.processing_gain / 8));
    }
    const eepc::ReceiverKind kinds[] = {eepc::ReceiverKind::Mmse,
                                        eepc::ReceiverKind::MatchedFilter,
                                        eepc::ReceiverKind::Decorrelator};
    eepc::CsvWriter csv({"K", "receiver", "mean_power", "mean_utility", "feasible"});
    for (int users : grid) {
        eepc::SystemConfig cfg = s.config;
        cfg.num_users = users;
        for (eepc::ReceiverKind kind : kinds) {
            const eepc::LsaPrediction pred =
                eepc::predict_profiles(cfg, target, kind, s.quantiles());
            double mean_power = std::numeric_limits<double>::quiet_NaN();
            double mean_utility = std::numeric_limits<double>::quiet_NaN();
            if (pred.feasible) {
                mean_power = 0.0;
                mean_utility = 0.0;
                for (std::size_t k = 0; k < pred.powers.size(); ++k) {
                    mean_power += pred.powers[k];
                    mean_utility += pred.utilities[k];
                }
                mean_power /= static_cast<double>(pred.powers.size());
                mean_utility /= static_cast<double>(pred.utilities.size());
            }
            csv.add_row({eepc::cell(users), eepc::to_string(kind), eepc::cell(mean_power),
                         eepc::cell(mean_utility), eepc::cell(pred.feasible)});
        }
    }
    const fs::path dir = resolve_out_dir(s);
    fs::create_directories(dir);
    csv.write((dir / "receivers.csv").string());
    json extra;
    extra["target_sinr"] = target;
    write_manifest(dir, "compare-receivers", s, {"receivers.csv"}, extra);
    std::cout << "wrote " << (dir / "receivers.csv").string() << "\n";
    return kExitOk;
}

int cmd_training_sweep(const Settings& s) {
    s.config.validate();
    const double target = eepc::solve_target_sinr(s.config.packet_length);
    std::vector<int> grid =
        s.k_grid.empty() ? std::vector<int>{s.config.num_users} : parse_user_grid(s.k_grid);
    eepc::CsvWriter csv({"K", "N_T", "xi_sq", "beta_d_star", "mean_utility", "is_argmax"});
    bool any_feasible = false;
    for (int users : grid) {
        eepc::SystemConfig cfg = s.config;
        cfg.num_users = users;
        const eepc::TrainingSweep sweep =
            eepc::training_sweep(cfg, target, s.received_power, s.quantiles());
        for (const eepc::TrainingSweepPoint& point : sweep.points) {
            any_feasible = any_feasible || point.feasible;
            csv.add_row({eepc::cell(users), eepc::cell(point.training_symbols),
                         eepc::cell(point.xi_sq), eepc::cell(point.beta_d_star),
                         eepc::cell(point.mean_utility),
                         eepc::cell(point.training_symbols == sweep.best_training_symbols)});
        }
    }
    if (!any_feasible) {
        std::cerr << "infeasible: no training point below the load bound\n";
        return kExitInfeasible;
    }
    const fs::path dir = resolve_out_dir(s);
    fs::create_directories(dir);
    csv.write((dir / "training.csv").string());
    json extra;
    extra["target_sinr"] = target;
    write_manifest(dir, "training-sweep", s, {"training.csv"}, extra);
    std::cout << "wrote " << (dir / "training.csv").string() << "\n";
    return kExitOk;
}

int cmd_constrained(const Settings& s) {
    s.config.validate();
    if (s.trials < 1) throw std::invalid_argument("trials must be >= 1");
    const eepc::ProfileComparison cmp =
        eepc::profile_comparison(s.config, s.trials, eepc::ExecutionPolicy::Parallel);
    if (!cmp.feasible) {
        std::cerr << "infeasible: load " << s.config.load() << " reaches the mmse bound\n";
        return kExitInfeasible;
    }
    eepc::CsvWriter csv({"k", "quantile_gain", "lsa_power", "lsa_sinr", "lsa_utility",
                         "lsa_capped", "sim_gain", "sim_power", "sim_sinr", "sim_utility",
                         "sim_capped_fraction"});
    const double target = eepc::solve_target_sinr(s.config.packet_length);
    for (std::size_t k = 0; k < cmp.rows.size(); ++k) {
        const eepc::ProfileRow& row = cmp.rows[k];
        csv.add_row({eepc::cell(static_cast<int>(k + 1)), eepc::cell(row.predicted_gain),
                     eepc::cell(row.predicted_power), eepc::cell(row.predicted_sinr),
                     eepc::cell(row.predicted_utility), eepc::cell(row.predicted_capped),
                     eepc::cell(row.sim_gain), eepc::cell(row.sim_power),
                     eepc::cell(row.sim_sinr), eepc::cell(row.sim_utility),
                     eepc::cell(row.sim_capped_fraction)});
    }
    const fs::path dir = resolve_out_dir(s);
    fs::create_directories(dir);
    csv.write((dir / "constrained.csv").string());
    json extra;
    extra["target_sinr"] = target;
    extra["u1"] = s.config.num_users - cmp.lsa_capped;
    extra["u2"] = cmp.lsa_capped;
    extra["sim_mean_capped"] = cmp.sim_mean_capped;
    extra["rank_corr_power"] = cmp.rank_corr_power;
    extra["rank_corr_utility"] = cmp.rank_corr_utility;
    extra["converged_trials"] = cmp.converged_trials;
    write_manifest(dir, "constrained", s, {"constrained.csv"}, extra);
    std::cout << "wrote " << (dir / "constrained.csv").string() << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Energy-efficient power control for multipath CDMA uplinks: exact "
                 "finite-system game and large-system closed forms"};
    app.require_subcommand(1);
    app.fallthrough();

    Settings s;
    std::string config_path;
    app.add_option("--config", config_path, "key=value configuration file");
    app.add_option("--out", s.out_dir, "output directory (default $EEPC_OUT_DIR or ./out)");
    app.add_option("--K", s.config.num_users, "number of users");
    app.add_option("--N", s.config.processing_gain, "processing gain (chips per symbol)");
    app.add_option("--L", s.config.num_paths, "multipath replicas per user");
    app.add_option("--B", s.config.packet_length, "packet length in symbols");
    app.add_option("--N_T", s.config.training_symbols, "training symbols");
    app.add_option("--R", s.config.data_rate, "data rate, bits/s");
    app.add_option("--noise_psd_half", s.config.noise_half, "per-sample noise variance");
    std::string pmax_text;
    app.add_option("--P_max", pmax_text, "per-user max transmit power (number or 'inf')");
    app.add_option("--delay_spread", s.config.delay_spread,
                   "multipath delay spread in chips (-1: max(L-1, N/32))");
    app.add_option("--offset_spread", s.config.offset_spread,
                   "user timing offset spread in chips");
    std::string fading_kind_text;
    app.add_option("--fading-kind", fading_kind_text, "gaussian | exponential");
    app.add_option("--fading-scale", s.config.fading.scale, "fading scale parameter");
    app.add_option("--seed", s.config.seed, "base seed");
    app.add_option("--trials", s.trials, "Monte Carlo trials");
    app.add_option("--receiver", s.receiver, "mmse | mf | dec");
    app.add_option("--power_rule", s.power_rule, "game | lsa");
    app.add_option("--quantile_mode", s.quantile_mode, "midpoint | exact");

    CLI::App* predict = app.add_subcommand("predict", "profile prediction from closed forms");
    predict->fallthrough();
    CLI::App* simulate = app.add_subcommand("simulate", "finite-system equilibrium trials");
    simulate->fallthrough();
    CLI::App* compare = app.add_subcommand("compare-receivers",
                                           "utility/power versus users per receiver");
    compare->fallthrough();
    compare->add_option("--K-grid", s.k_grid, "comma-separated user counts");
    CLI::App* training = app.add_subcommand("training-sweep",
                                            "utility versus training length");
    training->fallthrough();
    training->add_option("--K-grid", s.k_grid, "comma-separated user counts");
    training->add_option("--received-power", s.received_power,
                         "working average received power (<= 0 selects the unconstrained value)");
    CLI::App* constrained = app.add_subcommand("constrained",
                                               "capped-power profiles, prediction vs simulation");
    constrained->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        std::map<std::string, bool> overridden = {
            {"K", app.count("--K") > 0},
            {"N", app.count("--N") > 0},
            {"L", app.count("--L") > 0},
            {"B", app.count("--B") > 0},
            {"N_T", app.count("--N_T") > 0},
            {"R", app.count("--R") > 0},
            {"noise_psd_half", app.count("--noise_psd_half") > 0},
            {"P_max", app.count("--P_max") > 0},
            {"delay_spread", app.count("--delay_spread") > 0},
            {"offset_spread", app.count("--offset_spread") > 0},
            {"fading.kind", app.count("--fading-kind") > 0},
            {"fading.scale", app.count("--fading-scale") > 0},
            {"seed", app.count("--seed") > 0},
            {"trials", app.count("--trials") > 0},
            {"receiver", app.count("--receiver") > 0},
            {"power_rule", app.count("--power_rule") > 0},
            {"quantile_mode", app.count("--quantile_mode") > 0},
        };
        if (!config_path.empty()) apply_config_file(s, config_path, overridden);
        if (!pmax_text.empty()) s.config.max_power = parse_positive_or_inf(pmax_text, "P_max");
        if (!fading_kind_text.empty())
            s.config.fading.kind = eepc::parse_fading_kind(fading_kind_text);

        if (predict->parsed()) return cmd_predict(s);
        if (simulate->parsed()) return cmd_simulate(s);
        if (compare->parsed()) return cmd_compare_receivers(s);
        if (training->parsed()) return cmd_training_sweep(s);
        if (constrained->parsed()) return cmd_constrained(s);
        return kExitUsage;
    } catch (const eepc::InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}

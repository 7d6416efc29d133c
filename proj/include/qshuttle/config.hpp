#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qshuttle/engine_model.hpp"
#include "qshuttle/master_equation.hpp"

namespace qshuttle {

struct ConfigError : std::runtime_error {
    int line = 0;
    std::string key;
    ConfigError(const std::string& msg, int line_, std::string key_)
        : std::runtime_error(msg), line(line_), key(std::move(key_)) {}
};

enum class RunKind { evolve, steady, trajectories, spectrum, power, sweep, check_operators };
std::string to_string(RunKind r);
RunKind parse_run(const std::string& s);

struct FermiInputs {
    double omega_I = 0.0, mu = 0.0, T_s = 0.0, T_d = 0.0;
};

struct RunConfig {
    EngineParams params;
    std::optional<FermiInputs> fermi_inputs;
    RunKind run = RunKind::evolve;
    int n_traj = 500;
    double t_max = 30.0 * 3.141592653589793;
    double dt = 3.141592653589793 / 200.0;
    int record_stride = 10;
    std::uint64_t master_seed = 1;
    Integrator integrator = Integrator::split;
    InitialState initial = InitialState::ground_empty;
    double t_i = -1.0;  // negative: 10 / kappa, clipped to half the run
    std::string sweep_param;
    std::vector<double> sweep_values;
    RunKind sweep_run = RunKind::steady;
    std::string output_dir = "out";
    unsigned threads = 0;  // 0: hardware concurrency
    bool hann = false;
    bool detrend = true;
    int hist_bins_x = 40;
    int hist_bins_v = 40;
    int momentum_bins = 40;
    std::size_t steady_dense_limit = 8000;
    bool write_trajectories = true;

    // Keys set explicitly, in file order, for the manifest echo.
    std::vector<std::string> explicit_keys;
};

const std::vector<std::string>& config_keys();

// Sets one key from its text value; throws ConfigError with the key name.
void set_config_value(RunConfig& c, const std::string& key, const std::string& value, int line = 0);

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// Derives f_s, f_d from the Fermi inputs when given, then validates everything.
void finalize_config(RunConfig& c);

// Canonical key=value echo of every key, shortest round-trip numbers.
std::map<std::string, std::string> config_echo(const RunConfig& c);
std::string config_text(const RunConfig& c);

double effective_t_i(const RunConfig& c);

}  // namespace qshuttle

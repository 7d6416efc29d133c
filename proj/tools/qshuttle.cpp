#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qshuttle/config.hpp"
#include "qshuttle/format.hpp"
#include "qshuttle/runner.hpp"

namespace {

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> dim;
    std::optional<int> ntraj;
    std::optional<double> dt;
    std::optional<double> tmax;
    std::vector<std::string> set;
};

void add_flags(CLI::App* sub, Flags& f) {
    sub->add_option("--config", f.config, "key=value parameter file")->check(CLI::ExistingFile);
    sub->add_option("--seed", f.seed, "master seed");
    sub->add_option("--out", f.out, "output directory");
    sub->add_option("--dim", f.dim, "oscillator truncation");
    sub->add_option("--ntraj", f.ntraj, "number of trajectories");
    sub->add_option("--dt", f.dt, "time step");
    sub->add_option("--tmax", f.tmax, "final time");
    sub->add_option("--set", f.set, "extra key=value overrides, applied after the file");
}

qshuttle::RunConfig build(const Flags& f, qshuttle::RunKind kind) {
    using namespace qshuttle;
    RunConfig c = f.config.empty() ? RunConfig{} : load_config(f.config);
    for (const auto& kv : f.set) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'", 0, kv);
        set_config_value(c, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (f.seed) set_config_value(c, "master_seed", std::to_string(*f.seed));
    if (f.out) set_config_value(c, "output_dir", *f.out);
    if (f.dim) set_config_value(c, "dim", std::to_string(*f.dim));
    if (f.ntraj) set_config_value(c, "n_traj", std::to_string(*f.ntraj));
    if (f.dt) set_config_value(c, "dt", fmt(*f.dt));
    if (f.tmax) set_config_value(c, "t_max", fmt(*f.tmax));
    c.run = kind;
    finalize_config(c);
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace qshuttle;
    CLI::App app{"Single-electron shuttle heat engine simulator"};
    app.set_version_flag("--version", QSHUTTLE_VERSION);
    app.require_subcommand(1);
    Flags flags;
    const std::vector<std::pair<std::string, std::string>> subs{
        {"evolve", "integrate the unconditional master equation"},
        {"steady", "stationary state of the generator"},
        {"trajectories", "quantum-jump ensemble"},
        {"spectrum", "ensemble spectra, phase-space and momentum histograms"},
        {"power", "semiclassical and quantum power"},
        {"sweep", "repeat sweep_run over sweep_param = sweep_values"},
        {"check-operators", "commutator residuals and operator dumps"}};
    for (const auto& [name, help] : subs) add_flags(app.add_subcommand(name, help), flags);

    CLI11_PARSE(app, argc, argv);
    const std::string name = app.get_subcommands().front()->get_name();
    RunConfig cfg;
    try {
        cfg = build(flags, parse_run(name));
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    const RunReport rep = execute(cfg, std::cerr);
    if (rep.exit_code == 0) std::cout << rep.summary.dump(2) << "\n";
    return rep.exit_code;
}

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qshuttle/config.hpp"
#include "qshuttle/runner.hpp"

using namespace qshuttle;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("qshuttle_test_" + name);
    fs::remove_all(p);
    return p;
}

RunConfig config(const std::string& text, const fs::path& out) {
    RunConfig c = parse_config(text);
    c.output_dir = out.string();
    finalize_config(c);
    return c;
}

}  // namespace

TEST_CASE("parsing defaults and comments") {
    RunConfig c = parse_config("# nothing but comments\n\n   \n");
    finalize_config(c);
    CHECK(c.params.omega == 1.0);
    CHECK(c.params.kappa == 0.05);
    CHECK(c.params.x0 == 0.3);
    CHECK(c.params.dim == 40);
    CHECK(c.params.model == ModelKind::reduced);
    CHECK(c.n_traj == 500);
    RunConfig d = parse_config("gamma = 2.5   # hot lead\nmodel=full\nf_d=0.1\nsweep_values=1, 2,4\n");
    CHECK(d.params.gamma == 2.5);
    CHECK(d.params.model == ModelKind::full);
    CHECK(d.sweep_values == std::vector<double>{1, 2, 4});
}

TEST_CASE("strictness") {
    auto field_of = [](const std::string& text) {
        try {
            RunConfig c = parse_config(text);
            finalize_config(c);
        } catch (const ConfigError& e) {
            return std::make_pair(e.key, std::string(e.what()));
        }
        return std::make_pair(std::string("<none>"), std::string());
    };
    auto [k1, m1] = field_of("gamma=-1\n");
    CHECK(k1 == "gamma");
    CHECK(m1.find("gamma") != std::string::npos);
    auto [k2, m2] = field_of("dim=20\n# x\ndim=30\n");
    CHECK(k2 == "dim");
    CHECK(m2.find("lines 1 and 3") != std::string::npos);
    auto [k3, m3] = field_of("\nbogus=1\n");
    CHECK(k3 == "bogus");
    CHECK(m3.find("line 2") != std::string::npos);
    auto [k4, m4] = field_of("kappa=abc\n");
    CHECK(k4 == "kappa");
    auto [k5, m5] = field_of("no equals sign\n");
    CHECK(m5.find("line 1") != std::string::npos);
    auto [k6, m6] = field_of("run=sweep\nsweep_param=gamma\n");
    CHECK(k6 == "sweep_values");
    auto [k7, m7] = field_of("f_d=0.2\n");
    CHECK(k7 == "f_d");
    auto [k8, m8] = field_of("omega_I=1\nmu=0\n");
    CHECK(m8.find("missing required key") != std::string::npos);
}

TEST_CASE("Fermi inputs set the occupations") {
    RunConfig c = parse_config("model=full\nomega_I=0.6\nmu=0.5\nT_s=0.4\nT_d=0.01\n");
    finalize_config(c);
    CHECK(c.params.f_s == doctest::Approx(fermi(0.6, 0.5, 0.4)));
    CHECK(c.params.f_d == doctest::Approx(fermi(0.6, 0.5, 0.01)));
}

TEST_CASE("config echo round trips") {
    RunConfig c = parse_config("gamma=0.123456789\ndt=0.0031\nmodel=full\nnbar_p=0.5\nf_d=0.25\nmaster_seed=42\n");
    finalize_config(c);
    RunConfig back = parse_config(config_text(c));
    finalize_config(back);
    CHECK(config_text(back) == config_text(c));
    CHECK(back.params.gamma == c.params.gamma);
}

TEST_CASE("steady run writes JSON and a manifest") {
    const fs::path out = scratch("steady");
    const RunConfig c = config("run=steady\nmodel=fixed_charge\ngamma=0.2\nkappa=0.05\n", out);
    std::ostringstream log;
    const RunReport r = execute(c, log);
    REQUIRE(r.exit_code == 0);
    const auto j = nlohmann::json::parse(slurp(out / "steady.json"));
    CHECK(j["n_phonon"].get<double>() == doctest::Approx(1.0).epsilon(0.02));
    CHECK(j["residual"].get<double>() < 1e-9);
    const auto m = nlohmann::json::parse(slurp(out / "manifest.json"));
    CHECK(m["status"] == "ok");
    CHECK(m["config"]["gamma"] == "0.2");
    CHECK(m["files"].size() == 1);
}

TEST_CASE("evolve timeseries columns") {
    const fs::path out = scratch("evolve");
    const RunConfig c = config("run=evolve\ndim=10\nt_max=3\n", out);
    std::ostringstream log;
    REQUIRE(execute(c, log).exit_code == 0);
    const std::string ts = slurp(out / "timeseries.csv");
    CHECK(ts.substr(0, ts.find('\n')) ==
          "t,x_mean,v_mean,n_phonon,n_electron,trace,q_dot_hot,q_dot_cold,e_dot_control,e_dot_total");
    CHECK(fs::exists(out / "flux_diagnostics.csv"));
}

TEST_CASE("trajectory runs are byte-reproducible") {
    const std::string text = "run=trajectories\ndim=10\nn_traj=6\nt_max=6\nmaster_seed=9\nthreads=3\n";
    const fs::path a = scratch("traj_a"), b = scratch("traj_b");
    std::ostringstream log;
    REQUIRE(execute(config(text, a), log).exit_code == 0);
    RunConfig cb = config(text, b);
    cb.threads = 1;
    REQUIRE(execute(cb, log).exit_code == 0);
    const auto m = nlohmann::json::parse(slurp(a / "manifest.json"));
    int compared = 0;
    for (const auto& f : m["files"]) {
        CHECK(slurp(a / f.get<std::string>()) == slurp(b / f.get<std::string>()));
        ++compared;
    }
    CHECK(compared == 6 + 4);
    CHECK(fs::exists(a / "trajectories" / "trajectory_0005.csv"));
    CHECK(m["seeds"]["trajectory_seeds"].size() == 6);
    const std::string jumps = slurp(a / "jumps.csv");
    CHECK(jumps.substr(0, jumps.find('\n')) == "t,kind,trajectory_id");
}

TEST_CASE("sweeps do not depend on point order") {
    const fs::path a = scratch("sweep_a"), b = scratch("sweep_b");
    std::ostringstream log;
    const std::string base = "run=sweep\nsweep_run=steady\nmodel=fixed_charge\ndim=20\nsweep_param=gamma\n";
    REQUIRE(execute(config(base + "sweep_values=0.1,0.3\n", a), log).exit_code == 0);
    REQUIRE(execute(config(base + "sweep_values=0.3,0.1\n", b), log).exit_code == 0);
    CHECK(slurp(a / "point_0000" / "steady.json") == slurp(b / "point_0001" / "steady.json"));
    CHECK(slurp(a / "point_0001" / "steady.json") == slurp(b / "point_0000" / "steady.json"));
    CHECK(fs::exists(a / "sweep.csv"));
}

TEST_CASE("failed runs are marked") {
    const fs::path out = scratch("failed");
    const RunConfig c = config("run=trajectories\nmodel=fixed_charge\ndim=8\nn_traj=2\n", out);
    std::ostringstream log;
    const RunReport r = execute(c, log);
    CHECK(r.exit_code != 0);
    const auto m = nlohmann::json::parse(slurp(out / "manifest.json"));
    CHECK(m["status"] == "failed");
    CHECK(m["partial"] == true);
}

#ifdef QSHUTTLE_CLI
TEST_CASE("command line flags override the file") {
    const fs::path dir = scratch("cli");
    fs::create_directories(dir);
    {
        std::ofstream f(dir / "run.cfg");
        f << "model=fixed_charge\ngamma=0.2\ndim=20\n";
    }
    const std::string cmd = std::string(QSHUTTLE_CLI) + " steady --config " + (dir / "run.cfg").string() +
                            " --dim 24 --out " + (dir / "o").string() + " > /dev/null 2>&1";
    REQUIRE(std::system(cmd.c_str()) == 0);
    const auto m = nlohmann::json::parse(slurp(dir / "o" / "manifest.json"));
    CHECK(m["config"]["dim"] == "24");
    CHECK(m["config"]["gamma"] == "0.2");
    {
        std::ofstream f(dir / "bad.cfg");
        f << "gamma=-1\n";
    }
    const std::string bad = std::string(QSHUTTLE_CLI) + " evolve --config " + (dir / "bad.cfg").string() +
                            " --out " + (dir / "b").string() + " > /dev/null 2>&1";
    CHECK(std::system(bad.c_str()) != 0);
    const std::string ops = std::string(QSHUTTLE_CLI) + " check-operators --dim 30 --out " + (dir / "c").string() +
                            " > /dev/null 2>&1";
    REQUIRE(std::system(ops.c_str()) == 0);
    const auto j = nlohmann::json::parse(slurp(dir / "c" / "operators.json"));
    CHECK(j["xn_interior"].get<double>() < 1e-10);
    CHECK(fs::exists(dir / "c" / "operators" / "X.csv"));
}
#endif

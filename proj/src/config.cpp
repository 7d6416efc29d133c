#include "qshuttle/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "qshuttle/format.hpp"

namespace qshuttle {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v, int line) {
    double out = 0.0;
    const char* first = v.data();
    const char* last = v.data() + v.size();
    if (!v.empty() && *first == '+') ++first;
    const auto r = std::from_chars(first, last, out);
    if (r.ec != std::errc() || r.ptr != last || !std::isfinite(out))
        throw ConfigError("line " + std::to_string(line) + ": " + key + ": not a finite number: '" + v + "'", line, key);
    return out;
}

long long to_int(const std::string& key, const std::string& v, int line) {
    long long out = 0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size())
        throw ConfigError("line " + std::to_string(line) + ": " + key + ": not an integer: '" + v + "'", line, key);
    return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v, int line) {
    std::uint64_t out = 0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size())
        throw ConfigError("line " + std::to_string(line) + ": " + key + ": not an unsigned integer: '" + v + "'", line,
                          key);
    return out;
}

bool to_bool(const std::string& key, const std::string& v, int line) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("line " + std::to_string(line) + ": " + key + ": expected true/false, got '" + v + "'", line, key);
}

std::vector<double> to_list(const std::string& key, const std::string& v, int line) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item), line));
    if (out.empty()) throw ConfigError("line " + std::to_string(line) + ": " + key + ": empty list", line, key);
    return out;
}

template <class F>
auto wrap(const std::string& key, int line, F&& f) {
    try {
        return f();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("line " + std::to_string(line) + ": " + key + ": " + e.what(), line, key);
    }
}

std::string exp_mode_name(ExpMode m) { return m == ExpMode::eigen ? "eigen" : "quadrature"; }

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&, int)>;

const std::vector<std::pair<std::string, Setter>>& setters() {
    auto num = [](double EngineParams::*f) {
        return Setter([f](RunConfig& c, const std::string& k, const std::string& v, int l) {
            c.params.*f = to_double(k, v, l);
        });
    };
    auto fermi = [](double FermiInputs::*f) {
        return Setter([f](RunConfig& c, const std::string& k, const std::string& v, int l) {
            if (!c.fermi_inputs) c.fermi_inputs = FermiInputs{};
            (*c.fermi_inputs).*f = to_double(k, v, l);
        });
    };
    static const std::vector<std::pair<std::string, Setter>> table{
        {"omega", num(&EngineParams::omega)},
        {"gamma", num(&EngineParams::gamma)},
        {"kappa", num(&EngineParams::kappa)},
        {"Gamma_s", num(&EngineParams::Gamma_s)},
        {"Gamma_d", num(&EngineParams::Gamma_d)},
        {"eta", num(&EngineParams::eta)},
        {"x0", num(&EngineParams::x0)},
        {"A", num(&EngineParams::A)},
        {"f_s", num(&EngineParams::f_s)},
        {"f_d", num(&EngineParams::f_d)},
        {"nbar_p", num(&EngineParams::nbar_p)},
        {"mass", num(&EngineParams::mass)},
        {"n_e", num(&EngineParams::n_e)},
        {"dim", [](RunConfig& c, const std::string& k, const std::string& v, int l) {
             c.params.dim = static_cast<int>(to_int(k, v, l));
         }},
        {"model", [](RunConfig& c, const std::string& k, const std::string& v, int l) {
             c.params.model = wrap(k, l, [&] { return parse_model(v); });
         }},
        {"exp_mode", [](RunConfig& c, const std::string& k, const std::string& v, int l) {
             if (v == "eigen") c.params.exp_mode = ExpMode::eigen;
             else if (v == "quadrature") c.params.exp_mode = ExpMode::quadrature;
             else throw ConfigError("line " + std::to_string(l) + ": " + k + ": expected eigen or quadrature", l, k);
         }},
        {"omega_I", fermi(&FermiInputs::omega_I)},
        {"mu", fermi(&FermiInputs::mu)},
        {"T_s", fermi(&FermiInputs::T_s)},
        {"T_d", fermi(&FermiInputs::T_d)},
        {"run", [](RunConfig& c, const std::string& k, const std::string& v, int l) {
             c.run = wrap(k, l, [&] { return parse_run(v); });
         }},
        {"n_traj", [](RunConfig& c, const std::string& k, const std::string& v, int l) {
             c.n_traj = static_cast<int>(to_int(k, v, l));
         }},
        {"t_max", [](RunConfig& c, const std::string& k, const std::string& v, int l) { c.t_max = to_double(k, v, l); }},
        {"dt", [](RunConfig& c, const std::string& k, const std::string& v, int l) { c.dt = to_double(k, v, l); }},
        {"record_stride", [](RunConfig& c, const std::string& k, const std::string& v, int l) {
             c.record_stride = static_cast<int>(to_int(k, v, l));
         }},
        {"master_seed", [](RunConfig& c, const std::string& k, const std::string& v, int l) {
             c.master_seed = to_u64(k, v, l);
         }},
        {"integrator", [](RunConfig& c, const std::string& k, const std::string& v, int l) {
             c.integrator = wrap(k, l, [&] { return parse_integrator(v); });
         }},
        {"initial_state", [](RunConfig& c, const std::string& k, const std::string& v, int l) {
             c.initial = wrap(k, l, [&] { return parse_initial_state(v); });
         }},
        {"t_i", [](RunConfig& c, const std::string& k, const std::string& v, int l) { c.t_i = to_double(k, v, l); }},
        {"sweep_param", [](RunConfig& c, const std::string&, const std::string& v, int) { c.sweep_param = v; }},
        {"sweep_values", [](RunConfig& c, const std::string& k, const std::string& v, int l) {
             c.sweep_values = to_list(k, v, l);
         }},
        {"sweep_run", [](RunConfig& c, const std::string& k, const std::string& v, int l) {
             c.sweep_run = wrap(k, l, [&] { return parse_run(v); });
         }},
        {"output_dir", [](RunConfig& c, const std::string&, const std::string& v, int) { c.output_dir = v; }},
        {"threads", [](RunConfig& c, const std::string& k, const std::string& v, int l) {
             const long long n = to_int(k, v, l);
             if (n < 0) throw ConfigError("line " + std::to_string(l) + ": threads: must be >= 0", l, k);
             c.threads = static_cast<unsigned>(n);
         }},
        {"hann", [](RunConfig& c, const std::string& k, const std::string& v, int l) { c.hann = to_bool(k, v, l); }},
        {"detrend", [](RunConfig& c, const std::string& k, const std::string& v, int l) { c.detrend = to_bool(k, v, l); }},
        {"hist_bins_x", [](RunConfig& c, const std::string& k, const std::string& v, int l) {
             c.hist_bins_x = static_cast<int>(to_int(k, v, l));
         }},
        {"hist_bins_v", [](RunConfig& c, const std::string& k, const std::string& v, int l) {
             c.hist_bins_v = static_cast<int>(to_int(k, v, l));
         }},
        {"momentum_bins", [](RunConfig& c, const std::string& k, const std::string& v, int l) {
             c.momentum_bins = static_cast<int>(to_int(k, v, l));
         }},
        {"steady_dense_limit", [](RunConfig& c, const std::string& k, const std::string& v, int l) {
             c.steady_dense_limit = static_cast<std::size_t>(to_u64(k, v, l));
         }},
        {"write_trajectories", [](RunConfig& c, const std::string& k, const std::string& v, int l) {
             c.write_trajectories = to_bool(k, v, l);
         }},
    };
    return table;
}

}  // namespace

std::string to_string(RunKind r) {
    switch (r) {
        case RunKind::evolve: return "evolve";
        case RunKind::steady: return "steady";
        case RunKind::trajectories: return "trajectories";
        case RunKind::spectrum: return "spectrum";
        case RunKind::power: return "power";
        case RunKind::sweep: return "sweep";
        case RunKind::check_operators: return "check-operators";
    }
    return "?";
}

RunKind parse_run(const std::string& s) {
    for (RunKind r : {RunKind::evolve, RunKind::steady, RunKind::trajectories, RunKind::spectrum, RunKind::power,
                      RunKind::sweep, RunKind::check_operators})
        if (to_string(r) == s) return r;
    if (s == "check_operators") return RunKind::check_operators;
    throw std::invalid_argument("unknown run '" + s + "'");
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& [name, _] : setters()) k.push_back(name);
        return k;
    }();
    return keys;
}

void set_config_value(RunConfig& c, const std::string& key, const std::string& value, int line) {
    for (const auto& [name, fn] : setters()) {
        if (name != key) continue;
        fn(c, key, value, line);
        if (std::find(c.explicit_keys.begin(), c.explicit_keys.end(), key) == c.explicit_keys.end())
            c.explicit_keys.push_back(key);
        return;
    }
    throw ConfigError((line ? "line " + std::to_string(line) + ": " : std::string()) + "unknown key '" + key + "'", line,
                      key);
}

RunConfig parse_config(const std::string& text) {
    RunConfig c;
    std::map<std::string, int> seen;
    std::stringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line) + ": expected key=value", line, "");
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(line) + ": empty key", line, "");
        if (auto it = seen.find(key); it != seen.end())
            throw ConfigError("duplicate key '" + key + "' on lines " + std::to_string(it->second) + " and " +
                                  std::to_string(line),
                              line, key);
        seen[key] = line;
        set_config_value(c, key, value, line);
    }
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file " + path, 0, "");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

void finalize_config(RunConfig& c) {
    auto has = [&](const std::string& k) {
        return std::find(c.explicit_keys.begin(), c.explicit_keys.end(), k) != c.explicit_keys.end();
    };
    if (c.fermi_inputs) {
        for (const char* k : {"omega_I", "mu", "T_s", "T_d"})
            if (!has(k)) throw ConfigError(std::string("missing required key ") + k + " (Fermi inputs are all-or-none)", 0, k);
        if (has("f_s") || has("f_d"))
            throw ConfigError("f_s/f_d and the Fermi inputs omega_I, mu, T_s, T_d are mutually exclusive", 0, "f_s");
        const FermiInputs& fi = *c.fermi_inputs;
        if (fi.T_s < 0) throw ConfigError("T_s: must be >= 0", 0, "T_s");
        if (fi.T_d < 0) throw ConfigError("T_d: must be >= 0", 0, "T_d");
        c.params.f_s = fermi(fi.omega_I, fi.mu, fi.T_s);
        c.params.f_d = fermi(fi.omega_I, fi.mu, fi.T_d);
    }
    try {
        validate(c.params);
    } catch (const ParamError& e) {
        throw ConfigError(e.what(), 0, e.field);
    }
    auto bad = [](const std::string& k, const std::string& msg) { throw ConfigError(k + ": " + msg, 0, k); };
    if (!(c.dt > 0)) bad("dt", "must be > 0");
    if (!(c.t_max >= c.dt)) bad("t_max", "must be >= dt");
    if (c.record_stride < 1) bad("record_stride", "must be >= 1");
    if (c.n_traj < 1) bad("n_traj", "must be >= 1");
    if (c.hist_bins_x < 1) bad("hist_bins_x", "must be >= 1");
    if (c.hist_bins_v < 1) bad("hist_bins_v", "must be >= 1");
    if (c.momentum_bins < 5) bad("momentum_bins", "must be >= 5");
    if (c.run == RunKind::sweep) {
        if (c.sweep_param.empty()) bad("sweep_param", "missing required key for run=sweep");
        if (c.sweep_values.empty()) bad("sweep_values", "missing required key for run=sweep");
        if (c.sweep_run == RunKind::sweep || c.sweep_run == RunKind::check_operators)
            bad("sweep_run", "must be one of evolve, steady, trajectories, spectrum, power");
        static const std::vector<std::string> sweepable{"omega", "gamma", "kappa", "Gamma_s", "Gamma_d", "eta", "x0",
                                                        "A",     "f_s",   "f_d",   "nbar_p",  "mass",    "n_e", "dim"};
        if (std::find(sweepable.begin(), sweepable.end(), c.sweep_param) == sweepable.end())
            bad("sweep_param", "cannot sweep '" + c.sweep_param + "'");
        for (double v : c.sweep_values) {
            RunConfig point = c;
            point.explicit_keys.clear();
            set_config_value(point, c.sweep_param, c.sweep_param == "dim" ? std::to_string(std::llround(v)) : fmt(v));
            try {
                validate(point.params);
            } catch (const ParamError& e) {
                throw ConfigError(std::string("sweep_values: ") + e.what(), 0, e.field);
            }
        }
    }
}

std::map<std::string, std::string> config_echo(const RunConfig& c) {
    const EngineParams& p = c.params;
    std::map<std::string, std::string> m{
        {"omega", fmt(p.omega)},       {"gamma", fmt(p.gamma)},     {"kappa", fmt(p.kappa)},
        {"Gamma_s", fmt(p.Gamma_s)},   {"Gamma_d", fmt(p.Gamma_d)}, {"eta", fmt(p.eta)},
        {"x0", fmt(p.x0)},             {"A", fmt(p.A)},             {"f_s", fmt(p.f_s)},
        {"f_d", fmt(p.f_d)},           {"nbar_p", fmt(p.nbar_p)},   {"mass", fmt(p.mass)},
        {"n_e", fmt(p.n_e)},           {"dim", std::to_string(p.dim)}, {"model", to_string(p.model)},
        {"exp_mode", exp_mode_name(p.exp_mode)},
        {"run", to_string(c.run)},     {"n_traj", std::to_string(c.n_traj)}, {"t_max", fmt(c.t_max)},
        {"dt", fmt(c.dt)},             {"record_stride", std::to_string(c.record_stride)},
        {"master_seed", std::to_string(c.master_seed)}, {"integrator", to_string(c.integrator)},
        {"initial_state", to_string(c.initial)}, {"t_i", fmt(c.t_i)},
        {"sweep_run", to_string(c.sweep_run)}, {"output_dir", c.output_dir},
        {"threads", std::to_string(c.threads)}, {"hann", c.hann ? "true" : "false"},
        {"detrend", c.detrend ? "true" : "false"}, {"hist_bins_x", std::to_string(c.hist_bins_x)},
        {"hist_bins_v", std::to_string(c.hist_bins_v)}, {"momentum_bins", std::to_string(c.momentum_bins)},
        {"steady_dense_limit", std::to_string(c.steady_dense_limit)},
        {"write_trajectories", c.write_trajectories ? "true" : "false"}};
    if (c.fermi_inputs) {
        m["omega_I"] = fmt(c.fermi_inputs->omega_I);
        m["mu"] = fmt(c.fermi_inputs->mu);
        m["T_s"] = fmt(c.fermi_inputs->T_s);
        m["T_d"] = fmt(c.fermi_inputs->T_d);
        m.erase("f_s");
        m.erase("f_d");
    }
    if (!c.sweep_param.empty()) m["sweep_param"] = c.sweep_param;
    if (!c.sweep_values.empty()) {
        std::string s;
        for (std::size_t i = 0; i < c.sweep_values.size(); ++i) s += (i ? "," : "") + fmt(c.sweep_values[i]);
        m["sweep_values"] = s;
    }
    return m;
}

std::string config_text(const RunConfig& c) {
    std::string out;
    for (const auto& [k, v] : config_echo(c)) out += k + "=" + v + "\n";
    return out;
}

double effective_t_i(const RunConfig& c) {
    if (c.t_i >= 0) return c.t_i;
    const double t = c.params.kappa > 0 ? 10.0 / c.params.kappa : 0.0;
    return std::min(t, 0.5 * c.t_max);
}

}  // namespace qshuttle

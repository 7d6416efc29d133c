#include "qshuttle/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qshuttle/format.hpp"
#include "qshuttle/kernels.hpp"
#include "qshuttle/parallel.hpp"
#include "qshuttle/rng.hpp"

namespace qshuttle {

namespace fs = std::filesystem;
using nlohmann::json;

Agreement compare_to_unconditional(const Ensemble& e, const std::vector<Sample>& unconditional, double nsigma) {
    if (e.t.size() != unconditional.size()) throw std::invalid_argument("compare_to_unconditional: grids differ");
    for (std::size_t i = 0; i < e.t.size(); ++i)
        if (std::abs(e.t[i] - unconditional[i].t) > 1e-9 * std::max(1.0, e.t[i]))
            throw std::invalid_argument("compare_to_unconditional: grids differ");
    Agreement a;
    a.points = e.t.size();
    for (const char* name : {"n_phonon", "x_mean", "n_electron"}) {
        const SeriesStats& st = e[name];
        std::size_t ok = 0;
        for (std::size_t i = 0; i < a.points; ++i) {
            const double diff = std::abs(st.mean[i] - sample_value(unconditional[i], name));
            if (diff <= nsigma * st.stderr_[i] + 1e-12) ++ok;
        }
        a.names.push_back(name);
        a.fraction.push_back(a.points ? static_cast<double>(ok) / static_cast<double>(a.points) : 0.0);
    }
    return a;
}

StationaryAnalysis analyse_stationary(const Ensemble& e, double p0, double mass, double t_i, const AnalysisOptions& opt) {
    if (e.records.empty()) throw std::invalid_argument("analyse_stationary: empty ensemble");
    StationaryAnalysis out;
    out.t_i = t_i;
    out.p0 = p0;
    const auto& grid = e.records.front().samples;
    std::size_t first = 0;
    while (first < grid.size() && grid[first].t < t_i - 1e-12) ++first;
    out.window = grid.size() - first;
    if (out.window < 256)
        throw std::invalid_argument("stationary window holds " + std::to_string(out.window) +
                                    " samples per record; spectra need at least 256 (raise t_max or lower t_i)");

    std::vector<std::vector<double>> xs, vs;
    std::vector<PhasePoints> pts;
    std::vector<Spectrum> sx, sv;
    std::vector<double> momenta;
    double psc = 0.0, pq = 0.0, qc = 0.0, hull = 0.0, msd = 0.0;
    std::vector<double> tw;
    for (std::size_t i = first; i < grid.size(); ++i) tw.push_back(grid[i].t);
    for (const auto& r : e.records) {
        std::vector<double> x, v;
        for (std::size_t i = first; i < r.samples.size(); ++i) {
            const Sample& s = r.samples[i];
            x.push_back(s.x);
            v.push_back(s.v);
            momenta.push_back(mass * s.v);
            psc += power_semiclassical(s);
            pq += power_quantum(s, p0);
            qc += s.q_dot_cold;
        }
        sx.push_back(power_spectrum(tw, x, opt.hann, opt.detrend));
        sv.push_back(power_spectrum(tw, v, opt.hann, opt.detrend));
        const double h = convex_hull_area(x, v);
        out.hull.push_back(h);
        hull += h;
        PhasePoints p{x, v};
        if (opt.fixed_point) msd += mean_squared_distance(p, opt.fixed_point->first, opt.fixed_point->second);
        pts.push_back(std::move(p));
        xs.push_back(std::move(x));
        vs.push_back(std::move(v));
    }
    const double n = static_cast<double>(e.records.size());
    const double np = n * static_cast<double>(out.window);
    out.p_sc = psc / np;
    out.p_q = pq / np;
    out.q_dot_cold = qc / np;
    out.ratio = out.p_q / out.p_sc;
    out.gap = std::abs(out.p_q - out.q_dot_cold) / std::abs(out.q_dot_cold);
    out.hull_mean = hull / n;
    if (opt.fixed_point) out.msd_mean = msd / n;

    out.sx = average_spectra(sx);
    out.sv = average_spectra(sv);
    const std::size_t k = peak_bin(out.sx);
    out.peak_omega = out.sx.omega[k];
    out.peak_height = out.sx.values[k];
    out.phase_lag = cross_spectrum_phase(xs, vs, k, opt.detrend);
    out.phase = phase_histogram(pts, opt.hist_bins_x, opt.hist_bins_v);
    out.crater = crater_statistic(out.phase);
    out.momentum = histogram_1d(momenta, opt.momentum_bins);
    try {
        out.fit = gaussian_fit(out.momentum);
    } catch (const std::exception& ex) {
        out.fit_error = ex.what();
    }

    // ensemble-mean power series on the full grid
    const std::size_t ns = grid.size();
    out.power.t.resize(ns);
    out.power.p_sc.assign(ns, 0.0);
    out.power.p_q.assign(ns, 0.0);
    out.power.q_dot_cold.assign(ns, 0.0);
    for (const auto& r : e.records)
        for (std::size_t i = 0; i < ns; ++i) {
            out.power.p_sc[i] += power_semiclassical(r.samples[i]) / n;
            out.power.p_q[i] += power_quantum(r.samples[i], p0) / n;
            out.power.q_dot_cold[i] += r.samples[i].q_dot_cold / n;
        }
    for (std::size_t i = 0; i < ns; ++i) out.power.t[i] = grid[i].t;
    out.power.w_sc_cum = cumulative_trapezoid(out.power.t, out.power.p_sc, t_i);
    return out;
}

namespace {

class Output {
public:
    explicit Output(fs::path root) : root_(std::move(root)) { fs::create_directories(root_); }

    void write(const std::string& rel, const std::string& content) {
        const fs::path p = root_ / rel;
        if (p.has_parent_path()) fs::create_directories(p.parent_path());
        std::ofstream f(p, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + p.string());
        f << content;
        if (!f) throw std::runtime_error("write failed for " + p.string());
        files_.push_back(rel);
    }
    void json_file(const std::string& rel, const json& j) { write(rel, j.dump(2) + "\n"); }
    const fs::path& root() const { return root_; }
    std::vector<std::string>& files() { return files_; }

private:
    fs::path root_;
    std::vector<std::string> files_;
};

struct Csv {
    std::ostringstream s;
    explicit Csv(const std::vector<std::string>& header) {
        for (std::size_t i = 0; i < header.size(); ++i) s << (i ? "," : "") << header[i];
        s << "\n";
    }
    void row(const std::vector<double>& v) {
        for (std::size_t i = 0; i < v.size(); ++i) s << (i ? "," : "") << fmt(v[i]);
        s << "\n";
    }
    std::string str() const { return s.str(); }
};

json num(double v) { return std::isfinite(v) ? json(v) : json(fmt(v)); }

OperatorSet make_ops(const RunConfig& c) { return build_operator_set(c.params); }

std::string timeseries_csv(const std::vector<Sample>& rec) {
    Csv c({"t", "x_mean", "v_mean", "n_phonon", "n_electron", "trace", "q_dot_hot", "q_dot_cold", "e_dot_control",
           "e_dot_total"});
    for (const Sample& s : rec)
        c.row({s.t, s.x, s.v, s.n_phonon, s.n_electron, s.trace, s.q_dot_hot, s.q_dot_cold, s.e_dot_control,
               s.e_dot_total});
    return c.str();
}

std::string diagnostics_csv(const std::vector<Sample>& rec) {
    Csv c({"t", "hermiticity", "min_eig", "force", "force_v", "q_hot_mean_field", "q_hot_closed", "q_cold_closed",
           "e_ctrl_closed", "identity_error"});
    for (const Sample& s : rec)
        c.row({s.t, s.hermiticity, s.min_eig, s.force, s.force_v, s.q_hot_mean_field, s.q_hot_closed, s.q_cold_closed,
               s.e_ctrl_closed, flux_breakdown(s).identity_error()});
    return c.str();
}

std::string trajectory_csv(const TrajectoryRecord& r) {
    std::ostringstream s;
    s << "t,x_mean,v_mean,n_phonon,n_electron,trace,q_dot_hot,q_dot_cold,e_dot_control,e_dot_total,e_dot_meas,"
         "de_jump,force,force_v,event\n";
    for (const Sample& x : r.samples) {
        for (double v : {x.t, x.x, x.v, x.n_phonon, x.n_electron, x.trace, x.q_dot_hot, x.q_dot_cold, x.e_dot_control,
                         x.e_dot_total, x.e_dot_meas, x.de_jump, x.force, x.force_v})
            s << fmt(v) << ",";
        s << (x.event >= 0 ? std::to_string(x.event) : std::string("")) << "\n";
    }
    return s.str();
}

std::string padded(std::size_t i, std::size_t n) {
    std::string s = std::to_string(i);
    const std::size_t width = std::max<std::size_t>(4, std::to_string(n > 0 ? n - 1 : 0).size());
    return std::string(width > s.size() ? width - s.size() : 0, '0') + s;
}

json sample_json(const Sample& s) {
    return json{{"t", num(s.t)},
                {"x_mean", num(s.x)},
                {"v_mean", num(s.v)},
                {"n_phonon", num(s.n_phonon)},
                {"n_electron", num(s.n_electron)},
                {"trace", num(s.trace)},
                {"hermiticity", num(s.hermiticity)},
                {"min_eig", num(s.min_eig)},
                {"force", num(s.force)},
                {"force_v", num(s.force_v)}};
}

json flux_json(const FluxBreakdown& f) {
    return json{{"q_dot_hot", num(f.q_dot_hot)},         {"q_dot_cold", num(f.q_dot_cold)},
                {"e_dot_control", num(f.e_dot_control)}, {"e_dot_total", num(f.e_dot_total)},
                {"q_hot_mean_field", num(f.q_hot_mean_field)},     {"q_hot_closed", num(f.q_hot_closed)},
                {"q_cold_closed", num(f.q_cold_closed)}, {"e_ctrl_closed", num(f.e_ctrl_closed)},
                {"identity_error", num(f.identity_error())}};
}

EvolveOptions evolve_options(const RunConfig& c) {
    EvolveOptions o;
    o.t_max = c.t_max;
    o.dt = c.dt;
    o.record_stride = c.record_stride;
    o.integrator = c.integrator;
    return o;
}

TrajectoryOptions trajectory_options(const RunConfig& c) {
    TrajectoryOptions o;
    o.t_max = c.t_max;
    o.dt = c.dt;
    o.record_stride = c.record_stride;
    return o;
}

json run_evolve(const RunConfig& c, Output& out, std::ostream& log) {
    const OperatorSet ops = make_ops(c);
    log << "evolve: model=" << to_string(c.params.model) << " dim=" << c.params.dim << " steps "
        << step_count(c.t_max, c.dt) << "\n";
    const EvolveResult r = evolve(ops, initial_state(ops, c.initial), evolve_options(c));
    out.write("timeseries.csv", timeseries_csv(r.samples));
    out.write("flux_diagnostics.csv", diagnostics_csv(r.samples));
    json j{{"samples", r.samples.size()},
           {"max_trace_error", num(r.max_trace_error)},
           {"max_hermiticity", num(r.max_hermiticity)},
           {"min_eigenvalue", num(r.min_eigenvalue)},
           {"max_identity_error", num(r.max_identity_error)},
           {"final", sample_json(r.samples.back())}};
    out.json_file("evolve_summary.json", j);
    return j;
}

json run_steady(const RunConfig& c, Output& out, std::ostream& log) {
    const OperatorSet ops = make_ops(c);
    SteadyOptions so;
    so.dense_limit = c.steady_dense_limit;
    so.fallback_dt = c.dt;
    const SteadyResult r = steady_state(ops, so);
    log << "steady: method=" << r.method << " residual=" << fmt(r.residual) << "\n";
    const Sample& s = r.observables;
    json j = sample_json(s);
    j.erase("t");
    j["residual"] = num(r.residual);
    j["rcond"] = num(r.rcond);
    j["method"] = r.method;
    j["converged"] = r.converged;
    j["unknowns"] = r.unknowns;
    j["flux"] = flux_json(flux_breakdown(s));
    if (c.params.model == ModelKind::fixed_charge)
        j["n_phonon_closed_form"] = num(c.params.kappa > 0 ? c.params.n_e * c.params.n_e * c.params.gamma /
                                                                 (4.0 * c.params.kappa) + c.params.nbar_p
                                                           : NAN);
    out.json_file("steady.json", j);
    if (!r.converged) throw SteadyStateError("steady state did not reach residual tolerance (" + fmt(r.residual) + ")");
    return j;
}

struct EnsembleRun {
    Ensemble ensemble;
    std::vector<Sample> unconditional;
    Agreement agreement;
    double p0 = 0.0;
    double max_step_probability = 0.0;
    std::size_t warnings = 0;
};

EnsembleRun ensemble_run(const RunConfig& c, Output& out, std::ostream& log, bool write_files) {
    if (c.params.model == ModelKind::fixed_charge)
        throw ParamError("model", "trajectories need a model with a charge degree of freedom");
    const OperatorSet ops = make_ops(c);
    const TrajectoryEngine engine(ops, c.dt);
    const CMat rho0 = initial_state(ops, c.initial);
    const unsigned threads = c.threads ? c.threads : default_threads();
    log << "trajectories: n=" << c.n_traj << " steps " << step_count(c.t_max, c.dt) << " threads " << threads << "\n";
    EnsembleRun er;
    er.ensemble = run_ensemble(engine, rho0, trajectory_options(c), c.n_traj, c.master_seed, threads);
    er.p0 = engine.observables().p0();
    for (const auto& r : er.ensemble.records) {
        er.max_step_probability = std::max(er.max_step_probability, r.max_step_probability);
        er.warnings += r.probability_warnings;
    }
    EvolveOptions eo = evolve_options(c);
    eo.integrator = Integrator::split;
    er.unconditional = evolve(ops, rho0, eo).samples;
    er.agreement = compare_to_unconditional(er.ensemble, er.unconditional);
    if (!write_files) return er;

    const Ensemble& e = er.ensemble;
    if (c.write_trajectories)
        for (std::size_t i = 0; i < e.records.size(); ++i)
            out.write("trajectories/trajectory_" + padded(i, e.records.size()) + ".csv", trajectory_csv(e.records[i]));
    std::vector<std::string> header{"t"};
    for (const auto& n : e.names) {
        header.push_back(n + "_mean");
        header.push_back(n + "_stderr");
    }
    Csv ens(header);
    for (std::size_t i = 0; i < e.t.size(); ++i) {
        std::vector<double> row{e.t[i]};
        for (const auto& st : e.stats) {
            row.push_back(st.mean[i]);
            row.push_back(st.stderr_[i]);
        }
        ens.row(row);
    }
    out.write("ensemble.csv", ens.str());
    std::ostringstream jumps;
    jumps << "t,kind,trajectory_id\n";
    for (const auto& r : e.records)
        for (const auto& j : r.jumps) jumps << fmt(j.t) << "," << j.kind << "," << r.index << "\n";
    out.write("jumps.csv", jumps.str());
    out.write("unconditional.csv", timeseries_csv(er.unconditional));
    return er;
}

json ensemble_json(const EnsembleRun& er) {
    json agree;
    for (std::size_t i = 0; i < er.agreement.names.size(); ++i)
        agree[er.agreement.names[i]] = num(er.agreement.fraction[i]);
    std::size_t jumps = 0;
    for (const auto& r : er.ensemble.records) jumps += r.jumps.size();
    return json{{"n_traj", er.ensemble.records.size()},
                {"samples", er.ensemble.t.size()},
                {"jumps", jumps},
                {"max_step_probability", num(er.max_step_probability)},
                {"probability_warnings", er.warnings},
                {"fraction_within_3se", agree}};
}

json run_trajectories(const RunConfig& c, Output& out, std::ostream& log) {
    const EnsembleRun er = ensemble_run(c, out, log, true);
    json j = ensemble_json(er);
    out.json_file("trajectories_summary.json", j);
    return j;
}

std::pair<double, double> fixed_point(const RunConfig& c) {
    SteadyOptions so;
    so.dense_limit = c.steady_dense_limit;
    so.fallback_dt = c.dt;
    const SteadyResult r = steady_state(make_ops(c), so);
    return {r.observables.x, r.observables.v};
}

StationaryAnalysis stationary(const RunConfig& c, const EnsembleRun& er) {
    AnalysisOptions ao;
    ao.hann = c.hann;
    ao.detrend = c.detrend;
    ao.hist_bins_x = c.hist_bins_x;
    ao.hist_bins_v = c.hist_bins_v;
    ao.momentum_bins = c.momentum_bins;
    ao.fixed_point = fixed_point(c);
    return analyse_stationary(er.ensemble, er.p0, c.params.mass, effective_t_i(c), ao);
}

std::string spectrum_csv(const Spectrum& s) {
    Csv c({"omega_tilde", "S"});
    for (std::size_t i = 0; i < s.omega.size(); ++i) c.row({s.omega[i], s.values[i]});
    return c.str();
}

json run_spectrum(const RunConfig& c, Output& out, std::ostream& log) {
    const EnsembleRun er = ensemble_run(c, out, log, c.write_trajectories);
    const StationaryAnalysis a = stationary(c, er);
    out.write("spectrum_x.csv", spectrum_csv(a.sx));
    out.write("spectrum_v.csv", spectrum_csv(a.sv));
    {
        const Histogram2D& h = a.phase;
        std::ostringstream s;
        s << "bin_x,bin_v,x_center,v_center,count\n";
        const double wx = (h.x_hi - h.x_lo) / h.nx, wv = (h.v_hi - h.v_lo) / h.nv;
        for (int ix = 0; ix < h.nx; ++ix)
            for (int iv = 0; iv < h.nv; ++iv)
                s << ix << "," << iv << "," << fmt(h.x_lo + (ix + 0.5) * wx) << "," << fmt(h.v_lo + (iv + 0.5) * wv)
                  << "," << h.at(ix, iv) << "\n";
        out.write("histogram.csv", s.str());
        std::ostringstream m;
        m << "axis,bin,count\n";
        for (int ix = 0; ix < h.nx; ++ix) m << "x," << ix << "," << h.marginal_x[ix] << "\n";
        for (int iv = 0; iv < h.nv; ++iv) m << "v," << iv << "," << h.marginal_v[iv] << "\n";
        out.write("histogram_marginals.csv", m.str());
    }
    {
        Csv s({"p_center", "count", "fit", "residual"});
        for (std::size_t i = 0; i < a.momentum.centers.size(); ++i) {
            double fitv = NAN, res = NAN;
            if (a.fit) {
                const double z = (a.momentum.centers[i] - a.fit->mean) / a.fit->sigma;
                fitv = a.fit->amplitude * std::exp(-0.5 * z * z);
                res = a.fit->residuals[i];
            }
            s.row({a.momentum.centers[i], a.momentum.counts[i], fitv, res});
        }
        out.write("momentum_histogram.csv", s.str());
        json f = a.fit ? json{{"mean", num(a.fit->mean)},
                              {"sigma", num(a.fit->sigma)},
                              {"amplitude", num(a.fit->amplitude)},
                              {"residual_rms", num(a.fit->residual_rms)}}
                       : json{{"error", a.fit_error}};
        out.json_file("momentum_fit.json", f);
    }
    json j = ensemble_json(er);
    j["t_i"] = num(a.t_i);
    j["window_samples"] = a.window;
    j["peak_omega_tilde"] = num(a.peak_omega);
    j["peak_height"] = num(a.peak_height);
    j["v_x_phase_at_peak"] = num(a.phase_lag);
    j["crater_statistic"] = num(a.crater);
    j["hull_area_mean"] = num(a.hull_mean);
    if (a.msd_mean) j["msd_from_fixed_point"] = num(*a.msd_mean);
    out.json_file("spectrum_summary.json", j);
    return j;
}

json run_power(const RunConfig& c, Output& out, std::ostream& log) {
    const EnsembleRun er = ensemble_run(c, out, log, c.write_trajectories);
    const StationaryAnalysis a = stationary(c, er);
    Csv s({"t", "p_sc", "p_q", "q_dot_cold", "w_sc_cum"});
    for (std::size_t i = 0; i < a.power.t.size(); ++i)
        s.row({a.power.t[i], a.power.p_sc[i], a.power.p_q[i], a.power.q_dot_cold[i], a.power.w_sc_cum[i]});
    out.write("power.csv", s.str());
    const ForceDiagnostics fd = force_diagnostics(make_ops(c));
    json j = ensemble_json(er);
    j["t_i"] = num(a.t_i);
    j["p0"] = num(a.p0);
    j["mean_p_sc"] = num(a.p_sc);
    j["mean_p_q"] = num(a.p_q);
    j["mean_q_dot_cold"] = num(a.q_dot_cold);
    j["p_q_over_p_sc"] = num(a.ratio);
    j["relative_gap_p_q_q_dot_cold"] = num(a.gap);
    j["force_linear_norm"] = num(fd.linear_norm);
    j["force_quadratic_norm"] = num(fd.quadratic_norm);
    j["force_quadratic_ratio"] = num(fd.ratio);
    out.json_file("power_summary.json", j);
    return j;
}

json run_check_operators(const RunConfig& c, Output& out, std::ostream& log) {
    const Basis basis(c.params.dim);
    const int margin = default_margin(c.params.dim);
    const CommutatorReport r = commutator_residuals(basis, margin);
    const Operator x = build_position(basis), p = build_momentum(basis);
    const Operator h = build_hamiltonian(basis, c.params.omega);
    const auto [a, ad] = build_ladder(basis);
    json conv = json::array();
    for (int d : {16, 32, 64}) {
        const CommutatorReport b = commutator_residuals_block(Basis(d), 8);
        conv.push_back({{"dim", d}, {"block", 8}, {"xp", num(b.xp_interior)}, {"xn", num(b.xn_interior)}});
    }
    const ForceDiagnostics fd = force_diagnostics(make_ops(c));
    json j{{"dim", r.dim},
           {"margin", r.margin},
           {"xp_interior", num(r.xp_interior)},
           {"xn_interior", num(r.xn_interior)},
           {"xp_full", num(r.xp_full)},
           {"xn_full", num(r.xn_full)},
           {"orthonormality_error", num(orthonormality_error(basis))},
           {"x_hermiticity", num(hermiticity_error(x.matrix))},
           {"p_hermiticity", num(hermiticity_error(p.matrix))},
           {"p_max_real", num(p.matrix.real().cwiseAbs().maxCoeff())},
           {"x00", num(x.matrix(0, 0).real())},
           {"fixed_block_convergence", conv},
           {"force_linear_norm", num(fd.linear_norm)},
           {"force_quadratic_norm", num(fd.quadratic_norm)}};
    out.json_file("operators.json", j);
    out.write("operators/X.csv", operator_csv(x));
    out.write("operators/P.csv", operator_csv(p));
    out.write("operators/a.csv", operator_csv(a));
    out.write("operators/H.csv", operator_csv(h));
    log << "check-operators: dim=" << r.dim << " margin=" << r.margin << " [X,P]-i " << fmt(r.xp_interior)
        << " [X,N]-iP/2 " << fmt(r.xn_interior) << "\n";
    return j;
}

json dispatch(RunKind kind, const RunConfig& c, Output& out, std::ostream& log);

json run_sweep(const RunConfig& c, Output& out, std::ostream& log) {
    const std::size_t n = c.sweep_values.size();
    std::vector<json> results(n);
    std::vector<std::vector<std::string>> files(n);
    std::vector<std::string> dirs(n);
    auto point = [&](std::size_t i, std::ostream& plog) {
        RunConfig pc = c;
        const double v = c.sweep_values[i];
        set_config_value(pc, c.sweep_param, c.sweep_param == "dim" ? std::to_string(std::llround(v)) : fmt(v));
        pc.run = c.sweep_run;
        dirs[i] = "point_" + padded(i, n);
        Output sub(out.root() / dirs[i]);
        results[i] = dispatch(c.sweep_run, pc, sub, plog);
        files[i] = sub.files();
    };
    const bool inner_parallel = c.sweep_run == RunKind::trajectories || c.sweep_run == RunKind::spectrum ||
                                c.sweep_run == RunKind::power;
    if (inner_parallel) {
        for (std::size_t i = 0; i < n; ++i) point(i, log);
    } else {
        std::vector<std::ostringstream> logs(n);
        parallel_for(n, c.threads ? c.threads : default_threads(), [&](std::size_t i) { point(i, logs[i]); });
        for (auto& l : logs) log << l.str();
    }
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& f : files[i]) out.files().push_back(dirs[i] + "/" + f);

    std::vector<std::string> keys;
    for (const auto& r : results)
        for (const auto& [k, v] : r.items())
            if (v.is_number() && std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    std::vector<std::string> header{c.sweep_param};
    header.insert(header.end(), keys.begin(), keys.end());
    Csv csv(header);
    json arr = json::array();
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> row{c.sweep_values[i]};
        for (const auto& k : keys)
            row.push_back(results[i].contains(k) && results[i][k].is_number() ? results[i][k].get<double>() : NAN);
        csv.row(row);
        arr.push_back({{"value", num(c.sweep_values[i])}, {"dir", dirs[i]}, {"summary", results[i]}});
    }
    out.write("sweep.csv", csv.str());
    json j{{"param", c.sweep_param}, {"run", to_string(c.sweep_run)}, {"points", arr}};
    out.json_file("sweep_summary.json", j);
    return j;
}

json dispatch(RunKind kind, const RunConfig& c, Output& out, std::ostream& log) {
    switch (kind) {
        case RunKind::evolve: return run_evolve(c, out, log);
        case RunKind::steady: return run_steady(c, out, log);
        case RunKind::trajectories: return run_trajectories(c, out, log);
        case RunKind::spectrum: return run_spectrum(c, out, log);
        case RunKind::power: return run_power(c, out, log);
        case RunKind::sweep: return run_sweep(c, out, log);
        case RunKind::check_operators: return run_check_operators(c, out, log);
    }
    throw std::logic_error("unhandled run kind");
}

}  // namespace

RunReport execute(const RunConfig& c, std::ostream& log) {
    RunReport rep;
    const auto t0 = std::chrono::steady_clock::now();
    Output out(c.output_dir);
    try {
        rep.summary = dispatch(c.run, c, out, log);
    } catch (const std::exception& e) {
        rep.exit_code = 1;
        rep.status = "failed";
        rep.error = e.what();
        log << "error: " << e.what() << "\n";
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rep.files = out.files();

    json seeds{{"master_seed", c.master_seed}};
    if (c.run == RunKind::trajectories || c.run == RunKind::spectrum || c.run == RunKind::power) {
        json per = json::array();
        for (int i = 0; i < c.n_traj; ++i) per.push_back(stream_seed(c.master_seed, static_cast<std::uint64_t>(i)));
        seeds["trajectory_seeds"] = per;
    }
    json manifest{{"version", QSHUTTLE_VERSION},
                  {"run", to_string(c.run)},
                  {"config", config_echo(c)},
                  {"explicit_keys", c.explicit_keys},
                  {"seeds", seeds},
                  {"isa", kernels::active().name},
                  {"wall_time_s", wall},
                  {"status", rep.status},
                  {"files", rep.files}};
    if (!rep.error.empty()) {
        manifest["error"] = rep.error;
        manifest["partial"] = true;
    }
    try {
        std::ofstream f(fs::path(c.output_dir) / "manifest.json", std::ios::binary);
        f << manifest.dump(2) << "\n";
        if (!f) throw std::runtime_error("cannot write manifest.json");
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        rep.exit_code = 1;
        rep.status = "failed";
    }
    return rep;
}

}  // namespace qshuttle

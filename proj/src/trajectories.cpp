#include "qshuttle/trajectories.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "qshuttle/parallel.hpp"
#include "qshuttle/rng.hpp"

namespace qshuttle {

TrajectoryEngine::TrajectoryEngine(const OperatorSet& ops, double dt)
    : ops_(ops), gen_(ops), obs_(gen_), dt_(dt), nojump_(gen_, dt, true) {
    for (const auto& pt : gen_.position_terms()) {
        if (!pt.monitored) continue;
        monitored_.push_back(pt.term);
        k_diag_.push_back(pt.q.array().square().matrix());
        q_.push_back(pt.q);
        e_.push_back(pt.e);
    }
}

std::vector<double> TrajectoryEngine::jump_probabilities(const BlockState& rho) const {
    std::vector<double> p(monitored_.size(), 0.0);
    const int ne = rho.ne, d = rho.d;
    for (std::size_t k = 0; k < monitored_.size(); ++k) {
        const JumpTerm& jt = ops_.jumps[monitored_[k]];
        if (jt.rate == 0.0) continue;
        double tr = 0.0;
        for (int a = 0; a < ne; ++a) {
            const double w = OperatorSet::electron_weight(jt.electron, a, ne);
            if (w == 0.0 || !rho.is_active(a, a)) continue;
            const CMat& blk = rho.at(a, a);
            for (int j = 0; j < d; ++j) tr += w * k_diag_[k][j] * blk(j, j).real();
        }
        p[k] = jt.rate * dt_ * tr;
        if (p[k] < -1e-12) throw JumpError("negative jump probability for " + jt.label + ": state corrupted");
        p[k] = std::max(p[k], 0.0);
    }
    return p;
}

BlockState TrajectoryEngine::apply_jump(const BlockState& rho, int term) const {
    const auto it = std::find(monitored_.begin(), monitored_.end(), term);
    if (it == monitored_.end()) throw std::invalid_argument("apply_jump: term is not a monitored jump");
    const std::size_t k = static_cast<std::size_t>(it - monitored_.begin());
    const RVec& q = q_[k];
    const Eigen::MatrixXd& e = e_[k];
    const int ne = rho.ne, d = rho.d;
    BlockState out(ne, d, rho.frame);
    const RMat qq = q * q.transpose();
    for (int c = 0; c < ne; ++c)
        for (int f = 0; f < ne; ++f) {
            if (!rho.is_active(c, f)) continue;
            for (int a = 0; a < ne; ++a)
                for (int b = 0; b < ne; ++b) {
                    const double w = e(a, c) * e(b, f);
                    if (w == 0.0) continue;
                    out.activate(a, b);
                    out.at(a, b).array() += w * qq.array().cast<cplx>() * rho.at(c, f).array();
                }
        }
    const double tr = out.trace();
    if (!(tr >= 1e-14)) throw JumpError("jump " + ops_.jumps[term].label + " forced on a state with zero probability");
    out.scale(1.0 / tr);
    return out;
}

StepOutcome TrajectoryEngine::step(BlockState& rho, double u, SplitStepper& stepper) const {
    StepOutcome out;
    const std::vector<double> p = jump_probabilities(rho);
    for (double v : p) out.p_total += v;
    if (u < out.p_total) {
        double acc = 0.0;
        std::size_t k = 0;
        for (; k + 1 < p.size(); ++k) {
            acc += p[k];
            if (u < acc) break;
        }
        const double e0 = obs_.energy(rho);
        rho = apply_jump(rho, monitored_[k]);
        out.event = monitored_[k];
        out.de_jump = obs_.energy(rho) - e0;
        return out;
    }
    const double tr = stepper.step(rho);
    if (!(tr > 1e-300) || !std::isfinite(tr)) throw JumpError("no-jump evolution lost all weight");
    rho.scale(1.0 / tr);
    return out;
}

TrajectoryRecord TrajectoryEngine::run(const CMat& rho0, const TrajectoryOptions& opt, std::uint64_t seed, int index) const {
    const std::size_t n = step_count(opt.t_max, opt.dt);
    if (std::abs(opt.dt - dt_) > 1e-15 * dt_) throw std::invalid_argument("TrajectoryEngine::run: dt differs from the engine's");
    if (opt.record_stride < 1) throw ParamError("record_stride", "must be at least 1");
    const auto stride = static_cast<std::size_t>(opt.record_stride);
    TrajectoryRecord rec;
    rec.seed = seed;
    rec.index = index;
    std::mt19937_64 rng(seed);
    SplitStepper stepper = make_stepper();
    BlockState rho;
    gen_.to_position(BlockState::from_dense(rho0, ops_.ne, Frame::energy), rho);

    double de_acc = 0.0;
    int last_event = -1;
    auto record = [&](double t) {
        Sample s;
        obs_.measure(rho, s);
        s.t = t;
        s.e_dot_total = gen_.energy_rate(rho);
        s.de_jump = de_acc;
        s.event = last_event;
        rec.samples.push_back(s);
        de_acc = 0.0;
        last_event = -1;
    };
    record(0.0);
    for (std::size_t i = 1; i <= n; ++i) {
        const double u = uniform01(rng);
        const StepOutcome o = step(rho, u, stepper);
        const double t = static_cast<double>(i) * opt.dt;
        rec.max_step_probability = std::max(rec.max_step_probability, o.p_total);
        if (o.p_total > opt.warn_probability) ++rec.probability_warnings;
        if (o.event >= 0) {
            rec.jumps.push_back({t, o.event, ops_.jumps[o.event].label});
            de_acc += o.de_jump;
            last_event = o.event;
        }
        if (i % stride == 0 || i == n) record(t);
    }
    return rec;
}

const std::vector<std::string>& ensemble_observables() {
    static const std::vector<std::string> names{"x_mean", "v_mean", "n_phonon", "n_electron", "force", "force_v",
                                                "q_dot_hot", "q_dot_cold", "e_dot_control", "e_dot_meas"};
    return names;
}

double sample_value(const Sample& s, const std::string& name) {
    static const std::map<std::string, double Sample::*> fields{
        {"x_mean", &Sample::x},          {"v_mean", &Sample::v},           {"n_phonon", &Sample::n_phonon},
        {"n_electron", &Sample::n_electron}, {"force", &Sample::force},    {"force_v", &Sample::force_v},
        {"q_dot_hot", &Sample::q_dot_hot}, {"q_dot_cold", &Sample::q_dot_cold},
        {"e_dot_control", &Sample::e_dot_control}, {"e_dot_meas", &Sample::e_dot_meas},
        {"trace", &Sample::trace},       {"de_jump", &Sample::de_jump}};
    const auto it = fields.find(name);
    if (it == fields.end()) throw std::invalid_argument("unknown observable " + name);
    return s.*(it->second);
}

const SeriesStats& Ensemble::operator[](const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return stats[i];
    throw std::invalid_argument("ensemble has no observable " + name);
}

void summarise(Ensemble& e) {
    e.names = ensemble_observables();
    e.stats.assign(e.names.size(), {});
    e.t.clear();
    if (e.records.empty()) return;
    const std::size_t ns = e.records.front().samples.size();
    for (const auto& r : e.records)
        if (r.samples.size() != ns) throw std::invalid_argument("summarise: records on different grids");
    for (std::size_t i = 0; i < ns; ++i) e.t.push_back(e.records.front().samples[i].t);
    const double n = static_cast<double>(e.records.size());
    std::vector<double> vals(e.records.size());
    for (std::size_t o = 0; o < e.names.size(); ++o) {
        SeriesStats& st = e.stats[o];
        st.mean.resize(ns);
        st.stderr_.resize(ns);
        for (std::size_t i = 0; i < ns; ++i) {
            for (std::size_t r = 0; r < e.records.size(); ++r) vals[r] = sample_value(e.records[r].samples[i], e.names[o]);
            std::sort(vals.begin(), vals.end());
            double sum = 0.0;
            for (double v : vals) sum += v;
            const double mean = sum / n;
            double ss = 0.0;
            for (double v : vals) ss += (v - mean) * (v - mean);
            st.mean[i] = mean;
            st.stderr_[i] = e.records.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
        }
    }
}

Ensemble run_ensemble(const TrajectoryEngine& engine, const CMat& rho0, const TrajectoryOptions& opt, int n_traj,
                      std::uint64_t master_seed, unsigned threads) {
    if (n_traj < 1) throw ParamError("n_traj", "must be at least 1");
    Ensemble e;
    e.master_seed = master_seed;
    e.records.resize(static_cast<std::size_t>(n_traj));
    parallel_for(e.records.size(), threads, [&](std::size_t i) {
        e.records[i] = engine.run(rho0, opt, stream_seed(master_seed, i), static_cast<int>(i));
    });
    summarise(e);
    return e;
}

}  // namespace qshuttle

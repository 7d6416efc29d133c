#include "qshuttle/master_equation.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace qshuttle {

CMat lindblad_apply(const OperatorSet& ops, const CMat& rho) {
    const CMat& h = ops.h.matrix;
    if (rho.rows() != h.rows() || rho.cols() != h.cols()) throw std::invalid_argument("lindblad_apply: dimension mismatch");
    CMat out = cplx(0.0, -1.0) * (h * rho - rho * h);
    for (const JumpTerm& t : ops.jumps) {
        if (t.rate == 0.0) continue;
        const CMat& o = t.op.matrix;
        const CMat od = o.adjoint();
        const CMat k = od * o;
        out += t.rate * (o * rho * od - 0.5 * (k * rho + rho * k));
    }
    return out;
}

DenseLiouvillian::DenseLiouvillian(const OperatorSet& ops) : h_(ops.h.matrix) {
    for (const JumpTerm& t : ops.jumps) {
        if (t.rate == 0.0) continue;
        Term term{t.rate, t.op.matrix, t.op.matrix.adjoint(), CMat()};
        term.k = term.od * term.o;
        terms_.push_back(std::move(term));
    }
}

void DenseLiouvillian::apply(const CMat& rho, CMat& out) const {
    out.noalias() = cplx(0.0, -1.0) * (h_ * rho);
    out.noalias() += cplx(0.0, 1.0) * (rho * h_);
    for (const Term& t : terms_) {
        out.noalias() += t.rate * (t.o * rho * t.od);
        out.noalias() -= (0.5 * t.rate) * (t.k * rho);
        out.noalias() -= (0.5 * t.rate) * (rho * t.k);
    }
}

InitialState parse_initial_state(const std::string& s) {
    if (s == "ground_empty") return InitialState::ground_empty;
    if (s == "ground_occupied") return InitialState::ground_occupied;
    throw ParamError("initial_state", "expected ground_empty or ground_occupied, got '" + s + "'");
}

std::string to_string(InitialState s) { return s == InitialState::ground_empty ? "ground_empty" : "ground_occupied"; }

Integrator parse_integrator(const std::string& s) {
    if (s == "split") return Integrator::split;
    if (s == "rk4") return Integrator::rk4;
    throw ParamError("integrator", "expected split or rk4, got '" + s + "'");
}

std::string to_string(Integrator i) { return i == Integrator::split ? "split" : "rk4"; }

CMat initial_state(const OperatorSet& ops, InitialState kind) {
    const int n = ops.full_dim();
    CMat rho = CMat::Zero(n, n);
    const int level = (ops.ne == 2 && kind == InitialState::ground_occupied) ? 1 : 0;
    rho(level * ops.basis.dim, level * ops.basis.dim) = 1.0;
    return rho;
}

std::size_t step_count(double t_max, double dt) {
    if (!(dt > 0.0)) throw ParamError("dt", "must be positive");
    if (!(t_max >= dt)) throw ParamError("t_max", "must be at least dt");
    return static_cast<std::size_t>(std::llround(t_max / dt));
}

double FluxBreakdown::identity_error() const {
    const double scale = std::max({std::abs(q_dot_hot), std::abs(q_dot_cold), std::abs(e_dot_control), std::abs(e_dot_total)});
    const double diff = std::abs(q_dot_hot - q_dot_cold + e_dot_control - e_dot_total);
    return scale > 0.0 ? diff / scale : diff;
}

FluxBreakdown flux_breakdown(const Sample& s) {
    FluxBreakdown f;
    f.time = s.t;
    f.q_dot_hot = s.q_dot_hot;
    f.q_dot_cold = s.q_dot_cold;
    f.e_dot_control = s.e_dot_control;
    f.e_dot_total = s.e_dot_total;
    f.q_hot_mean_field = s.q_hot_mean_field;
    f.q_hot_closed = s.q_hot_closed;
    f.q_cold_closed = s.q_cold_closed;
    f.e_ctrl_closed = s.e_ctrl_closed;
    return f;
}

FluxBreakdown flux_breakdown(const ObservableSet& obs, const BlockState& rho_x, double t) {
    Sample s;
    obs.measure(rho_x, s);
    s.t = t;
    s.e_dot_total = obs.generator().energy_rate(rho_x);
    return flux_breakdown(s);
}

namespace {

void record(const Generator& g, const ObservableSet& obs, const BlockState& rho, double t, const EvolveOptions& opt,
            EvolveResult& res) {
    Sample s;
    obs.measure(rho, s);
    s.t = t;
    s.e_dot_total = g.energy_rate(rho);
    if (opt.track_min_eig) {
        s.min_eig = rho.min_eigenvalue();
        res.min_eigenvalue = std::min(res.min_eigenvalue, s.min_eig);
        if (s.min_eig < opt.min_eig_abort)
            throw PositivityError("density matrix lost positivity at t=" + std::to_string(t) +
                                  " (min eigenvalue " + std::to_string(s.min_eig) + ")");
    }
    res.max_hermiticity = std::max(res.max_hermiticity, s.hermiticity);
    res.max_trace_error = std::max(res.max_trace_error, std::abs(s.trace - 1.0));
    res.max_identity_error = std::max(res.max_identity_error, flux_breakdown(s).identity_error());
    res.samples.push_back(s);
}

void check_trace(double tr, double t, const EvolveOptions& opt) {
    if (!std::isfinite(tr) || std::abs(tr - 1.0) > opt.trace_abort)
        throw StepSizeError("trace drifted to " + std::to_string(tr) + " at t=" + std::to_string(t) +
                            "; reduce dt");
}

}  // namespace

EvolveResult evolve(const OperatorSet& ops, const CMat& rho0, const EvolveOptions& opt) {
    const std::size_t n = step_count(opt.t_max, opt.dt);
    if (opt.record_stride < 1) throw ParamError("record_stride", "must be at least 1");
    const auto stride = static_cast<std::size_t>(opt.record_stride);
    Generator g(ops);
    ObservableSet obs(g);
    EvolveResult res;
    BlockState rho;
    g.to_position(BlockState::from_dense(rho0, ops.ne, Frame::energy), rho);
    record(g, obs, rho, 0.0, opt, res);

    if (opt.integrator == Integrator::split) {
        SplitStepper st(g, opt.dt, false);
        for (std::size_t i = 1; i <= n; ++i) {
            const double tr = st.step(rho);
            const double t = static_cast<double>(i) * opt.dt;
            check_trace(tr, t, opt);
            if (i % stride == 0 || i == n) record(g, obs, rho, t, opt, res);
        }
    } else {
        DenseLiouvillian lv(ops);
        CMat r = rho0, k1, k2, k3, k4, stage;
        const double h = opt.dt;
        for (std::size_t i = 1; i <= n; ++i) {
            lv.apply(r, k1);
            stage = r + 0.5 * h * k1;
            lv.apply(stage, k2);
            stage = r + 0.5 * h * k2;
            lv.apply(stage, k3);
            stage = r + h * k3;
            lv.apply(stage, k4);
            r += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            const double t = static_cast<double>(i) * h;
            check_trace(r.trace().real(), t, opt);
            if (i % stride == 0 || i == n) {
                g.to_position(BlockState::from_dense(r, ops.ne, Frame::energy), rho);
                record(g, obs, rho, t, opt, res);
            }
        }
        g.to_position(BlockState::from_dense(r, ops.ne, Frame::energy), rho);
    }
    res.final_state = rho;
    return res;
}

namespace {

struct EnergyTerm {
    double rate;
    Eigen::MatrixXd e;
    CMat q, k;
};

std::size_t pair_index(int r, int s, int d) {
    return static_cast<std::size_t>(r) * d - static_cast<std::size_t>(r) * (r + 1) / 2 + (s - r - 1);
}

// Blocks reachable from the diagonal under the generator's electron structure.
std::vector<int> charge_sector(const OperatorSet& ops, const std::vector<EnergyTerm>& terms) {
    const int ne = ops.ne;
    std::set<int> sector;
    for (int a = 0; a < ne; ++a) sector.insert(a * ne + a);
    bool grew = true;
    while (grew) {
        grew = false;
        for (const EnergyTerm& t : terms) {
            const Eigen::MatrixXd ete = t.e.transpose() * t.e;
            for (int i : std::set<int>(sector)) {
                const int c = i / ne, e = i % ne;
                auto add = [&](int a, int b) {
                    if (sector.insert(a * ne + b).second) grew = true;
                };
                for (int a = 0; a < ne; ++a)
                    for (int b = 0; b < ne; ++b)
                        if (t.e(a, c) * t.e(b, e) != 0.0) add(a, b);
                for (int a = 0; a < ne; ++a)
                    if (ete(a, c) != 0.0) add(a, e);
                for (int b = 0; b < ne; ++b)
                    if (ete(e, b) != 0.0) add(c, b);
            }
        }
    }
    return {sector.begin(), sector.end()};
}

SteadyResult finish(const OperatorSet& ops, BlockState rho_e, const SteadyOptions& opt, SteadyResult res) {
    const CMat dense = rho_e.to_dense();
    res.residual = max_abs(lindblad_apply(ops, dense));
    res.converged = res.residual < opt.residual_tol;
    Generator g(ops);
    ObservableSet obs(g);
    BlockState rx;
    g.to_position(rho_e, rx);
    obs.measure(rx, res.observables);
    res.observables.e_dot_total = g.energy_rate(rx);
    res.observables.min_eig = rx.min_eigenvalue();
    res.rho = std::move(rho_e);
    return res;
}

SteadyResult steady_long_time(const OperatorSet& ops, const SteadyOptions& opt, std::size_t unknowns) {
    Generator g(ops);
    SplitStepper st(g, opt.fallback_dt, false);
    BlockState rho;
    g.to_position(BlockState::from_dense(initial_state(ops, InitialState::ground_empty), ops.ne, Frame::energy), rho);
    const Observable nph = g.observable(ops.number_osc.matrix);
    const double chunk = ops.params.kappa > 0.0 ? 1.0 / ops.params.kappa : 20.0;
    const std::size_t per_chunk = std::max<std::size_t>(1, step_count(chunk, opt.fallback_dt));
    double last = g.expect(nph, rho);
    double t = 0.0;
    while (t < opt.fallback_t_max) {
        for (std::size_t i = 0; i < per_chunk; ++i) st.step(rho);
        t += static_cast<double>(per_chunk) * opt.fallback_dt;
        const double now = g.expect(nph, rho);
        if (std::abs(now - last) < 1e-10 * std::max(1.0, std::abs(now))) break;
        last = now;
    }
    BlockState rho_e;
    g.to_energy(rho, rho_e);
    SteadyResult res;
    res.method = "long_time";
    res.unknowns = unknowns;
    return finish(ops, std::move(rho_e), opt, std::move(res));
}

}  // namespace

SteadyResult steady_state(const OperatorSet& ops, const SteadyOptions& opt) {
    const int ne = ops.ne, d = ops.basis.dim;
    std::vector<EnergyTerm> terms;
    for (const JumpTerm& jt : ops.jumps) {
        if (jt.rate == 0.0) continue;
        EnergyTerm t;
        t.rate = jt.rate;
        t.e = ne == 1 ? Eigen::MatrixXd::Identity(1, 1) : Eigen::MatrixXd(electron_matrix(jt.electron).real());
        t.q = jt.osc.matrix;
        t.k = t.q.adjoint() * t.q;
        terms.push_back(std::move(t));
    }
    const std::vector<int> sector = charge_sector(ops, terms);
    for (int b : sector)
        if (b / ne != b % ne)
            throw SteadyStateError("steady_state: generator couples electron coherences; unsupported sector structure");

    const std::size_t per_block = static_cast<std::size_t>(d) * d;
    const std::size_t n = per_block * sector.size();
    if (n > opt.dense_limit) return steady_long_time(ops, opt, n);

    // level a -> offset of its parameters; -1 when outside the sector
    std::vector<long> offset(ne, -1);
    for (std::size_t s = 0; s < sector.size(); ++s) offset[sector[s] / ne] = static_cast<long>(s * per_block);

    RVec energies(d);
    for (int j = 0; j < d; ++j) energies[j] = ops.h_osc.matrix(j, j).real();

    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    std::vector<CMat> y(ne, CMat::Zero(d, d));
    std::vector<char> touched(ne, 0);

    auto probe = [&](int c, int j, int m, cplx beta, std::size_t col) {
        // basis element beta |j><m| + conj(beta) |m><j| (single term when j == m)
        for (int a = 0; a < ne; ++a) {
            y[a].setZero();
            touched[a] = 0;
        }
        const bool diag = j == m;
        const cplx bb = std::conj(beta);
        for (const EnergyTerm& t : terms) {
            for (int a = 0; a < ne; ++a) {
                if (offset[a] < 0) continue;
                const double w = t.rate * t.e(a, c) * t.e(a, c);
                if (w == 0.0) continue;
                touched[a] = 1;
                for (int rr = 0; rr < d; ++rr)
                    for (int ss = rr; ss < d; ++ss) {
                        cplx v = beta * t.q(rr, j) * std::conj(t.q(ss, m));
                        if (!diag) v += bb * t.q(rr, m) * std::conj(t.q(ss, j));
                        y[a](rr, ss) += w * v;
                    }
            }
            const double ete = (t.e.transpose() * t.e)(c, c);
            if (ete == 0.0) continue;
            touched[c] = 1;
            const double h = -0.5 * t.rate * ete;
            // K B: column m gets beta K(:,j), column j gets conj(beta) K(:,m)
            for (int rr = 0; rr < d; ++rr) {
                y[c](rr, m) += h * beta * t.k(rr, j);
                if (!diag) y[c](rr, j) += h * bb * t.k(rr, m);
            }
            // B K: row j gets beta K(m,:), row m gets conj(beta) K(j,:)
            for (int ss = 0; ss < d; ++ss) {
                y[c](j, ss) += h * beta * t.k(m, ss);
                if (!diag) y[c](m, ss) += h * bb * t.k(j, ss);
            }
        }
        // -i [H, B]
        touched[c] = 1;
        y[c](j, m) += cplx(0.0, -1.0) * (energies[j] - energies[m]) * beta;
        if (!diag) y[c](m, j) += cplx(0.0, -1.0) * (energies[m] - energies[j]) * bb;

        for (int a = 0; a < ne; ++a) {
            if (!touched[a] || offset[a] < 0) continue;
            const auto off = static_cast<Eigen::Index>(offset[a]);
            for (int rr = 0; rr < d; ++rr) {
                r(off + rr, static_cast<Eigen::Index>(col)) = y[a](rr, rr).real();
                for (int ss = rr + 1; ss < d; ++ss) {
                    const auto pi = static_cast<Eigen::Index>(d + 2 * pair_index(rr, ss, d));
                    r(off + pi, static_cast<Eigen::Index>(col)) = y[a](rr, ss).real();
                    r(off + pi + 1, static_cast<Eigen::Index>(col)) = y[a](rr, ss).imag();
                }
            }
        }
    };

    for (int b : sector) {
        const int c = b / ne;
        const auto off = static_cast<std::size_t>(offset[c]);
        for (int j = 0; j < d; ++j) probe(c, j, j, 1.0, off + j);
        for (int j = 0; j < d; ++j)
            for (int m = j + 1; m < d; ++m) {
                const std::size_t pi = d + 2 * pair_index(j, m, d);
                probe(c, j, m, cplx(1.0, 0.0), off + pi);
                probe(c, j, m, cplx(0.0, 1.0), off + pi + 1);
            }
    }

    // trace normalisation replaces the (redundant) first population equation
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    r.row(0).setZero();
    for (int b : sector) {
        const auto off = static_cast<Eigen::Index>(offset[b / ne]);
        for (int j = 0; j < d; ++j) r(0, off + j) = 1.0;
    }
    rhs[0] = 1.0;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(r);
    SteadyResult res;
    res.method = "dense_lu";
    res.unknowns = n;
    // the condition estimate can miss exact zero pivots, so the pivot spread bounds it too
    const Eigen::VectorXd piv = lu.matrixLU().diagonal().cwiseAbs();
    res.rcond = std::min(lu.rcond(), piv.minCoeff() / piv.maxCoeff());
    if (!(res.rcond > opt.degenerate_rcond))
        throw SteadyStateError("steady_state: degenerate null space (rcond " + std::to_string(res.rcond) +
                               "); the stationary state is not unique");
    const Eigen::VectorXd xs = lu.solve(rhs);

    BlockState rho(ne, d, Frame::energy);
    for (int b : sector) {
        const int a = b / ne;
        rho.activate(a, a);
        CMat& blk = rho.at(a, a);
        const auto off = static_cast<Eigen::Index>(offset[a]);
        for (int j = 0; j < d; ++j) {
            blk(j, j) = xs[off + j];
            for (int m = j + 1; m < d; ++m) {
                const auto pi = static_cast<Eigen::Index>(d + 2 * pair_index(j, m, d));
                blk(j, m) = cplx(xs[off + pi], xs[off + pi + 1]);
                blk(m, j) = std::conj(blk(j, m));
            }
        }
    }
    return finish(ops, std::move(rho), opt, std::move(res));
}

}  // namespace qshuttle

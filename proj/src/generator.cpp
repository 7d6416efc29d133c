#include "qshuttle/generator.hpp"

#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

namespace qshuttle {

BlockState::BlockState(int ne_, int d_, Frame f) : ne(ne_), d(d_), frame(f), blocks(ne_ * ne_), active(ne_ * ne_, 0) {}

void BlockState::activate(int a, int b) {
    const int i = index(a, b);
    if (!active[i]) {
        blocks[i].setZero(d, d);
        active[i] = 1;
    }
}

void BlockState::deactivate(int a, int b) { active[index(a, b)] = 0; }

double BlockState::trace() const {
    double t = 0.0;
    for (int a = 0; a < ne; ++a)
        if (is_active(a, a)) t += at(a, a).diagonal().real().sum();
    return t;
}

void BlockState::scale(double s) {
    for (std::size_t i = 0; i < blocks.size(); ++i)
        if (active[i]) blocks[i] *= s;
}

double BlockState::electron_population(int a) const {
    return is_active(a, a) ? at(a, a).diagonal().real().sum() : 0.0;
}

double BlockState::hermiticity_error() const {
    double r = 0.0;
    for (int a = 0; a < ne; ++a)
        for (int b = a; b < ne; ++b) {
            const bool ab = is_active(a, b), ba = is_active(b, a);
            if (!ab && !ba) continue;
            if (a == b) {
                r = std::max(r, qshuttle::hermiticity_error(at(a, a)));
            } else if (ab && ba) {
                r = std::max(r, max_abs(at(a, b) - at(b, a).adjoint()));
            } else {
                r = std::max(r, max_abs(ab ? at(a, b) : at(b, a)));
            }
        }
    return r;
}

double BlockState::min_eigenvalue() const {
    bool coherent = false;
    for (int a = 0; a < ne; ++a)
        for (int b = 0; b < ne; ++b)
            if (a != b && is_active(a, b)) coherent = true;
    if (coherent) return qshuttle::min_eigenvalue(to_dense());
    // block diagonal: the spectrum is the union of the block spectra, zero for empty blocks
    double m = 0.0;
    bool first = true;
    for (int a = 0; a < ne; ++a) {
        const double e = is_active(a, a) ? qshuttle::min_eigenvalue(at(a, a)) : 0.0;
        m = first ? e : std::min(m, e);
        first = false;
    }
    return m;
}

BlockState BlockState::from_dense(const CMat& rho, int ne, Frame f) {
    const int d = static_cast<int>(rho.rows()) / ne;
    if (d * ne != rho.rows() || rho.rows() != rho.cols()) throw std::invalid_argument("from_dense: dimension mismatch");
    BlockState s(ne, d, f);
    for (int a = 0; a < ne; ++a)
        for (int b = 0; b < ne; ++b) {
            CMat blk = rho.block(a * d, b * d, d, d);
            if (max_abs(blk) == 0.0) continue;
            s.activate(a, b);
            s.at(a, b) = blk;
        }
    return s;
}

CMat BlockState::to_dense() const {
    CMat r = CMat::Zero(ne * d, ne * d);
    for (int a = 0; a < ne; ++a)
        for (int b = 0; b < ne; ++b)
            if (is_active(a, b)) r.block(a * d, b * d, d, d) = at(a, b);
    return r;
}

void ElementwiseMap::apply(const kernels::Table& k, const BlockState& in, BlockState& out) const {
    if (&in == &out) throw std::invalid_argument("ElementwiseMap::apply: in and out must differ");
    out.ne = in.ne;
    out.d = in.d;
    out.frame = in.frame;
    out.blocks.resize(in.blocks.size());
    out.active.assign(in.active.size(), 0);
    const std::size_t n = static_cast<std::size_t>(in.d) * in.d;
    for (const auto& e : entries) {
        if (!in.active[e.in]) continue;
        CMat& dst = out.blocks[e.out];
        const bool first = !out.active[e.out];
        if (first) {
            dst.resize(in.d, in.d);
            out.active[e.out] = 1;
        }
        k.cscale_real(n, e.coef.data(), raw(in.blocks[e.in]), raw(dst), !first);
    }
}

namespace {

thread_local CMat t_scratch_a, t_scratch_b;

bool single_offset(const CMat& m, int& shift, RVec& o) {
    const int d = static_cast<int>(m.rows());
    shift = 0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            const cplx v = m(i, j);
            if (v == cplx(0.0)) continue;
            if (v.imag() != 0.0) return false;
            const int s = j - i;
            if (s == 0) return false;
            if (shift == 0) shift = s;
            if (s != shift) return false;
        }
    if (shift == 0) shift = 1;
    o = RVec::Zero(d);
    for (int i = 0; i < d; ++i) {
        const int j = i + shift;
        if (j >= 0 && j < d) o[i] = m(i, j).real();
    }
    return true;
}

}  // namespace

Generator::Generator(const OperatorSet& ops, const kernels::Table& table) : ops_(ops), table_(table) {
    const int d = ops.basis.dim;
    v_ = ops.xeig.v;
    vt_ = v_.transpose();
    energies_.resize(d);
    for (int j = 0; j < d; ++j) {
        energies_[j] = ops.h_osc.matrix(j, j).real();
        for (int m = 0; m < d; ++m)
            if (m != j && ops.h_osc.matrix(j, m) != cplx(0.0)) throw std::invalid_argument("Generator: H_osc must be diagonal");
    }
    for (std::size_t t = 0; t < ops.jumps.size(); ++t) {
        const JumpTerm& jt = ops.jumps[t];
        if (jt.x_profile) {
            PositionTerm pt;
            pt.term = static_cast<int>(t);
            pt.rate = jt.rate;
            pt.q = *jt.x_profile;
            pt.monitored = is_tunnelling(jt.channel);
            pt.e = ops.ne == 1 ? Eigen::MatrixXd::Identity(1, 1) : Eigen::MatrixXd(electron_matrix(jt.electron).real());
            pos_terms_.push_back(std::move(pt));
            continue;
        }
        LadderTerm lt;
        lt.term = static_cast<int>(t);
        lt.rate = jt.rate;
        if (jt.electron != ElectronOp::identity || !single_offset(jt.osc.matrix, lt.shift, lt.o)) {
            splittable_ = false;
            continue;
        }
        lt.k = RVec::Zero(d);
        for (int i = 0; i < d; ++i) {
            const int p = i + lt.shift;
            if (p >= 0 && p < d) lt.k[p] += lt.o[i] * lt.o[i];
        }
        ladder_terms_.push_back(std::move(lt));
    }
    gen_full_ = position_generator(false);
    h_obs_ = observable(ops.h_osc.matrix);
}

void Generator::to_energy(const BlockState& in, BlockState& out) const {
    out.ne = in.ne;
    out.d = in.d;
    out.frame = Frame::energy;
    out.blocks.resize(in.blocks.size());
    out.active = in.active;
    for (std::size_t i = 0; i < in.blocks.size(); ++i)
        if (in.active[i]) real_congruence(table_, v_, in.blocks[i], out.blocks[i], t_scratch_a);
}

void Generator::to_position(const BlockState& in, BlockState& out) const {
    out.ne = in.ne;
    out.d = in.d;
    out.frame = Frame::position;
    out.blocks.resize(in.blocks.size());
    out.active = in.active;
    for (std::size_t i = 0; i < in.blocks.size(); ++i)
        if (in.active[i]) real_congruence(table_, vt_, in.blocks[i], out.blocks[i], t_scratch_a);
}

Observable Generator::observable(const CMat& energy_osc) const {
    return observable(std::vector<CMat>(ops_.ne, energy_osc));
}

Observable Generator::observable(const std::vector<CMat>& energy_levels) const {
    Observable o;
    o.level.resize(ops_.ne);
    for (int a = 0; a < ops_.ne && a < static_cast<int>(energy_levels.size()); ++a) {
        if (energy_levels[a].size() == 0) continue;
        real_congruence(table_, vt_, energy_levels[a], o.level[a], t_scratch_a);
    }
    return o;
}

double Generator::expect(const Observable& o, const BlockState& rho) const {
    double s = 0.0;
    for (int a = 0; a < rho.ne; ++a)
        if (rho.is_active(a, a) && o.level[a].size() != 0) s += expect_hermitian(table_, o.level[a], rho.at(a, a));
    return s;
}

Eigen::MatrixXd Generator::local_generator(int j, int m, bool no_jump) const {
    const int ne = ops_.ne;
    const int n2 = ne * ne;
    Eigen::MatrixXd mm = Eigen::MatrixXd::Zero(n2, n2);
    for (const auto& t : pos_terms_) {
        if (t.rate == 0.0) continue;
        const double qj = t.q[j], qm = t.q[m];
        const Eigen::MatrixXd ete = t.e.transpose() * t.e;
        for (int a = 0; a < ne; ++a)
            for (int b = 0; b < ne; ++b) {
                const int o = a * ne + b;
                if (!(no_jump && t.monitored))
                    for (int c = 0; c < ne; ++c)
                        for (int e = 0; e < ne; ++e) mm(o, c * ne + e) += t.rate * qj * qm * t.e(a, c) * t.e(b, e);
                for (int c = 0; c < ne; ++c) mm(o, c * ne + b) -= 0.5 * t.rate * qj * qj * ete(a, c);
                for (int e = 0; e < ne; ++e) mm(o, a * ne + e) -= 0.5 * t.rate * qm * qm * ete(e, b);
            }
    }
    return mm;
}

namespace {

ElementwiseMap collect(int ne, int d, const std::vector<Eigen::MatrixXd>& local) {
    const int n2 = ne * ne;
    ElementwiseMap map;
    map.ne = ne;
    for (int o = 0; o < n2; ++o)
        for (int i = 0; i < n2; ++i) {
            bool nonzero = false;
            for (const auto& l : local)
                if (l(o, i) != 0.0) {
                    nonzero = true;
                    break;
                }
            if (!nonzero) continue;
            ElementwiseMap::Entry e;
            e.out = o;
            e.in = i;
            e.coef.resize(d, d);
            for (int j = 0; j < d; ++j)
                for (int m = 0; m < d; ++m) e.coef(j, m) = local[j * d + m](o, i);
            map.entries.push_back(std::move(e));
        }
    return map;
}

}  // namespace

ElementwiseMap Generator::position_generator(bool no_jump) const {
    const int d = dim();
    std::vector<Eigen::MatrixXd> local(static_cast<std::size_t>(d) * d);
    for (int j = 0; j < d; ++j)
        for (int m = 0; m < d; ++m) local[j * d + m] = local_generator(j, m, no_jump);
    return collect(ne(), d, local);
}

ElementwiseMap Generator::position_propagator(double tau, bool no_jump) const {
    const int d = dim();
    const int n2 = ne() * ne();
    std::vector<Eigen::MatrixXd> local(static_cast<std::size_t>(d) * d);
    for (int j = 0; j < d; ++j)
        for (int m = 0; m < d; ++m) {
            Eigen::MatrixXd g = tau * local_generator(j, m, no_jump);
            if (n2 == 1) {
                local[j * d + m] = Eigen::MatrixXd::Constant(1, 1, std::exp(g(0, 0)));
            } else {
                Eigen::MatrixXd p = g.exp();
                // keep the structural zeros of the generator's block pattern exact
                for (int o = 0; o < n2; ++o)
                    for (int i = 0; i < n2; ++i)
                        if (std::abs(p(o, i)) < 1e-300) p(o, i) = 0.0;
                local[j * d + m] = p;
            }
        }
    return collect(ne(), d, local);
}

void Generator::apply_ladder(const CMat& rho, CMat& out, bool with_hamiltonian) const {
    const int d = dim();
    out.resize(d, d);
    for (int j = 0; j < d; ++j)
        for (int m = 0; m < d; ++m) {
            cplx acc = 0.0;
            if (with_hamiltonian) acc += cplx(0.0, -(energies_[j] - energies_[m])) * rho(j, m);
            for (const auto& t : ladder_terms_) {
                if (t.rate == 0.0) continue;
                const int jp = j + t.shift, mp = m + t.shift;
                if (jp >= 0 && jp < d && mp >= 0 && mp < d) acc += t.rate * t.o[j] * t.o[m] * rho(jp, mp);
                acc -= 0.5 * t.rate * (t.k[j] + t.k[m]) * rho(j, m);
            }
            out(j, m) = acc;
        }
}

double Generator::energy_rate(const BlockState& rho_x) const {
    static thread_local BlockState la, rho_e;
    gen_full_.apply(table_, rho_x, la);
    double s = expect(h_obs_, la);
    to_energy(rho_x, rho_e);
    CMat y;
    for (int a = 0; a < rho_e.ne; ++a) {
        if (!rho_e.is_active(a, a)) continue;
        apply_ladder(rho_e.at(a, a), y, true);
        for (int j = 0; j < dim(); ++j) s += energies_[j] * y(j, j).real();
    }
    return s;
}

void Generator::apply_energy(const BlockState& rho, BlockState& out) const {
    const int ne = rho.ne, d = rho.d;
    out = BlockState(ne, d, Frame::energy);
    CMat y;
    for (int a = 0; a < ne; ++a)
        for (int b = 0; b < ne; ++b) {
            if (!rho.is_active(a, b)) continue;
            apply_ladder(rho.at(a, b), y, true);
            out.activate(a, b);
            out.at(a, b) += y;
        }
    for (const auto& t : pos_terms_) {
        if (t.rate == 0.0) continue;
        const CMat& q = ops_.jumps[t.term].osc.matrix;
        const CMat k = q.adjoint() * q;
        const Eigen::MatrixXd ete = t.e.transpose() * t.e;
        for (int c = 0; c < ne; ++c)
            for (int e = 0; e < ne; ++e) {
                if (!rho.is_active(c, e)) continue;
                const CMat& r = rho.at(c, e);
                const CMat sand = q * r * q.adjoint();
                const CMat kr = k * r;
                const CMat rk = r * k;
                for (int a = 0; a < ne; ++a)
                    for (int b = 0; b < ne; ++b) {
                        const double w = t.e(a, c) * t.e(b, e);
                        if (w != 0.0) {
                            out.activate(a, b);
                            out.at(a, b) += t.rate * w * sand;
                        }
                    }
                // left: (E^T E)_{a c} K rho_{c e} lands in block (a, e)
                for (int a = 0; a < ne; ++a)
                    if (ete(a, c) != 0.0) {
                        out.activate(a, e);
                        out.at(a, e) -= 0.5 * t.rate * ete(a, c) * kr;
                    }
                // right: rho_{c e} K (E^T E)_{e b} lands in block (c, b)
                for (int b = 0; b < ne; ++b)
                    if (ete(e, b) != 0.0) {
                        out.activate(c, b);
                        out.at(c, b) -= 0.5 * t.rate * ete(e, b) * rk;
                    }
            }
    }
}

SplitStepper::SplitStepper(const Generator& g, double dt, bool no_jump)
    : g_(g), dt_(dt), half_(g.position_propagator(0.5 * dt, no_jump)) {
    if (!(dt > 0.0)) throw std::invalid_argument("SplitStepper: dt must be positive");
    if (!g.splittable()) throw std::invalid_argument("split integrator needs X-diagonal or ladder jump factors (use exp_mode=eigen or integrator=rk4)");
    const int d = g.dim();
    phase_half_.resize(d, d);
    const RVec& e = g.energies();
    for (int j = 0; j < d; ++j)
        for (int m = 0; m < d; ++m) phase_half_(j, m) = std::polar(1.0, -(e[j] - e[m]) * 0.5 * dt);
}

void SplitStepper::ladder_step(CMat& rho) {
    rho.array() *= phase_half_.array();
    if (!g_.ladder_terms().empty()) {
        const double h = dt_;
        g_.apply_ladder(rho, k1_, false);
        stage_ = rho + 0.5 * h * k1_;
        g_.apply_ladder(stage_, k2_, false);
        stage_ = rho + 0.5 * h * k2_;
        g_.apply_ladder(stage_, k3_, false);
        stage_ = rho + h * k3_;
        g_.apply_ladder(stage_, k4_, false);
        rho += (h / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
    }
    rho.array() *= phase_half_.array();
}

double SplitStepper::step(BlockState& rho_x) {
    if (rho_x.frame != Frame::position) throw std::invalid_argument("SplitStepper: state must be in the position frame");
    half_.apply(g_.table(), rho_x, tmp_x_);
    g_.to_energy(tmp_x_, tmp_e_);
    for (std::size_t i = 0; i < tmp_e_.blocks.size(); ++i)
        if (tmp_e_.active[i]) ladder_step(tmp_e_.blocks[i]);
    g_.to_position(tmp_e_, tmp_x_);
    half_.apply(g_.table(), tmp_x_, rho_x);
    return rho_x.trace();
}

}  // namespace qshuttle

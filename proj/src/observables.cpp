#include "qshuttle/observables.hpp"

#include "qshuttle/analysis.hpp"

namespace qshuttle {

CMat adjoint_dissipator(const CMat& o, const CMat& a) {
    const CMat od = o.adjoint();
    const CMat k = od * o;
    return od * a * o - 0.5 * (k * a + a * k);
}

ObservableSet::ObservableSet(const Generator& g) : g_(g) {
    const OperatorSet& ops = g.ops();
    const int d = ops.basis.dim, ne = ops.ne;
    const EngineParams& p = ops.params;
    const CMat id = CMat::Identity(d, d);
    trace_ = g.observable(id);
    x_ = g.observable(ops.x.matrix);
    const CMat vel = ops.p.matrix / p.mass;
    v_ = g.observable(vel);
    nph_ = g.observable(ops.number_osc.matrix);
    if (ne == 1) {
        ne_ = g.observable(CMat(p.n_e * id));
    } else {
        ne_ = g.observable(std::vector<CMat>{CMat(), id});
    }
    energy_ = g.observable(ops.h_osc.matrix);
    force_e_ = force_operator(ops).matrix;
    force_v_e_ = 0.5 * (force_e_ * vel + vel * force_e_);
    p0_ = force_v_e_(0, 0).real();
    force_ = g.observable(force_e_);
    force_v_ = g.observable(force_v_e_);

    std::vector<CMat> meas_a(ne), meas_ha(ne);
    for (const JumpTerm& jt : ops.jumps) {
        const CMat dh = adjoint_dissipator(jt.osc.matrix, ops.h_osc.matrix);
        std::vector<CMat> lv(ne);
        for (int a = 0; a < ne; ++a) {
            const double w = OperatorSet::electron_weight(jt.electron, a, ne);
            if (w != 0.0 && jt.rate != 0.0) lv[a] = jt.rate * w * dh;
        }
        flux_.push_back(g.observable(lv));
        if (!is_tunnelling(jt.channel)) continue;
        const CMat k = jt.osc.matrix.adjoint() * jt.osc.matrix;
        if (jt.channel == Channel::source_in || jt.channel == Channel::source_out) {
            if (!has_src_) exp_src_ = g.observable(k);
            has_src_ = true;
        } else {
            if (!has_drn_) exp_drn_ = g.observable(k);
            has_drn_ = true;
        }
        for (int a = 0; a < ne; ++a) {
            const double w = OperatorSet::electron_weight(jt.electron, a, ne);
            if (w == 0.0 || jt.rate == 0.0) continue;
            const CMat add = 0.5 * jt.rate * w * k;
            if (meas_a[a].size() == 0) meas_a[a] = CMat::Zero(d, d);
            meas_a[a] += add;
            has_meas_ = true;
        }
    }
    for (int a = 0; a < ne; ++a)
        if (meas_a[a].size() != 0) meas_ha[a] = ops.h_osc.matrix * meas_a[a] + meas_a[a] * ops.h_osc.matrix;
    meas_a_ = g.observable(meas_a);
    meas_ha_ = g.observable(meas_ha);
}

double ObservableSet::measurement_rate(const BlockState& rho) const {
    if (!has_meas_) return 0.0;
    // -1/2 sum_k r_k Tr[H (K rho + rho K - 2 Tr[K rho] rho)] with A = sum_k r_k K / 2
    return -g_.expect(meas_ha_, rho) + 2.0 * g_.expect(meas_a_, rho) * g_.expect(energy_, rho);
}

void ObservableSet::measure(const BlockState& rho, Sample& s) const {
    const OperatorSet& ops = g_.ops();
    const EngineParams& p = ops.params;
    s.trace = g_.expect(trace_, rho);
    s.x = g_.expect(x_, rho);
    s.v = g_.expect(v_, rho);
    s.n_phonon = g_.expect(nph_, rho);
    s.n_electron = g_.expect(ne_, rho);
    s.force = g_.expect(force_, rho);
    s.force_v = g_.expect(force_v_, rho);
    s.hermiticity = rho.hermiticity_error();
    s.q_dot_hot = s.q_dot_cold = s.e_dot_control = 0.0;
    for (std::size_t j = 0; j < ops.jumps.size(); ++j) {
        const double f = g_.expect(flux_[j], rho);
        switch (ops.jumps[j].channel) {
            case Channel::noise: s.q_dot_hot += f; break;
            case Channel::damping:
            case Channel::thermal: s.q_dot_cold -= f; break;
            default: s.e_dot_control += f; break;
        }
    }
    s.e_dot_meas = measurement_rate(rho);

    const double w = p.omega;
    const double n = s.n_electron;
    if (p.model == ModelKind::fixed_charge) {
        s.q_hot_mean_field = s.q_hot_closed = 0.5 * w * p.gamma * p.n_e * p.n_e * s.trace;
    } else {
        s.q_hot_mean_field = 0.5 * w * p.gamma * n * n;
        s.q_hot_closed = 0.5 * w * p.gamma * n;
    }
    s.q_cold_closed = 2.0 * w * p.kappa * (s.n_phonon - p.nbar_p * s.trace);
    s.e_ctrl_closed = 0.0;
    const double eta2 = p.eta * p.eta;
    if (has_src_) {
        const double as2 = p.alpha_s() * p.alpha_s();
        s.e_ctrl_closed += 0.5 * w * p.Gamma_s * as2 * eta2 * (p.f_s * (1.0 - n) + (1.0 - p.f_s) * n) * g_.expect(exp_src_, rho);
    }
    if (has_drn_) {
        const double ad2 = p.alpha_d() * p.alpha_d();
        s.e_ctrl_closed += 0.5 * w * p.Gamma_d * ad2 * eta2 * (p.f_d * (1.0 - n) + (1.0 - p.f_d) * n) * g_.expect(exp_drn_, rho);
    }
}

}  // namespace qshuttle

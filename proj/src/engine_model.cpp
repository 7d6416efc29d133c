#include "qshuttle/engine_model.hpp"

#include <cmath>

namespace qshuttle {

std::string to_string(ModelKind m) {
    switch (m) {
        case ModelKind::full: return "full";
        case ModelKind::reduced: return "reduced";
        case ModelKind::fixed_charge: return "fixed_charge";
    }
    return "?";
}

ModelKind parse_model(const std::string& s) {
    if (s == "full") return ModelKind::full;
    if (s == "reduced") return ModelKind::reduced;
    if (s == "fixed_charge") return ModelKind::fixed_charge;
    throw ParamError("model", "expected full, reduced or fixed_charge, got '" + s + "'");
}

std::string to_string(Channel c) {
    switch (c) {
        case Channel::noise: return "noise";
        case Channel::damping: return "damping";
        case Channel::thermal: return "thermal";
        case Channel::source_in: return "source_in";
        case Channel::source_out: return "source_out";
        case Channel::drain_in: return "drain_in";
        case Channel::drain_out: return "drain_out";
    }
    return "?";
}

bool is_tunnelling(Channel c) {
    return c == Channel::source_in || c == Channel::source_out || c == Channel::drain_in || c == Channel::drain_out;
}

double EngineParams::alpha_s() const { return A * std::exp(eta * x0); }
double EngineParams::alpha_d() const { return A * std::exp(-eta * x0); }

void validate(const EngineParams& p) {
    auto finite = [](const char* f, double v) {
        if (!std::isfinite(v)) throw ParamError(f, "must be finite");
    };
    auto nonneg = [&](const char* f, double v) {
        finite(f, v);
        if (v < 0.0) throw ParamError(f, "must be non-negative");
    };
    auto positive = [&](const char* f, double v) {
        finite(f, v);
        if (!(v > 0.0)) throw ParamError(f, "must be positive");
    };
    auto unit = [&](const char* f, double v) {
        finite(f, v);
        if (v < 0.0 || v > 1.0) throw ParamError(f, "must lie in [0, 1]");
    };
    positive("omega", p.omega);
    positive("mass", p.mass);
    nonneg("gamma", p.gamma);
    nonneg("kappa", p.kappa);
    nonneg("Gamma_s", p.Gamma_s);
    nonneg("Gamma_d", p.Gamma_d);
    finite("eta", p.eta);
    finite("x0", p.x0);
    nonneg("A", p.A);
    unit("f_s", p.f_s);
    unit("f_d", p.f_d);
    nonneg("nbar_p", p.nbar_p);
    nonneg("n_e", p.n_e);
    if (p.dim < 2) throw ParamError("dim", "must be at least 2");
    if (p.model == ModelKind::reduced) {
        if (p.f_d != 0.0) throw ParamError("f_d", "reduced model requires f_d = 0");
        if (p.nbar_p != 0.0) throw ParamError("nbar_p", "reduced model requires nbar_p = 0");
    }
}

double fermi(double energy, double mu, double temperature) {
    if (temperature < 0.0 || std::isnan(temperature)) throw ParamError("temperature", "must be non-negative");
    const double de = energy - mu;
    if (temperature == 0.0) {
        if (de < 0.0) return 1.0;
        if (de > 0.0) return 0.0;
        return 0.5;
    }
    const double z = de / temperature;
    if (z > 0.0) {
        const double e = std::exp(-z);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(z));
}

Eigen::Matrix2cd electron_matrix(ElectronOp e) {
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
    switch (e) {
        case ElectronOp::identity: m.setIdentity(); break;
        case ElectronOp::lower: m(0, 1) = 1.0; break;
        case ElectronOp::raise: m(1, 0) = 1.0; break;
        case ElectronOp::number: m(1, 1) = 1.0; break;
    }
    return m;
}

Operator compose(const Operator& osc, const Eigen::Matrix2cd& electron) {
    if (osc.space != Space::oscillator || osc.matrix.rows() != osc.matrix.cols())
        throw std::invalid_argument("compose: expected a square oscillator-space operator");
    const Eigen::Index d = osc.matrix.rows();
    Operator out;
    out.space = Space::composite;
    out.matrix = CMat::Zero(2 * d, 2 * d);
    for (int e = 0; e < 2; ++e)
        for (int f = 0; f < 2; ++f)
            if (electron(e, f) != cplx(0.0)) out.matrix.block(e * d, f * d, d, d) = electron(e, f) * osc.matrix;
    return out;
}

double OperatorSet::electron_weight(ElectronOp e, int a, int ne) {
    if (ne == 1) return 1.0;
    switch (e) {
        case ElectronOp::identity: return 1.0;
        case ElectronOp::lower: return a == 1 ? 1.0 : 0.0;   // c^dag c
        case ElectronOp::raise: return a == 0 ? 1.0 : 0.0;   // c c^dag
        case ElectronOp::number: return a == 1 ? 1.0 : 0.0;
    }
    return 0.0;
}

OperatorSet build_operator_set(const EngineParams& params) {
    validate(params);
    OperatorSet s;
    s.params = params;
    s.basis = Basis(params.dim);
    const Basis& b = s.basis;
    s.ne = params.model == ModelKind::fixed_charge ? 1 : 2;

    s.h_osc = build_hamiltonian(b, params.omega);
    s.x = build_position(b);
    s.p = build_momentum(b);
    auto [a, ad] = build_ladder(b);
    s.a = a;
    s.a_dag = ad;
    s.number_osc = build_number(b);
    s.xeig = position_eigen(s.x);

    auto lift = [&](const Operator& o, ElectronOp e) {
        if (s.ne == 1) return o;
        return compose(o, electron_matrix(e));
    };
    s.h = lift(s.h_osc, ElectronOp::identity);
    s.x_full = lift(s.x, ElectronOp::identity);
    s.p_full = lift(s.p, ElectronOp::identity);
    s.n_phonon_full = lift(s.number_osc, ElectronOp::identity);
    if (s.ne == 1) {
        s.number_e.matrix = params.n_e * CMat::Identity(b.dim, b.dim);
    } else {
        Operator id;
        id.matrix = CMat::Identity(b.dim, b.dim);
        s.number_e = compose(id, electron_matrix(ElectronOp::number));
    }

    const RVec& xi = s.xeig.xi;
    auto term = [&](Channel ch, double rate, ElectronOp e, const Operator& osc, std::optional<RVec> profile) {
        JumpTerm t;
        t.label = to_string(ch);
        t.channel = ch;
        t.rate = rate;
        t.electron = e;
        t.osc = osc;
        t.x_profile = std::move(profile);
        t.op = lift(osc, e);
        s.jumps.push_back(std::move(t));
    };
    auto exp_term = [&](double sgn) -> std::pair<Operator, std::optional<RVec>> {
        Operator o = build_exp_position(b, sgn * params.eta, params.exp_mode);
        if (params.exp_mode == ExpMode::eigen) return {o, RVec((sgn * params.eta * xi).array().exp())};
        return {o, std::nullopt};
    };

    const double k = params.kappa, nb = params.nbar_p;
    if (params.model == ModelKind::fixed_charge) {
        term(Channel::noise, params.gamma * params.n_e * params.n_e, ElectronOp::identity, s.x, xi);
        term(Channel::damping, k * (nb + 1.0), ElectronOp::identity, s.a, std::nullopt);
        if (nb > 0.0) term(Channel::thermal, k * nb, ElectronOp::identity, s.a_dag, std::nullopt);
        return s;
    }

    const double as2 = params.alpha_s() * params.alpha_s();
    const double ad2 = params.alpha_d() * params.alpha_d();
    auto [em, em_prof] = exp_term(-1.0);
    auto [ep, ep_prof] = exp_term(+1.0);
    term(Channel::noise, params.gamma, ElectronOp::number, s.x, xi);
    term(Channel::damping, k * (nb + 1.0), ElectronOp::identity, s.a, std::nullopt);
    term(Channel::source_in, params.Gamma_s * params.f_s * as2, ElectronOp::raise, em, em_prof);
    term(Channel::source_out, params.Gamma_s * (1.0 - params.f_s) * as2, ElectronOp::lower, em, em_prof);
    term(Channel::drain_out, params.Gamma_d * (1.0 - params.f_d) * ad2, ElectronOp::lower, ep, ep_prof);
    if (params.model == ModelKind::full) {
        term(Channel::drain_in, params.Gamma_d * params.f_d * ad2, ElectronOp::raise, ep, ep_prof);
        term(Channel::thermal, k * nb, ElectronOp::identity, s.a_dag, std::nullopt);
    }
    return s;
}

}  // namespace qshuttle

#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "qshuttle/engine_model.hpp"
#include "qshuttle/master_equation.hpp"

using namespace qshuttle;

TEST_CASE("fermi occupation") {
    CHECK(fermi(0.3, 0.3, 0.7) == 0.5);
    CHECK(fermi(0.3, 0.3, 0.0) == 0.5);
    CHECK(fermi(0.31, 0.3, 0.0) == 0.0);
    CHECK(fermi(0.29, 0.3, 0.0) == 1.0);
    const long double oracle = 1.0L / (std::exp(1.0L) + 1.0L);
    CHECK(fermi(1.0, 0.0, 1.0) == doctest::Approx(static_cast<double>(oracle)).epsilon(1e-15));
    CHECK(fermi(1.0, 0.0, 1.0) == doctest::Approx(0.26894).epsilon(1e-5));
    CHECK(fermi(1000.0, 0.0, 1.0) == doctest::Approx(0.0));
    CHECK(fermi(-1000.0, 0.0, 1.0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(fermi(0.0, 0.0, -1.0), ParamError);
}

TEST_CASE("compose uses electron-outer indexing") {
    const int d = 5;
    Operator id;
    id.matrix = CMat::Identity(d, d);
    const Operator n = compose(id, electron_matrix(ElectronOp::number));
    CHECK(n.matrix.trace().real() == doctest::Approx(d));
    CHECK(n.matrix(d, d).real() == 1.0);  // electron 1, level 0
    CHECK(n.matrix(0, 0).real() == 0.0);
    CHECK(n.space == Space::composite);
    const Basis b(d);
    const Operator x = compose(build_position(b), electron_matrix(ElectronOp::identity));
    CHECK(qtest::max_abs(x.matrix * n.matrix - n.matrix * x.matrix) < 1e-15);
    const Operator a = build_ladder(b).first;
    const Operator ac = compose(a, electron_matrix(ElectronOp::lower));
    const CMat prod = compose(a, electron_matrix(ElectronOp::identity)).matrix *
                      compose(id, electron_matrix(ElectronOp::lower)).matrix;
    CHECK(qtest::max_abs(ac.matrix - prod) == 0.0);
    // c = |0><1|
    const auto c = electron_matrix(ElectronOp::lower);
    CHECK(c(0, 1) == cplx(1));
    CHECK(c(1, 0) == cplx(0));
    Operator bad;
    bad.matrix = CMat::Identity(3, 3);
    bad.space = Space::composite;
    CHECK_THROWS(compose(bad, c));
}

TEST_CASE("parameter validation") {
    EngineParams p;
    CHECK_NOTHROW(validate(p));
    p.gamma = -1;
    try {
        validate(p);
        FAIL("expected ParamError");
    } catch (const ParamError& e) {
        CHECK(e.field == "gamma");
    }
    p = EngineParams{};
    p.f_d = 0.1;
    CHECK_THROWS_AS(validate(p), ParamError);
    p.model = ModelKind::full;
    CHECK_NOTHROW(validate(p));
    p.f_s = 1.5;
    CHECK_THROWS_AS(validate(p), ParamError);
    p = EngineParams{};
    p.dim = 1;
    CHECK_THROWS_AS(validate(p), ParamError);
    CHECK(parse_model("fixed_charge") == ModelKind::fixed_charge);
    CHECK_THROWS(parse_model("bogus"));
}

TEST_CASE("tunnelling amplitudes") {
    for (double x0 : {-1.0, 0.0, 0.3, 2.0}) {
        EngineParams p;
        p.x0 = x0;
        p.A = 1.7;
        CHECK(p.alpha_s() * p.alpha_d() == doctest::Approx(1.7 * 1.7));
        CHECK(p.alpha_s() == doctest::Approx(1.7 * std::exp(p.eta * x0)));
    }
}

TEST_CASE("jump lists") {
    EngineParams p;
    p.dim = 8;
    const OperatorSet r = build_operator_set(p);
    REQUIRE(r.jumps.size() == 5);
    CHECK(r.ne == 2);
    CHECK(r.full_dim() == 16);
    const double as2 = p.alpha_s() * p.alpha_s(), ad2 = p.alpha_d() * p.alpha_d();
    CHECK(r.jumps[0].channel == Channel::noise);
    CHECK(r.jumps[0].rate == p.gamma);
    CHECK(r.jumps[1].channel == Channel::damping);
    CHECK(r.jumps[1].rate == p.kappa);
    CHECK(r.jumps[2].channel == Channel::source_in);
    CHECK(r.jumps[2].rate == doctest::Approx(p.Gamma_s * p.f_s * as2));
    CHECK(r.jumps[3].channel == Channel::source_out);
    CHECK(r.jumps[3].rate == doctest::Approx(p.Gamma_s * (1 - p.f_s) * as2));
    CHECK(r.jumps[4].channel == Channel::drain_out);
    CHECK(r.jumps[4].rate == doctest::Approx(p.Gamma_d * ad2));
    for (const auto& j : r.jumps) {
        CHECK(j.rate >= 0.0);
        CHECK(j.op.matrix.rows() == 16);
        CHECK(j.label == to_string(j.channel));
    }
    // noise operator c^dag c x is Hermitian
    CHECK(hermiticity_error(r.jumps[0].op.matrix) < 1e-14);

    p.model = ModelKind::full;
    p.f_d = 0.2;
    p.nbar_p = 0.3;
    const OperatorSet f = build_operator_set(p);
    REQUIRE(f.jumps.size() == 7);
    CHECK(f.jumps[1].rate == doctest::Approx(p.kappa * 1.3));
    CHECK(f.jumps[5].channel == Channel::drain_in);
    CHECK(f.jumps[5].rate == doctest::Approx(p.Gamma_d * 0.2 * ad2));
    CHECK(f.jumps[6].channel == Channel::thermal);
    CHECK(f.jumps[6].rate == doctest::Approx(p.kappa * 0.3));

    EngineParams q;
    q.dim = 8;
    q.model = ModelKind::fixed_charge;
    q.n_e = 0;
    const OperatorSet z = build_operator_set(q);
    CHECK(z.ne == 1);
    REQUIRE(z.jumps.size() == 2);
    CHECK(z.jumps[0].rate == 0.0);
    CHECK(z.jumps[1].rate == q.kappa);
}

TEST_CASE("eta = 0 removes the position dependence of tunnelling") {
    EngineParams p;
    p.dim = 8;
    p.eta = 0.0;
    const OperatorSet s = build_operator_set(p);
    for (int k = 2; k < 5; ++k) CHECK(qtest::max_abs(s.jumps[k].osc.matrix - CMat::Identity(8, 8)) < 1e-13);
}

TEST_CASE("reduced model without tunnelling reproduces the charged oscillator") {
    EngineParams p;
    p.dim = 16;
    p.Gamma_s = 0.0;
    p.Gamma_d = 0.0;
    p.gamma = 0.4;
    const OperatorSet r = build_operator_set(p);
    EngineParams q = p;
    q.model = ModelKind::fixed_charge;
    q.n_e = 1.0;
    const OperatorSet f = build_operator_set(q);
    EvolveOptions o;
    o.t_max = 10.0;
    o.record_stride = 100;
    const auto er = evolve(r, initial_state(r, InitialState::ground_occupied), o);
    const auto ef = evolve(f, initial_state(f, InitialState::ground_empty), o);
    REQUIRE(er.samples.size() == ef.samples.size());
    for (std::size_t i = 0; i < er.samples.size(); ++i) {
        CHECK(std::abs(er.samples[i].n_phonon - ef.samples[i].n_phonon) < 1e-8);
        CHECK(er.samples[i].n_electron == doctest::Approx(1.0));
    }
    CHECK(er.samples.back().n_phonon > 0.1);
}

#include <doctest.h>

#include "helpers.hpp"
#include "qshuttle/generator.hpp"
#include "qshuttle/master_equation.hpp"

using namespace qshuttle;

namespace {

OperatorSet model(ModelKind k, int dim) {
    EngineParams p;
    p.dim = dim;
    p.model = k;
    if (k == ModelKind::full) {
        p.f_d = 0.15;
        p.nbar_p = 0.25;
        p.f_s = 0.8;
    }
    p.gamma = 0.7;
    return build_operator_set(p);
}

}  // namespace

TEST_CASE("block state round trip") {
    const CMat rho = qtest::random_state(14, 1);
    const BlockState b = BlockState::from_dense(rho, 2, Frame::energy);
    CHECK(qtest::max_abs(b.to_dense() - rho) == 0.0);
    CHECK(b.trace() == doctest::Approx(1.0));
    CHECK(b.min_eigenvalue() == doctest::Approx(min_eigenvalue(rho)).epsilon(1e-10));
    // a sector-diagonal state leaves the coherence blocks inactive
    CMat sec = rho;
    sec.topRightCorner(7, 7).setZero();
    sec.bottomLeftCorner(7, 7).setZero();
    const BlockState s = BlockState::from_dense(sec, 2, Frame::energy);
    CHECK(!s.is_active(0, 1));
    CHECK(s.is_active(1, 1));
}

TEST_CASE("fast generator matches the dense Lindblad sum") {
    for (ModelKind k : {ModelKind::fixed_charge, ModelKind::reduced, ModelKind::full}) {
        const OperatorSet ops = model(k, 12);
        for (const kernels::Table* t : {&kernels::scalar(), kernels::avx2()}) {
            if (!t || (t == kernels::avx2() && !kernels::cpu_has_avx2())) continue;
            const Generator g(ops, *t);
            const CMat rho = qtest::random_state(ops.full_dim(), 7);
            const CMat ref = lindblad_apply(ops, rho);
            BlockState out;
            g.apply_energy(BlockState::from_dense(rho, ops.ne, Frame::energy), out);
            CHECK(qtest::max_abs(out.to_dense() - ref) < 1e-13);

            // position-frame generator + energy-frame ladder terms are the same map
            BlockState rx, lx, le;
            g.to_position(BlockState::from_dense(rho, ops.ne, Frame::energy), rx);
            const ElementwiseMap m = g.position_generator(false);
            m.apply(*t, rx, lx);
            g.to_energy(lx, le);
            CMat sum = le.to_dense();
            const int d = ops.basis.dim;
            for (int a = 0; a < ops.ne; ++a)
                for (int b = 0; b < ops.ne; ++b) {
                    CMat blk = rho.block(a * d, b * d, d, d), o;
                    g.apply_ladder(blk, o, true);
                    sum.block(a * d, b * d, d, d) += o;
                }
            CHECK(qtest::max_abs(sum - ref) < 1e-12);

            CHECK(g.energy_rate(rx) == doctest::Approx((ops.h.matrix * ref).trace().real()).epsilon(1e-11));
        }
    }
}

TEST_CASE("frame transforms are inverse") {
    const OperatorSet ops = model(ModelKind::reduced, 10);
    const Generator g(ops);
    const BlockState e = BlockState::from_dense(qtest::random_state(20, 2), 2, Frame::energy);
    BlockState x, back;
    g.to_position(e, x);
    CHECK(x.frame == Frame::position);
    g.to_energy(x, back);
    CHECK(qtest::max_abs(back.to_dense() - e.to_dense()) < 1e-13);
    CHECK(x.trace() == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("position propagators compose") {
    const OperatorSet ops = model(ModelKind::reduced, 8);
    const Generator g(ops);
    BlockState x, y1, y2, z;
    g.to_position(BlockState::from_dense(qtest::random_state(16, 3), 2, Frame::energy), x);
    g.position_propagator(0.3, false).apply(g.table(), x, y1);
    g.position_propagator(0.1, false).apply(g.table(), x, z);
    g.position_propagator(0.2, false).apply(g.table(), z, y2);
    CHECK(qtest::max_abs(y1.to_dense() - y2.to_dense()) < 1e-13);
    // trace preserving without the no-jump truncation
    CHECK(y1.trace() == doctest::Approx(1.0).epsilon(1e-13));
    BlockState nj;
    g.position_propagator(0.3, true).apply(g.table(), x, nj);
    CHECK(nj.trace() < 1.0);
}

TEST_CASE("split stepping tracks RK4 of the dense generator") {
    for (ModelKind k : {ModelKind::fixed_charge, ModelKind::reduced, ModelKind::full}) {
        const OperatorSet ops = model(k, 12);
        EvolveOptions o;
        o.t_max = 1.6 * 3.141592653589793;
        o.record_stride = 20;
        o.integrator = Integrator::rk4;
        const auto ref = evolve(ops, initial_state(ops, InitialState::ground_empty), o);
        o.integrator = Integrator::split;
        const auto sp = evolve(ops, initial_state(ops, InitialState::ground_empty), o);
        o.dt /= 2;
        o.record_stride *= 2;
        const auto sp2 = evolve(ops, initial_state(ops, InitialState::ground_empty), o);
        REQUIRE(ref.samples.size() == sp.samples.size());
        REQUIRE(sp2.samples.size() == sp.samples.size());
        double e1 = 0, e2 = 0;
        for (std::size_t i = 0; i < ref.samples.size(); ++i) {
            e1 = std::max(e1, std::abs(sp.samples[i].n_phonon - ref.samples[i].n_phonon));
            e2 = std::max(e2, std::abs(sp2.samples[i].n_phonon - ref.samples[i].n_phonon));
        }
        CHECK(e1 < 1e-4);
        // second order: halving dt cuts the error about four times
        if (e1 > 1e-10) CHECK(e2 < 0.4 * e1);
    }
}

TEST_CASE("scalar and avx2 split steps agree") {
    if (!kernels::avx2() || !kernels::cpu_has_avx2()) return;
    const OperatorSet ops = model(ModelKind::full, 16);
    const Generator gs(ops, kernels::scalar()), ga(ops, *kernels::avx2());
    BlockState xs, xa;
    gs.to_position(BlockState::from_dense(qtest::random_state(32, 4), 2, Frame::energy), xs);
    xa = xs;
    SplitStepper ss(gs, 0.01, false), sa(ga, 0.01, false);
    for (int i = 0; i < 50; ++i) {
        ss.step(xs);
        sa.step(xa);
    }
    CHECK(qtest::max_abs(xs.to_dense() - xa.to_dense()) < 1e-12);
}

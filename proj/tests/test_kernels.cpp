#include <doctest.h>

#include <random>
#include <vector>

#include "helpers.hpp"
#include "qshuttle/kernels.hpp"
#include "qshuttle/linalg.hpp"

using namespace qshuttle;

namespace {

std::vector<double> randv(std::size_t n, unsigned seed) {
    std::mt19937_64 g(seed);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<double> v(n);
    for (auto& x : v) x = u(g);
    return v;
}

void check_tables(const kernels::Table& ref, const kernels::Table& t) {
    for (std::size_t n : {1u, 3u, 4u, 5u, 8u, 13u, 40u})
        for (std::size_t m : {1u, 7u, 8u, 9u, 24u, 80u})
            for (std::size_t k : {1u, 2u, 17u, 40u}) {
                const auto a = randv(n * k, 1), b = randv(k * m, 2);
                auto c1 = randv(n * m, 3), c2 = c1;
                ref.dgemm(n, m, k, 0.7, a.data(), k, b.data(), m, 0.3, c1.data(), m);
                t.dgemm(n, m, k, 0.7, a.data(), k, b.data(), m, 0.3, c2.data(), m);
                for (std::size_t i = 0; i < c1.size(); ++i) REQUIRE(c2[i] == doctest::Approx(c1[i]).epsilon(1e-13));
                auto z1 = randv(n * m, 4), z2 = z1;
                ref.dgemm(n, m, k, 1.0, a.data(), k, b.data(), m, 0.0, z1.data(), m);
                t.dgemm(n, m, k, 1.0, a.data(), k, b.data(), m, 0.0, z2.data(), m);
                for (std::size_t i = 0; i < z1.size(); ++i) REQUIRE(z2[i] == doctest::Approx(z1[i]).epsilon(1e-13));
            }
    for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 33u, 1000u}) {
        const auto x = randv(n, 5), r = randv(n, 6), w = randv(2 * n, 7);
        auto y1 = randv(n, 8), y2 = y1;
        ref.axpy(n, -1.3, x.data(), y1.data());
        t.axpy(n, -1.3, x.data(), y2.data());
        for (std::size_t i = 0; i < n; ++i) CHECK(y2[i] == doctest::Approx(y1[i]).epsilon(1e-15));
        CHECK(t.dot(n, x.data(), y1.data()) == doctest::Approx(ref.dot(n, x.data(), y1.data())).epsilon(1e-13));
        for (bool acc : {false, true}) {
            auto z1 = randv(2 * n, 9), z2 = z1;
            ref.cscale_real(n, r.data(), w.data(), z1.data(), acc);
            t.cscale_real(n, r.data(), w.data(), z2.data(), acc);
            for (std::size_t i = 0; i < 2 * n; ++i) CHECK(z2[i] == doctest::Approx(z1[i]).epsilon(1e-15));
        }
    }
}

}  // namespace

TEST_CASE("scalar dgemm matches a naive triple loop") {
    const std::size_t n = 5, m = 6, k = 7;
    const auto a = randv(n * k, 11), b = randv(k * m, 12);
    std::vector<double> c(n * m, 0.0);
    kernels::scalar().dgemm(n, m, k, 1.0, a.data(), k, b.data(), m, 0.0, c.data(), m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            double s = 0;
            for (std::size_t l = 0; l < k; ++l) s += a[i * k + l] * b[l * m + j];
            CHECK(c[i * m + j] == doctest::Approx(s).epsilon(1e-14));
        }
}

TEST_CASE("avx2 table is equivalent to the scalar reference") {
    const kernels::Table* t = kernels::avx2();
    if (!t || !kernels::cpu_has_avx2()) {
        MESSAGE("AVX2 not available on this machine; equivalence not exercised");
        return;
    }
    check_tables(kernels::scalar(), *t);
}

TEST_CASE("real congruence agrees with Eigen for both tables") {
    const int n = 23;
    RMat a = RMat::Random(n, n);
    const CMat b = qtest::random_state(n, 3);
    const CMat ref = a.cast<cplx>() * b * a.transpose().cast<cplx>();
    CMat out, scratch;
    real_congruence(kernels::scalar(), a, b, out, scratch);
    CHECK(qtest::max_abs(out - ref) < 1e-13);
    if (kernels::avx2() && kernels::cpu_has_avx2()) {
        real_congruence(*kernels::avx2(), a, b, out, scratch);
        CHECK(qtest::max_abs(out - ref) < 1e-13);
    }
    CMat rc;
    real_times_complex(kernels::active(), a, b, rc);
    CHECK(qtest::max_abs(rc - a.cast<cplx>() * b) < 1e-13);
}

TEST_CASE("hermitian expectation is Re Tr[q rho]") {
    const CMat q = qtest::random_state(9, 4), rho = qtest::random_state(9, 5);
    CHECK(expect_hermitian(kernels::active(), q, rho) == doctest::Approx((q * rho).trace().real()).epsilon(1e-13));
}

#include "qshuttle/kernels.hpp"

#if defined(QSHUTTLE_HAVE_AVX2)

#include <immintrin.h>

namespace qshuttle::kernels {
namespace {

// 4 x 8 register block of C accumulated over the full k extent.
inline void block_4x8(std::size_t k, double alpha, const double* a, std::size_t lda,
                      const double* b, std::size_t ldb, double beta, double* c, std::size_t ldc) {
    __m256d c00 = _mm256_setzero_pd(), c01 = _mm256_setzero_pd();
    __m256d c10 = _mm256_setzero_pd(), c11 = _mm256_setzero_pd();
    __m256d c20 = _mm256_setzero_pd(), c21 = _mm256_setzero_pd();
    __m256d c30 = _mm256_setzero_pd(), c31 = _mm256_setzero_pd();
    const double* a0 = a;
    const double* a1 = a + lda;
    const double* a2 = a + 2 * lda;
    const double* a3 = a + 3 * lda;
    for (std::size_t p = 0; p < k; ++p) {
        const double* bp = b + p * ldb;
        const __m256d b0 = _mm256_loadu_pd(bp);
        const __m256d b1 = _mm256_loadu_pd(bp + 4);
        __m256d av = _mm256_broadcast_sd(a0 + p);
        c00 = _mm256_fmadd_pd(av, b0, c00);
        c01 = _mm256_fmadd_pd(av, b1, c01);
        av = _mm256_broadcast_sd(a1 + p);
        c10 = _mm256_fmadd_pd(av, b0, c10);
        c11 = _mm256_fmadd_pd(av, b1, c11);
        av = _mm256_broadcast_sd(a2 + p);
        c20 = _mm256_fmadd_pd(av, b0, c20);
        c21 = _mm256_fmadd_pd(av, b1, c21);
        av = _mm256_broadcast_sd(a3 + p);
        c30 = _mm256_fmadd_pd(av, b0, c30);
        c31 = _mm256_fmadd_pd(av, b1, c31);
    }
    const __m256d al = _mm256_set1_pd(alpha);
    auto store = [&](double* row, __m256d lo, __m256d hi) {
        lo = _mm256_mul_pd(al, lo);
        hi = _mm256_mul_pd(al, hi);
        if (beta != 0.0) {
            const __m256d be = _mm256_set1_pd(beta);
            lo = _mm256_fmadd_pd(be, _mm256_loadu_pd(row), lo);
            hi = _mm256_fmadd_pd(be, _mm256_loadu_pd(row + 4), hi);
        }
        _mm256_storeu_pd(row, lo);
        _mm256_storeu_pd(row + 4, hi);
    };
    store(c, c00, c01);
    store(c + ldc, c10, c11);
    store(c + 2 * ldc, c20, c21);
    store(c + 3 * ldc, c30, c31);
}

inline void block_1x4(std::size_t k, double alpha, const double* a, const double* b, std::size_t ldb,
                      double beta, double* c) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t p = 0; p < k; ++p)
        acc = _mm256_fmadd_pd(_mm256_broadcast_sd(a + p), _mm256_loadu_pd(b + p * ldb), acc);
    acc = _mm256_mul_pd(_mm256_set1_pd(alpha), acc);
    if (beta != 0.0) acc = _mm256_fmadd_pd(_mm256_set1_pd(beta), _mm256_loadu_pd(c), acc);
    _mm256_storeu_pd(c, acc);
}

inline void block_1x1(std::size_t k, double alpha, const double* a, const double* b, std::size_t ldb,
                      double beta, double* c) {
    double acc = 0.0;
    for (std::size_t p = 0; p < k; ++p) acc += a[p] * b[p * ldb];
    *c = alpha * acc + (beta != 0.0 ? beta * *c : 0.0);
}

void dgemm_avx2(std::size_t n, std::size_t m, std::size_t k, double alpha,
                const double* a, std::size_t lda, const double* b, std::size_t ldb,
                double beta, double* c, std::size_t ldc) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        std::size_t j = 0;
        for (; j + 8 <= m; j += 8)
            block_4x8(k, alpha, a + i * lda, lda, b + j, ldb, beta, c + i * ldc + j, ldc);
        for (std::size_t r = 0; r < 4; ++r) {
            std::size_t jj = j;
            for (; jj + 4 <= m; jj += 4)
                block_1x4(k, alpha, a + (i + r) * lda, b + jj, ldb, beta, c + (i + r) * ldc + jj);
            for (; jj < m; ++jj)
                block_1x1(k, alpha, a + (i + r) * lda, b + jj, ldb, beta, c + (i + r) * ldc + jj);
        }
    }
    for (; i < n; ++i) {
        std::size_t j = 0;
        for (; j + 4 <= m; j += 4) block_1x4(k, alpha, a + i * lda, b + j, ldb, beta, c + i * ldc + j);
        for (; j < m; ++j) block_1x1(k, alpha, a + i * lda, b + j, ldb, beta, c + i * ldc + j);
    }
}

void axpy_avx2(std::size_t n, double alpha, const double* x, double* y) {
    const __m256d al = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(al, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] += alpha * x[i];
}

double dot_avx2(std::size_t n, const double* x, const double* y) {
    __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        s0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), s0);
        s1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), s1);
    }
    s0 = _mm256_add_pd(s0, s1);
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, s0);
    double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
    for (; i < n; ++i) s += x[i] * y[i];
    return s;
}

void cscale_real_avx2(std::size_t n, const double* r, const double* w, double* z, bool accumulate) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        // (r0, r0, r1, r1) against (re0, im0, re1, im1)
        const __m128d rr = _mm_loadu_pd(r + i);
        const __m256d rv = _mm256_permute4x64_pd(_mm256_castpd128_pd256(rr), 0x50);
        const __m256d wv = _mm256_loadu_pd(w + 2 * i);
        if (accumulate)
            _mm256_storeu_pd(z + 2 * i, _mm256_fmadd_pd(rv, wv, _mm256_loadu_pd(z + 2 * i)));
        else
            _mm256_storeu_pd(z + 2 * i, _mm256_mul_pd(rv, wv));
    }
    for (; i < n; ++i) {
        if (accumulate) {
            z[2 * i] += r[i] * w[2 * i];
            z[2 * i + 1] += r[i] * w[2 * i + 1];
        } else {
            z[2 * i] = r[i] * w[2 * i];
            z[2 * i + 1] = r[i] * w[2 * i + 1];
        }
    }
}

const Table kAvx2{"avx2", dgemm_avx2, axpy_avx2, dot_avx2, cscale_real_avx2};

}  // namespace

const Table* avx2() { return &kAvx2; }

}  // namespace qshuttle::kernels

#else

namespace qshuttle::kernels {
const Table* avx2() { return nullptr; }
}  // namespace qshuttle::kernels

#endif

#pragma once

#include <cstddef>

namespace qshuttle::kernels {

// Row-major dense kernels. Complex arrays are interleaved (re, im) pairs,
// so a d x d complex matrix is also a d x 2d real matrix.
struct Table {
    const char* name;

    // C = alpha * A(n x k) * B(k x m) + beta * C(n x m)
    void (*dgemm)(std::size_t n, std::size_t m, std::size_t k, double alpha,
                  const double* a, std::size_t lda, const double* b, std::size_t ldb,
                  double beta, double* c, std::size_t ldc);

    // y += alpha * x
    void (*axpy)(std::size_t n, double alpha, const double* x, double* y);

    double (*dot)(std::size_t n, const double* x, const double* y);

    // z[i] (+)= r[i] * w[i] for complex w, z and real r; n complex elements.
    void (*cscale_real)(std::size_t n, const double* r, const double* w, double* z, bool accumulate);
};

const Table& scalar();
// Null when the binary was built without the AVX2 translation unit.
const Table* avx2();

bool cpu_has_avx2();

// Chosen once: AVX2 when available unless QSHUTTLE_ISA=scalar is set in the environment.
const Table& active();

}  // namespace qshuttle::kernels

#include "qshuttle/kernels.hpp"

namespace qshuttle::kernels {
namespace {

void dgemm_scalar(std::size_t n, std::size_t m, std::size_t k, double alpha,
                  const double* a, std::size_t lda, const double* b, std::size_t ldb,
                  double beta, double* c, std::size_t ldc) {
    for (std::size_t i = 0; i < n; ++i) {
        double* ci = c + i * ldc;
        if (beta == 0.0) {
            for (std::size_t j = 0; j < m; ++j) ci[j] = 0.0;
        } else if (beta != 1.0) {
            for (std::size_t j = 0; j < m; ++j) ci[j] *= beta;
        }
        for (std::size_t p = 0; p < k; ++p) {
            const double s = alpha * a[i * lda + p];
            if (s == 0.0) continue;
            const double* bp = b + p * ldb;
            for (std::size_t j = 0; j < m; ++j) ci[j] += s * bp[j];
        }
    }
}

void axpy_scalar(std::size_t n, double alpha, const double* x, double* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double dot_scalar(std::size_t n, const double* x, const double* y) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
}

void cscale_real_scalar(std::size_t n, const double* r, const double* w, double* z, bool accumulate) {
    if (accumulate) {
        for (std::size_t i = 0; i < n; ++i) {
            z[2 * i] += r[i] * w[2 * i];
            z[2 * i + 1] += r[i] * w[2 * i + 1];
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            z[2 * i] = r[i] * w[2 * i];
            z[2 * i + 1] = r[i] * w[2 * i + 1];
        }
    }
}

const Table kScalar{"scalar", dgemm_scalar, axpy_scalar, dot_scalar, cscale_real_scalar};

}  // namespace

const Table& scalar() { return kScalar; }

}  // namespace qshuttle::kernels

#pragma once

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

#include "qshuttle/kernels.hpp"

namespace qshuttle {

using cplx = std::complex<double>;
using CMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RVec = Eigen::VectorXd;

inline const double* raw(const CMat& m) { return reinterpret_cast<const double*>(m.data()); }
inline double* raw(CMat& m) { return reinterpret_cast<double*>(m.data()); }

// out = a * b with real a (n x n) and complex b (n x n).
void real_times_complex(const kernels::Table& k, const RMat& a, const CMat& b, CMat& out);

// out = a * b * a^T for real a; scratch is resized as needed.
void real_congruence(const kernels::Table& k, const RMat& a, const CMat& b, CMat& out, CMat& scratch);

// Re Tr[q rho] for Hermitian rho.
inline double expect_hermitian(const kernels::Table& k, const CMat& q, const CMat& rho) {
    return k.dot(static_cast<std::size_t>(2 * q.size()), raw(q), raw(rho));
}

double max_abs(const CMat& m);
double hermiticity_error(const CMat& m);
double min_eigenvalue(const CMat& hermitian);

// Eigen-decomposition of a real symmetric matrix: m = v * diag(w) * v^T.
void eigh(const RMat& m, RVec& w, RMat& v);

}  // namespace qshuttle

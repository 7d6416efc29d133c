#include "qshuttle/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace qshuttle {

void real_times_complex(const kernels::Table& k, const RMat& a, const CMat& b, CMat& out) {
    const auto n = static_cast<std::size_t>(a.rows());
    const auto kk = static_cast<std::size_t>(a.cols());
    const auto m = static_cast<std::size_t>(b.cols());
    out.resize(a.rows(), b.cols());
    k.dgemm(n, 2 * m, kk, 1.0, a.data(), kk, raw(b), 2 * m, 0.0, raw(out), 2 * m);
}

void real_congruence(const kernels::Table& k, const RMat& a, const CMat& b, CMat& out, CMat& scratch) {
    // a b a^T = a (a b^H)^H
    out = b.adjoint();
    real_times_complex(k, a, out, scratch);
    out = scratch.adjoint();
    real_times_complex(k, a, out, scratch);
    out.swap(scratch);
}

double max_abs(const CMat& m) {
    double r = 0.0;
    for (Eigen::Index i = 0; i < m.size(); ++i) r = std::max(r, std::abs(m.data()[i]));
    return r;
}

double hermiticity_error(const CMat& m) {
    double r = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = i; j < m.cols(); ++j)
            r = std::max(r, std::abs(m(i, j) - std::conj(m(j, i))));
    return r;
}

double min_eigenvalue(const CMat& hermitian) {
    Eigen::MatrixXcd h = 0.5 * (hermitian + hermitian.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

void eigh(const RMat& m, RVec& w, RMat& v) {
    Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    w = es.eigenvalues();
    v = es.eigenvectors();
}

}  // namespace qshuttle

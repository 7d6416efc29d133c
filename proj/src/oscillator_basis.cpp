#include "qshuttle/oscillator_basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "qshuttle/format.hpp"

namespace qshuttle {

Basis::Basis(int d) : dim(d) {
    if (d < 2) throw std::invalid_argument("basis dimension must be at least 2");
}

namespace {

// Orthonormal Hermite functions phi_0..phi_nmax at x by the three-term recurrence.
void hermite_functions(int nmax, double x, std::vector<double>& phi) {
    phi.assign(nmax + 1, 0.0);
    phi[0] = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * x * x);
    if (nmax >= 1) phi[1] = std::sqrt(2.0) * x * phi[0];
    for (int n = 1; n < nmax; ++n)
        phi[n + 1] = std::sqrt(2.0 / (n + 1)) * x * phi[n] - std::sqrt(static_cast<double>(n) / (n + 1)) * phi[n - 1];
}

}  // namespace

double hermite_psi(int m, double x) {
    if (m < 0) throw std::invalid_argument("hermite_psi: level index must be non-negative");
    if (x <= 0.0) return 0.0;
    std::vector<double> phi;
    hermite_functions(2 * m + 1, x, phi);
    return std::sqrt(2.0) * phi[2 * m + 1];
}

Quadrature basis_quadrature(const Basis& basis) {
    const double xmax = std::sqrt(2.0 * (2.0 * basis.dim + 1.0)) + 6.0;
    const int nodes = std::max(8 * basis.dim, 256);
    return gauss_legendre(nodes, 0.0, xmax);
}

WavefunctionTable tabulate(const Basis& basis) {
    WavefunctionTable t;
    t.quad = basis_quadrature(basis);
    const int d = basis.dim;
    const auto nq = static_cast<Eigen::Index>(t.quad.nodes.size());
    t.psi.resize(nq, d);
    t.dpsi.resize(nq, d);
    std::vector<double> phi;
    const double r2 = std::sqrt(2.0);
    for (Eigen::Index q = 0; q < nq; ++q) {
        hermite_functions(2 * d + 1, t.quad.nodes[q], phi);
        for (int m = 0; m < d; ++m) {
            const int n = 2 * m + 1;
            t.psi(q, m) = r2 * phi[n];
            const double dphi = std::sqrt(n / 2.0) * phi[n - 1] - std::sqrt((n + 1) / 2.0) * phi[n + 1];
            t.dpsi(q, m) = r2 * dphi;
        }
    }
    return t;
}

std::pair<Operator, Operator> build_ladder(const Basis& basis) {
    const int d = basis.dim;
    Operator a;
    a.matrix = CMat::Zero(d, d);
    for (int m = 0; m + 1 < d; ++m) a.matrix(m, m + 1) = std::sqrt(static_cast<double>(m + 1));
    Operator ad;
    ad.matrix = a.matrix.adjoint();
    return {a, ad};
}

Operator build_number(const Basis& basis) {
    Operator n;
    n.matrix = CMat::Zero(basis.dim, basis.dim);
    for (int m = 0; m < basis.dim; ++m) n.matrix(m, m) = static_cast<double>(m);
    return n;
}

Operator build_hamiltonian(const Basis& basis, double omega, bool include_offset) {
    if (!(omega > 0.0)) throw std::invalid_argument("omega must be positive");
    Operator h;
    h.matrix = CMat::Zero(basis.dim, basis.dim);
    const double shift = include_offset ? 0.75 : 0.0;
    for (int m = 0; m < basis.dim; ++m) h.matrix(m, m) = 2.0 * omega * (m + shift);
    return h;
}

Operator build_position(const Basis& basis) {
    const auto t = tabulate(basis);
    RMat wx = t.psi;
    for (Eigen::Index q = 0; q < wx.rows(); ++q) wx.row(q) *= t.quad.weights[q] * t.quad.nodes[q];
    RMat x = t.psi.transpose() * wx;
    x = 0.5 * (x + x.transpose()).eval();
    Operator op;
    op.matrix = x.cast<cplx>();
    return op;
}

Operator build_momentum(const Basis& basis) {
    const auto t = tabulate(basis);
    RMat wpsi = t.psi;
    for (Eigen::Index q = 0; q < wpsi.rows(); ++q) wpsi.row(q) *= t.quad.weights[q];
    // D_{mn} = int psi_m psi_n'
    RMat dmat = wpsi.transpose() * t.dpsi;
    // exact antisymmetry: psi vanishes at both ends
    RMat anti = 0.5 * (dmat - dmat.transpose());
    Operator op;
    op.matrix = CMat(anti.rows(), anti.cols());
    for (Eigen::Index i = 0; i < anti.rows(); ++i)
        for (Eigen::Index j = 0; j < anti.cols(); ++j) op.matrix(i, j) = cplx(0.0, -anti(i, j));
    return op;
}

PositionEigen position_eigen(const Operator& x) {
    PositionEigen pe;
    RMat xr = x.matrix.real();
    eigh(xr, pe.xi, pe.v);
    return pe;
}

Operator build_exp_position(const Basis& basis, double s, ExpMode mode) {
    if (!std::isfinite(s)) throw std::invalid_argument("build_exp_position: exponent must be finite");
    Operator op;
    if (mode == ExpMode::eigen) {
        const auto pe = position_eigen(build_position(basis));
        RMat e = pe.v * (s * pe.xi).array().exp().matrix().asDiagonal() * pe.v.transpose();
        e = 0.5 * (e + e.transpose()).eval();
        op.matrix = e.cast<cplx>();
    } else {
        const auto t = tabulate(basis);
        RMat wpsi = t.psi;
        for (Eigen::Index q = 0; q < wpsi.rows(); ++q) wpsi.row(q) *= t.quad.weights[q] * std::exp(s * t.quad.nodes[q]);
        RMat e = t.psi.transpose() * wpsi;
        e = 0.5 * (e + e.transpose()).eval();
        op.matrix = e.cast<cplx>();
    }
    return op;
}

int default_margin(int dim) { return std::max(4, dim / 6); }

namespace {

CommutatorReport residuals_on(const Basis& basis, int keep) {
    const int d = basis.dim;
    const CMat x = build_position(basis).matrix;
    const CMat p = build_momentum(basis).matrix;
    const CMat n = build_number(basis).matrix;
    const CMat xp = x * p - p * x - cplx(0.0, 1.0) * CMat::Identity(d, d);
    const CMat xn = x * n - n * x - cplx(0.0, 0.5) * p;
    CommutatorReport r;
    r.dim = d;
    r.margin = d - keep;
    r.xp_full = max_abs(xp);
    r.xn_full = max_abs(xn);
    if (keep > 0) {
        r.xp_interior = max_abs(xp.topLeftCorner(keep, keep));
        r.xn_interior = max_abs(xn.topLeftCorner(keep, keep));
    }
    return r;
}

}  // namespace

CommutatorReport commutator_residuals(const Basis& basis, int margin) {
    if (margin < 0 || margin >= basis.dim) throw std::invalid_argument("commutator margin out of range");
    return residuals_on(basis, basis.dim - margin);
}

CommutatorReport commutator_residuals_block(const Basis& basis, int block) {
    if (block < 1 || block > basis.dim) throw std::invalid_argument("commutator block out of range");
    return residuals_on(basis, block);
}

double orthonormality_error(const Basis& basis) {
    const auto t = tabulate(basis);
    RMat wpsi = t.psi;
    for (Eigen::Index q = 0; q < wpsi.rows(); ++q) wpsi.row(q) *= t.quad.weights[q];
    RMat g = t.psi.transpose() * wpsi;
    return (g - RMat::Identity(basis.dim, basis.dim)).cwiseAbs().maxCoeff();
}

std::string operator_csv(const Operator& op) {
    std::ostringstream out;
    out << "row,col,re,im\n";
    for (Eigen::Index i = 0; i < op.matrix.rows(); ++i)
        for (Eigen::Index j = 0; j < op.matrix.cols(); ++j)
            out << i << ',' << j << ',' << fmt(op.matrix(i, j).real()) << ',' << fmt(op.matrix(i, j).imag()) << '\n';
    return out.str();
}

}  // namespace qshuttle

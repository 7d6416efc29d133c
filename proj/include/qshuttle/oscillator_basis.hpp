#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qshuttle/linalg.hpp"
#include "qshuttle/quadrature.hpp"

namespace qshuttle {

enum class Space { oscillator, composite };

struct Basis {
    int dim = 40;
    double length_unit = 1.0;

    explicit Basis(int d);
};

struct Operator {
    CMat matrix;
    Space space = Space::oscillator;
};

enum class ExpMode { eigen, quadrature };

// psi_m(x) for the half-harmonic well (hard wall at x = 0); zero for x <= 0.
double hermite_psi(int m, double x);

// The fixed quadrature used for all matrix elements against this basis.
Quadrature basis_quadrature(const Basis& basis);

// Tabulated psi_m and psi_m' on the quadrature nodes, row q = node, column m = level.
struct WavefunctionTable {
    Quadrature quad;
    RMat psi;
    RMat dpsi;
};
WavefunctionTable tabulate(const Basis& basis);

std::pair<Operator, Operator> build_ladder(const Basis& basis);
Operator build_number(const Basis& basis);
Operator build_hamiltonian(const Basis& basis, double omega, bool include_offset = false);
Operator build_position(const Basis& basis);
Operator build_momentum(const Basis& basis);
Operator build_exp_position(const Basis& basis, double s, ExpMode mode = ExpMode::eigen);

// Eigen-decomposition of the truncated position operator, X = V diag(xi) V^T.
struct PositionEigen {
    RVec xi;
    RMat v;
};
PositionEigen position_eigen(const Operator& x);

int default_margin(int dim);

struct CommutatorReport {
    int dim = 0;
    int margin = 0;
    double xp_interior = 0.0;  // max |([X,P] - iI)_{mn}| for m, n < dim - margin
    double xn_interior = 0.0;  // max |([X,a^dag a] - (i/2)P)_{mn}| on the same block
    double xp_full = 0.0;
    double xn_full = 0.0;
};
CommutatorReport commutator_residuals(const Basis& basis, int margin);

// Same residuals restricted to a fixed leading block of `block` levels.
CommutatorReport commutator_residuals_block(const Basis& basis, int block);

double orthonormality_error(const Basis& basis);

// Rows "row,col,re,im".
std::string operator_csv(const Operator& op);

}  // namespace qshuttle

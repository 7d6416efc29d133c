#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qshuttle/linalg.hpp"
#include "qshuttle/oscillator_basis.hpp"

namespace qshuttle {

enum class ModelKind { full, reduced, fixed_charge };

std::string to_string(ModelKind m);
ModelKind parse_model(const std::string& s);

struct EngineParams {
    double omega = 1.0;
    double gamma = 1.0;
    double kappa = 0.05;
    double Gamma_s = 0.5;
    double Gamma_d = 0.5;
    double eta = 0.25;
    double x0 = 0.3;
    double A = 1.0;
    double f_s = 1.0;
    double f_d = 0.0;
    double nbar_p = 0.0;
    double mass = 1.0;
    int dim = 40;
    ModelKind model = ModelKind::reduced;
    double n_e = 1.0;  // fixed_charge only
    ExpMode exp_mode = ExpMode::eigen;

    double alpha_s() const;
    double alpha_d() const;
};

struct ParamError : std::invalid_argument {
    std::string field;
    ParamError(const std::string& f, const std::string& msg) : std::invalid_argument(f + ": " + msg), field(f) {}
};

void validate(const EngineParams& p);

// Fermi-Dirac occupation; temperature 0 is the step-function limit.
double fermi(double energy, double mu, double temperature);

// Electron-space factors; index 0 = empty shuttle, 1 = one electron.
enum class ElectronOp { identity, lower, raise, number };
Eigen::Matrix2cd electron_matrix(ElectronOp e);

// Kronecker product with the electron index outer: (e*d + m, e'*d + m').
Operator compose(const Operator& osc, const Eigen::Matrix2cd& electron);

enum class Channel { noise, damping, thermal, source_in, source_out, drain_in, drain_out };
std::string to_string(Channel c);
bool is_tunnelling(Channel c);

struct JumpTerm {
    std::string label;
    Channel channel;
    double rate = 0.0;
    ElectronOp electron = ElectronOp::identity;
    Operator osc;                      // oscillator factor in the energy basis
    std::optional<RVec> x_profile;     // osc = f(X): values of f on the eigenvalues of X
    Operator op;                       // full jump operator (composite, or oscillator when ne == 1)
};

struct OperatorSet {
    EngineParams params;
    Basis basis{2};
    int ne = 2;  // electron dimension, 1 for fixed charge
    Operator h_osc, x, p, a, a_dag, number_osc;
    Operator h, x_full, p_full, n_phonon_full, number_e;  // on the evolution space
    PositionEigen xeig;
    std::vector<JumpTerm> jumps;

    int full_dim() const { return ne * basis.dim; }
    // electron-diagonal factor (E^dag E)_aa of the electron operator
    static double electron_weight(ElectronOp e, int a, int ne);
};

OperatorSet build_operator_set(const EngineParams& params);

}  // namespace qshuttle

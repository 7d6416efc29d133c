#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "qshuttle/engine_model.hpp"
#include "qshuttle/generator.hpp"
#include "qshuttle/observables.hpp"

namespace qshuttle {

struct StepSizeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct PositivityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SteadyStateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// -i[H, rho] + sum_j rate_j L[O_j] rho with dense products on the full space (energy basis).
CMat lindblad_apply(const OperatorSet& ops, const CMat& rho);

// Same generator with the products O^dag O cached, for repeated use.
class DenseLiouvillian {
public:
    explicit DenseLiouvillian(const OperatorSet& ops);
    void apply(const CMat& rho, CMat& out) const;

private:
    struct Term {
        double rate;
        CMat o, od, k;
    };
    CMat h_;
    std::vector<Term> terms_;
};

enum class InitialState { ground_empty, ground_occupied };
InitialState parse_initial_state(const std::string& s);
std::string to_string(InitialState s);

// Dense density matrix in the energy basis of the evolution space.
CMat initial_state(const OperatorSet& ops, InitialState kind);

enum class Integrator { split, rk4 };
Integrator parse_integrator(const std::string& s);
std::string to_string(Integrator i);

struct EvolveOptions {
    double t_max = 30.0 * 3.141592653589793;
    double dt = 3.141592653589793 / 200.0;
    int record_stride = 10;
    Integrator integrator = Integrator::split;
    bool track_min_eig = true;
    double trace_abort = 1e-6;
    double min_eig_abort = -1e-4;
};

struct EvolveResult {
    std::vector<Sample> samples;
    BlockState final_state;  // position frame
    double max_trace_error = 0.0;
    double max_hermiticity = 0.0;
    double min_eigenvalue = 0.0;
    double max_identity_error = 0.0;
};

std::size_t step_count(double t_max, double dt);

EvolveResult evolve(const OperatorSet& ops, const CMat& rho0_energy, const EvolveOptions& opt);

struct FluxBreakdown {
    double time = 0.0;
    double q_dot_hot = 0.0;
    double q_dot_cold = 0.0;
    double e_dot_control = 0.0;
    double e_dot_total = 0.0;
    double q_hot_mean_field = 0.0;
    double q_hot_closed = 0.0;
    double q_cold_closed = 0.0;
    double e_ctrl_closed = 0.0;

    // |hot - cold + control - total| relative to the largest of the four magnitudes.
    double identity_error() const;
};

FluxBreakdown flux_breakdown(const ObservableSet& obs, const BlockState& rho_x, double t = 0.0);
FluxBreakdown flux_breakdown(const Sample& s);

struct SteadyOptions {
    std::size_t dense_limit = 8000;  // real unknowns
    double residual_tol = 1e-9;
    double degenerate_rcond = 1e-14;
    double fallback_dt = 3.141592653589793 / 200.0;
    double fallback_t_max = 2000.0;
};

struct SteadyResult {
    BlockState rho;  // energy frame
    Sample observables;
    double residual = 0.0;
    double rcond = 0.0;
    std::string method;
    bool converged = false;
    std::size_t unknowns = 0;
};

SteadyResult steady_state(const OperatorSet& ops, const SteadyOptions& opt = {});

}  // namespace qshuttle

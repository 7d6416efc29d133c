#pragma once

#include <vector>

#include "qshuttle/generator.hpp"

namespace qshuttle {

struct Sample {
    double t = 0.0;
    double x = 0.0;
    double v = 0.0;
    double n_phonon = 0.0;
    double n_electron = 0.0;
    double trace = 0.0;
    double hermiticity = 0.0;
    double min_eig = 0.0;
    double force = 0.0;
    double force_v = 0.0;  // <(F v + v F)/2>
    double q_dot_hot = 0.0;
    double q_dot_cold = 0.0;
    double e_dot_control = 0.0;
    double e_dot_total = 0.0;
    double e_dot_meas = 0.0;
    double de_jump = 0.0;
    // closed forms from the mean-field expressions
    double q_hot_mean_field = 0.0;   // (w g / 2) <n>^2
    double q_hot_closed = 0.0;  // (w g / 2) <n>
    double q_cold_closed = 0.0; // 2 w k (N - nbar)
    double e_ctrl_closed = 0.0;
    int event = -1;             // index of the jump term that fired in the preceding step
};

// Every observable the runners record, precomputed in the position frame.
class ObservableSet {
public:
    explicit ObservableSet(const Generator& g);

    // Fills everything except t, e_dot_total, de_jump, min_eig and event.
    void measure(const BlockState& rho_x, Sample& s) const;
    double energy(const BlockState& rho_x) const { return g_.expect(energy_, rho_x); }
    double flux_term(std::size_t j, const BlockState& rho_x) const { return g_.expect(flux_[j], rho_x); }
    double measurement_rate(const BlockState& rho_x) const;

    // Hermitian oscillator matrices in the energy basis, for reuse by other modules.
    const CMat& force_energy() const { return force_e_; }
    const CMat& force_v_energy() const { return force_v_e_; }
    double p0() const { return p0_; }
    const Generator& generator() const { return g_; }

private:
    const Generator& g_;
    Observable trace_, x_, v_, nph_, ne_, energy_, force_, force_v_;
    std::vector<Observable> flux_;
    Observable exp_src_, exp_drn_;
    bool has_src_ = false, has_drn_ = false;
    Observable meas_a_, meas_ha_;
    bool has_meas_ = false;
    CMat force_e_, force_v_e_;
    double p0_ = 0.0;
};

// D^dag[O] A = O^dag A O - (O^dag O A + A O^dag O) / 2
CMat adjoint_dissipator(const CMat& o, const CMat& a);

}  // namespace qshuttle

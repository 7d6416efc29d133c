#pragma once

#include <vector>

#include "qshuttle/engine_model.hpp"
#include "qshuttle/kernels.hpp"
#include "qshuttle/linalg.hpp"

namespace qshuttle {

// Frame of the oscillator factor: energy eigenbasis or eigenbasis of the truncated X.
enum class Frame { energy, position };

// Density matrix stored as ne x ne oscillator blocks; inactive blocks are exactly zero.
struct BlockState {
    int ne = 1;
    int d = 0;
    Frame frame = Frame::energy;
    std::vector<CMat> blocks;
    std::vector<char> active;

    BlockState() = default;
    BlockState(int ne_, int d_, Frame f);

    int index(int a, int b) const { return a * ne + b; }
    bool is_active(int a, int b) const { return active[index(a, b)] != 0; }
    CMat& at(int a, int b) { return blocks[index(a, b)]; }
    const CMat& at(int a, int b) const { return blocks[index(a, b)]; }
    void activate(int a, int b);
    void deactivate(int a, int b);

    double trace() const;
    void scale(double s);
    double hermiticity_error() const;
    double min_eigenvalue() const;
    double electron_population(int a) const;

    static BlockState from_dense(const CMat& rho, int ne, Frame f);
    CMat to_dense() const;
};

// Electron-diagonal observable: one oscillator matrix per electron level (empty = zero).
struct Observable {
    std::vector<CMat> level;
};

// Linear map acting elementwise on the oscillator indices, mixing blocks:
// out_o(j,m) = sum_i coef_{o,i}(j,m) * in_i(j,m).
struct ElementwiseMap {
    struct Entry {
        int out = 0;
        int in = 0;
        RMat coef;
    };
    int ne = 1;
    std::vector<Entry> entries;

    void apply(const kernels::Table& k, const BlockState& in, BlockState& out) const;
};

class Generator {
public:
    explicit Generator(const OperatorSet& ops, const kernels::Table& table = kernels::active());

    const OperatorSet& ops() const { return ops_; }
    const kernels::Table& table() const { return table_; }
    int ne() const { return ops_.ne; }
    int dim() const { return ops_.basis.dim; }

    // True when every jump factor is a function of X or a single-offset ladder.
    bool splittable() const { return splittable_; }

    void to_energy(const BlockState& in, BlockState& out) const;
    void to_position(const BlockState& in, BlockState& out) const;

    Observable observable(const CMat& energy_osc) const;
    Observable observable(const std::vector<CMat>& energy_levels) const;
    double expect(const Observable& o, const BlockState& rho_x) const;

    // Terms whose oscillator factor is a function of X, in the position frame.
    // With no_jump set, the sandwich part of tunnelling terms is dropped.
    ElementwiseMap position_generator(bool no_jump) const;
    ElementwiseMap position_propagator(double tau, bool no_jump) const;

    // -i[H, rho] plus the ladder dissipators, energy frame, block by block.
    void apply_ladder(const CMat& rho_e, CMat& out, bool with_hamiltonian) const;

    // Tr[H_osc L(rho)] evaluated by applying the generator itself.
    double energy_rate(const BlockState& rho_x) const;

    // Full generator applied in the energy frame with dense matrix products.
    void apply_energy(const BlockState& rho_e, BlockState& out) const;

    const RVec& energies() const { return energies_; }
    const RMat& v() const { return v_; }

    struct PositionTerm {
        int term = 0;
        double rate = 0.0;
        Eigen::MatrixXd e;  // ne x ne electron factor
        RVec q;
        bool monitored = false;
    };
    struct LadderTerm {
        int term = 0;
        double rate = 0.0;
        int shift = 1;  // O_{j, j+shift} = o_j
        RVec o;
        RVec k;         // diagonal of O^dag O
    };
    const std::vector<PositionTerm>& position_terms() const { return pos_terms_; }
    const std::vector<LadderTerm>& ladder_terms() const { return ladder_terms_; }

private:
    Eigen::MatrixXd local_generator(int j, int m, bool no_jump) const;

    const OperatorSet& ops_;
    const kernels::Table& table_;
    RMat v_, vt_;
    RVec energies_;
    std::vector<PositionTerm> pos_terms_;
    std::vector<LadderTerm> ladder_terms_;
    bool splittable_ = true;
    ElementwiseMap gen_full_;
    Observable h_obs_;
};

// Strang splitting: position-diagonal terms (exact, elementwise) for dt/2,
// Hamiltonian + ladder terms in the energy frame for dt, then dt/2 again.
class SplitStepper {
public:
    SplitStepper(const Generator& g, double dt, bool no_jump);

    // rho_x in the position frame; returns the trace after the step (before any renormalisation).
    double step(BlockState& rho_x);
    double dt() const { return dt_; }

private:
    void ladder_step(CMat& rho);

    const Generator& g_;
    double dt_;
    ElementwiseMap half_;
    CMat phase_half_;
    BlockState tmp_x_, tmp_e_;
    CMat k1_, k2_, k3_, k4_, stage_;
};

}  // namespace qshuttle

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qshuttle/generator.hpp"
#include "qshuttle/master_equation.hpp"
#include "qshuttle/observables.hpp"

namespace qshuttle {

struct JumpError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct JumpEvent {
    double t = 0.0;
    int term = -1;  // index into OperatorSet::jumps
    std::string kind;
};

struct TrajectoryRecord {
    std::uint64_t seed = 0;
    int index = 0;
    std::vector<Sample> samples;
    std::vector<JumpEvent> jumps;
    double max_step_probability = 0.0;
    std::size_t probability_warnings = 0;  // steps with total jump probability above the warning level
};

struct TrajectoryOptions {
    double t_max = 30.0 * 3.141592653589793;
    double dt = 3.141592653589793 / 200.0;
    int record_stride = 10;
    double warn_probability = 0.1;
};

struct StepOutcome {
    int event = -1;         // jump term index, -1 for the no-jump branch
    double de_jump = 0.0;   // Tr[H (rho' - rho)] on jump steps
    double p_total = 0.0;
};

// Jump unraveling of the tunnelling terms; noise and damping stay unconditional.
class TrajectoryEngine {
public:
    TrajectoryEngine(const OperatorSet& ops, double dt);
    TrajectoryEngine(const TrajectoryEngine&) = delete;
    TrajectoryEngine& operator=(const TrajectoryEngine&) = delete;

    const Generator& generator() const { return gen_; }
    const ObservableSet& observables() const { return obs_; }
    const std::vector<int>& monitored() const { return monitored_; }
    double dt() const { return dt_; }

    // One probability per monitored term (same order as monitored()).
    std::vector<double> jump_probabilities(const BlockState& rho_x) const;

    // Normalised O rho O^dag for jump term `term`.
    BlockState apply_jump(const BlockState& rho_x, int term) const;

    // One step against the uniform draw u in [0, 1); stepper must come from make_stepper().
    StepOutcome step(BlockState& rho_x, double u, SplitStepper& stepper) const;
    SplitStepper make_stepper() const { return nojump_; }

    TrajectoryRecord run(const CMat& rho0_energy, const TrajectoryOptions& opt, std::uint64_t seed, int index = 0) const;

private:
    OperatorSet const& ops_;
    Generator gen_;
    ObservableSet obs_;
    double dt_;
    SplitStepper nojump_;
    std::vector<int> monitored_;
    std::vector<RVec> k_diag_;  // |q|^2 on the X eigenvalues, per monitored term
    std::vector<RVec> q_;
    std::vector<Eigen::MatrixXd> e_;
};

struct SeriesStats {
    std::vector<double> mean, stderr_;
};

struct Ensemble {
    std::uint64_t master_seed = 0;
    std::vector<TrajectoryRecord> records;
    std::vector<double> t;
    // keyed by observable name, see ensemble_observables()
    std::vector<std::string> names;
    std::vector<SeriesStats> stats;

    const SeriesStats& operator[](const std::string& name) const;
};

const std::vector<std::string>& ensemble_observables();
double sample_value(const Sample& s, const std::string& name);

// Mean and standard error per time point; sums are over sorted values so the
// result does not depend on record order.
void summarise(Ensemble& e);

Ensemble run_ensemble(const TrajectoryEngine& engine, const CMat& rho0_energy, const TrajectoryOptions& opt,
                      int n_traj, std::uint64_t master_seed, unsigned threads);

}  // namespace qshuttle

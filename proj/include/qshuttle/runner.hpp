#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qshuttle/analysis.hpp"
#include "qshuttle/config.hpp"
#include "qshuttle/trajectories.hpp"

namespace qshuttle {

struct Agreement {
    std::vector<std::string> names;
    std::vector<double> fraction;  // share of sampled times with |mean - unconditional| <= nsigma * stderr
    std::size_t points = 0;
};

// Ensemble and unconditional series must share the time grid.
Agreement compare_to_unconditional(const Ensemble& e, const std::vector<Sample>& unconditional, double nsigma = 3.0);

struct StationaryAnalysis {
    double t_i = 0.0;
    std::size_t window = 0;  // samples per record in the window
    Spectrum sx, sv;
    double peak_omega = 0.0, peak_height = 0.0, phase_lag = 0.0;
    Histogram2D phase;
    double crater = 0.0;
    Histogram1D momentum;
    std::optional<GaussianFit> fit;
    std::string fit_error;
    PowerSeries power;  // ensemble mean, full grid
    double p_sc = 0.0, p_q = 0.0, q_dot_cold = 0.0, p0 = 0.0;
    double ratio = 0.0;  // p_q / p_sc
    double gap = 0.0;    // |p_q - q_dot_cold| / q_dot_cold
    double hull_mean = 0.0;
    std::vector<double> hull;  // per record
    std::optional<double> msd_mean;
};

struct AnalysisOptions {
    bool hann = false;
    bool detrend = true;
    int hist_bins_x = 40, hist_bins_v = 40, momentum_bins = 40;
    std::optional<std::pair<double, double>> fixed_point;  // (x, v) of the unconditional steady state
};

StationaryAnalysis analyse_stationary(const Ensemble& e, double p0, double mass, double t_i, const AnalysisOptions& opt);

struct RunReport {
    int exit_code = 0;
    std::string status = "ok";
    std::string error;
    std::vector<std::string> files;
    nlohmann::json summary;
};

// Runs the configured job into c.output_dir and always writes manifest.json.
RunReport execute(const RunConfig& c, std::ostream& log);

}  // namespace qshuttle

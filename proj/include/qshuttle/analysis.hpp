#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "qshuttle/engine_model.hpp"
#include "qshuttle/observables.hpp"

namespace qshuttle {

// Working force on the sink, -2 kappa D^dag[a] p, in the energy basis.
Operator force_operator(const OperatorSet& ops);

struct ForceDiagnostics {
    double linear_norm = 0.0;     // || 2 kappa D^dag[a] p ||
    double quadratic_norm = 0.0;  // || kappa^2 M D^dag[a] D^dag[a] x ||
    double ratio = 0.0;
};
ForceDiagnostics force_diagnostics(const OperatorSet& ops);

struct PowerSeries {
    std::vector<double> t;
    std::vector<double> p_sc;
    std::vector<double> p_q;
    std::vector<double> q_dot_cold;
    std::vector<double> w_sc_cum;  // trapezoidal integral of p_sc from t_i, zero before it
};

inline double power_semiclassical(const Sample& s) { return s.force * s.v; }
inline double power_quantum(const Sample& s, double p0) { return s.force_v - p0; }

PowerSeries power_series(const std::vector<Sample>& rec, double p0, double t_i);

// int F dx along a sampled path, trapezoidal.
double work_line_integral(const std::vector<double>& force, const std::vector<double>& x);

// Running trapezoidal integral of y(t) starting at the first sample with t >= t_i.
std::vector<double> cumulative_trapezoid(const std::vector<double>& t, const std::vector<double>& y, double t_i);

struct Spectrum {
    std::vector<double> omega;   // angular frequency, units of omega
    std::vector<double> values;
    std::string window = "none";
    bool detrend = true;
    int averaged = 1;
};

// One-sided |FFT|^2 normalised so that sum(values) = sum(x^2) (window-corrected).
Spectrum power_spectrum(const std::vector<double>& series, double dt, bool hann = false, bool detrend = true);
// Checks the time grid is uniform first.
Spectrum power_spectrum(const std::vector<double>& t, const std::vector<double>& series, bool hann = false,
                        bool detrend = true);
Spectrum average_spectra(const std::vector<Spectrum>& spectra);
std::size_t peak_bin(const Spectrum& s);  // ignores the zero-frequency bin

// arg of sum_k V_k conj(X_k) over the records at frequency bin `bin`.
double cross_spectrum_phase(const std::vector<std::vector<double>>& x, const std::vector<std::vector<double>>& v,
                            std::size_t bin, bool detrend = true);

struct Histogram2D {
    int nx = 0, nv = 0;
    double x_lo = 0, x_hi = 0, v_lo = 0, v_hi = 0;
    std::vector<long> counts;  // row-major over (ix, iv)
    std::vector<long> marginal_x, marginal_v;
    long total = 0;
    long at(int ix, int iv) const { return counts[static_cast<std::size_t>(ix) * nv + iv]; }
};

struct PhasePoints {
    std::vector<double> x, v;
};

// Ranges default to the data extent when lo >= hi.
Histogram2D phase_histogram(const std::vector<PhasePoints>& records, int nx, int nv, double x_lo = 0, double x_hi = 0,
                            double v_lo = 0, double v_hi = 0);

// max over bins at Chebyshev distance >= 2 from the centroid bin, over the mean of the 3x3 centre.
double crater_statistic(const Histogram2D& h);

struct Histogram1D {
    double lo = 0, hi = 0;
    std::vector<double> centers;
    std::vector<double> counts;
};
Histogram1D histogram_1d(const std::vector<double>& values, int bins, double lo = 0, double hi = 0);

struct GaussianFit {
    double mean = 0, sigma = 0, amplitude = 0, residual_rms = 0;
    std::vector<double> residuals;
};
GaussianFit gaussian_fit(const Histogram1D& h);

double convex_hull_area(const std::vector<double>& x, const std::vector<double>& y);

double mean_squared_distance(const PhasePoints& p, double x0, double v0);

}  // namespace qshuttle

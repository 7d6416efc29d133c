#include "qshuttle/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <stdexcept>

#include <fftw3.h>

namespace qshuttle {

Operator force_operator(const OperatorSet& ops) {
    Operator f;
    f.matrix = -2.0 * ops.params.kappa * adjoint_dissipator(ops.a.matrix, ops.p.matrix);
    f.matrix = 0.5 * (f.matrix + f.matrix.adjoint()).eval();
    return f;
}

namespace {

double spectral_norm(const CMat& h) {
    Eigen::MatrixXcd m = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

ForceDiagnostics force_diagnostics(const OperatorSet& ops) {
    const CMat& a = ops.a.matrix;
    const double k = ops.params.kappa;
    ForceDiagnostics fd;
    fd.linear_norm = spectral_norm(2.0 * k * adjoint_dissipator(a, ops.p.matrix));
    const CMat dd = adjoint_dissipator(a, adjoint_dissipator(a, ops.x.matrix));
    fd.quadratic_norm = spectral_norm(k * k * ops.params.mass * dd);
    fd.ratio = fd.linear_norm > 0.0 ? fd.quadratic_norm / fd.linear_norm : 0.0;
    return fd;
}

std::vector<double> cumulative_trapezoid(const std::vector<double>& t, const std::vector<double>& y, double t_i) {
    if (t.size() != y.size()) throw std::invalid_argument("cumulative_trapezoid: size mismatch");
    std::vector<double> w(t.size(), 0.0);
    std::size_t s = 0;
    while (s < t.size() && t[s] < t_i) ++s;
    for (std::size_t i = s + 1; i < t.size(); ++i) w[i] = w[i - 1] + 0.5 * (y[i] + y[i - 1]) * (t[i] - t[i - 1]);
    return w;
}

PowerSeries power_series(const std::vector<Sample>& rec, double p0, double t_i) {
    PowerSeries ps;
    for (const Sample& s : rec) {
        ps.t.push_back(s.t);
        ps.p_sc.push_back(power_semiclassical(s));
        ps.p_q.push_back(power_quantum(s, p0));
        ps.q_dot_cold.push_back(s.q_dot_cold);
    }
    ps.w_sc_cum = cumulative_trapezoid(ps.t, ps.p_sc, t_i);
    return ps;
}

double work_line_integral(const std::vector<double>& force, const std::vector<double>& x) {
    if (force.size() != x.size()) throw std::invalid_argument("work_line_integral: size mismatch");
    double w = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) w += 0.5 * (force[i] + force[i - 1]) * (x[i] - x[i - 1]);
    return w;
}

namespace {

std::mutex fftw_planner_mutex;

std::vector<double> prepared(const std::vector<double>& series, bool hann, bool detrend, double& wnorm) {
    const std::size_t n = series.size();
    std::vector<double> y(series);
    if (detrend) {
        const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
        for (double& v : y) v -= mean;
    }
    wnorm = 1.0;
    if (hann) {
        double w2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double w = 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n));
            y[i] *= w;
            w2 += w * w;
        }
        wnorm = w2 / static_cast<double>(n);
    }
    return y;
}

std::vector<std::complex<double>> rfft(std::vector<double>& y) {
    const int n = static_cast<int>(y.size());
    std::vector<std::complex<double>> out(static_cast<std::size_t>(n / 2 + 1));
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex);
        plan = fftw_plan_dft_r2c_1d(n, y.data(), reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex);
        fftw_destroy_plan(plan);
    }
    return out;
}

}  // namespace

Spectrum power_spectrum(const std::vector<double>& series, double dt, bool hann, bool detrend) {
    const std::size_t n = series.size();
    if (n < 256) throw std::invalid_argument("power_spectrum: series length must be at least 256");
    if (!(dt > 0.0)) throw std::invalid_argument("power_spectrum: dt must be positive");
    double wnorm = 1.0;
    std::vector<double> y = prepared(series, hann, detrend, wnorm);
    const auto c = rfft(y);
    Spectrum s;
    s.window = hann ? "hann" : "none";
    s.detrend = detrend;
    s.omega.resize(c.size());
    s.values.resize(c.size());
    const double scale = 1.0 / (static_cast<double>(n) * wnorm);
    for (std::size_t k = 0; k < c.size(); ++k) {
        const bool single = (k == 0) || (n % 2 == 0 && k == n / 2);
        s.omega[k] = 2.0 * M_PI * static_cast<double>(k) / (static_cast<double>(n) * dt);
        s.values[k] = (single ? 1.0 : 2.0) * std::norm(c[k]) * scale;
    }
    return s;
}

Spectrum power_spectrum(const std::vector<double>& t, const std::vector<double>& series, bool hann, bool detrend) {
    if (t.size() != series.size() || t.size() < 2) throw std::invalid_argument("power_spectrum: bad time grid");
    const double dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
    for (std::size_t i = 1; i < t.size(); ++i)
        if (std::abs((t[i] - t[i - 1]) - dt) > 1e-9 * std::max(1.0, std::abs(dt)))
            throw std::invalid_argument("power_spectrum: non-uniform time grid");
    return power_spectrum(series, dt, hann, detrend);
}

Spectrum average_spectra(const std::vector<Spectrum>& spectra) {
    if (spectra.empty()) throw std::invalid_argument("average_spectra: no spectra");
    Spectrum s = spectra.front();
    for (std::size_t i = 1; i < spectra.size(); ++i) {
        if (spectra[i].values.size() != s.values.size()) throw std::invalid_argument("average_spectra: grid mismatch");
        for (std::size_t k = 0; k < s.values.size(); ++k) s.values[k] += spectra[i].values[k];
    }
    for (double& v : s.values) v /= static_cast<double>(spectra.size());
    s.averaged = static_cast<int>(spectra.size());
    return s;
}

std::size_t peak_bin(const Spectrum& s) {
    if (s.values.size() < 2) throw std::invalid_argument("peak_bin: spectrum too short");
    return static_cast<std::size_t>(std::max_element(s.values.begin() + 1, s.values.end()) - s.values.begin());
}

double cross_spectrum_phase(const std::vector<std::vector<double>>& x, const std::vector<std::vector<double>>& v,
                            std::size_t bin, bool detrend) {
    if (x.size() != v.size() || x.empty()) throw std::invalid_argument("cross_spectrum_phase: record mismatch");
    std::complex<double> acc = 0.0;
    for (std::size_t r = 0; r < x.size(); ++r) {
        double wn = 1.0;
        std::vector<double> xr = prepared(x[r], false, detrend, wn);
        std::vector<double> vr = prepared(v[r], false, detrend, wn);
        const auto cx = rfft(xr);
        const auto cv = rfft(vr);
        if (bin >= cx.size()) throw std::invalid_argument("cross_spectrum_phase: bin out of range");
        acc += cv[bin] * std::conj(cx[bin]);
    }
    return std::arg(acc);
}

Histogram2D phase_histogram(const std::vector<PhasePoints>& records, int nx, int nv, double x_lo, double x_hi,
                            double v_lo, double v_hi) {
    if (records.empty()) throw std::invalid_argument("phase_histogram: no records");
    if (nx < 1 || nv < 1) throw std::invalid_argument("phase_histogram: bin counts must be positive");
    if (!(x_lo < x_hi) || !(v_lo < v_hi)) {
        double xmn = std::numeric_limits<double>::infinity(), xmx = -xmn, vmn = xmn, vmx = -xmn;
        for (const auto& r : records)
            for (std::size_t i = 0; i < r.x.size(); ++i) {
                xmn = std::min(xmn, r.x[i]);
                xmx = std::max(xmx, r.x[i]);
                vmn = std::min(vmn, r.v[i]);
                vmx = std::max(vmx, r.v[i]);
            }
        if (!(x_lo < x_hi)) {
            const double pad = xmx > xmn ? 1e-9 * (xmx - xmn) : 0.5;
            x_lo = xmn - pad;
            x_hi = xmx + pad;
        }
        if (!(v_lo < v_hi)) {
            const double pad = vmx > vmn ? 1e-9 * (vmx - vmn) : 0.5;
            v_lo = vmn - pad;
            v_hi = vmx + pad;
        }
    }
    if (!(x_lo < x_hi) || !(v_lo < v_hi)) throw std::invalid_argument("phase_histogram: empty range");
    Histogram2D h;
    h.nx = nx;
    h.nv = nv;
    h.x_lo = x_lo;
    h.x_hi = x_hi;
    h.v_lo = v_lo;
    h.v_hi = v_hi;
    h.counts.assign(static_cast<std::size_t>(nx) * nv, 0);
    h.marginal_x.assign(nx, 0);
    h.marginal_v.assign(nv, 0);
    for (const auto& r : records) {
        if (r.x.size() != r.v.size()) throw std::invalid_argument("phase_histogram: x/v length mismatch");
        for (std::size_t i = 0; i < r.x.size(); ++i) {
            const int ix = static_cast<int>(std::floor((r.x[i] - x_lo) / (x_hi - x_lo) * nx));
            const int iv = static_cast<int>(std::floor((r.v[i] - v_lo) / (v_hi - v_lo) * nv));
            if (ix < 0 || ix >= nx || iv < 0 || iv >= nv) continue;
            ++h.counts[static_cast<std::size_t>(ix) * nv + iv];
            ++h.marginal_x[ix];
            ++h.marginal_v[iv];
            ++h.total;
        }
    }
    return h;
}

double crater_statistic(const Histogram2D& h) {
    if (h.total == 0) throw std::invalid_argument("crater_statistic: empty histogram");
    double cx = 0.0, cv = 0.0;
    for (int i = 0; i < h.nx; ++i)
        for (int j = 0; j < h.nv; ++j) {
            cx += (i + 0.5) * static_cast<double>(h.at(i, j));
            cv += (j + 0.5) * static_cast<double>(h.at(i, j));
        }
    const int ci = std::clamp(static_cast<int>(cx / static_cast<double>(h.total)), 0, h.nx - 1);
    const int cj = std::clamp(static_cast<int>(cv / static_cast<double>(h.total)), 0, h.nv - 1);
    double central = 0.0;
    int ncentral = 0;
    long ring = 0;
    for (int i = 0; i < h.nx; ++i)
        for (int j = 0; j < h.nv; ++j) {
            const int dist = std::max(std::abs(i - ci), std::abs(j - cj));
            if (dist <= 1) {
                central += static_cast<double>(h.at(i, j));
                ++ncentral;
            } else {
                ring = std::max(ring, h.at(i, j));
            }
        }
    central /= ncentral;
    if (central == 0.0) return ring > 0 ? std::numeric_limits<double>::infinity() : 0.0;
    return static_cast<double>(ring) / central;
}

Histogram1D histogram_1d(const std::vector<double>& values, int bins, double lo, double hi) {
    if (bins < 1) throw std::invalid_argument("histogram_1d: bins must be positive");
    if (values.empty()) throw std::invalid_argument("histogram_1d: no values");
    if (!(lo < hi)) {
        const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
        const double pad = *mx > *mn ? 1e-9 * (*mx - *mn) : 0.5;
        lo = *mn - pad;
        hi = *mx + pad;
    }
    Histogram1D h;
    h.lo = lo;
    h.hi = hi;
    h.counts.assign(bins, 0.0);
    h.centers.resize(bins);
    const double w = (hi - lo) / bins;
    for (int i = 0; i < bins; ++i) h.centers[i] = lo + (i + 0.5) * w;
    for (double v : values) {
        const int i = static_cast<int>(std::floor((v - lo) / w));
        if (i >= 0 && i < bins) h.counts[i] += 1.0;
    }
    return h;
}

GaussianFit gaussian_fit(const Histogram1D& h) {
    const std::size_t n = h.counts.size();
    std::size_t nonzero = 0;
    for (double c : h.counts)
        if (c > 0.0) ++nonzero;
    if (nonzero < 5) throw std::invalid_argument("gaussian_fit: need at least 5 nonzero bins");
    // work in a centred, scaled coordinate for conditioning
    const double x0 = 0.5 * (h.lo + h.hi);
    const double sc = 0.5 * (h.hi - h.lo);
    Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
    Eigen::Vector3d atb = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < n; ++i) {
        const double y = h.counts[i];
        if (y <= 0.0) continue;
        const double u = (h.centers[i] - x0) / sc;
        const Eigen::Vector3d row(1.0, u, u * u);
        const double w = y * y;
        ata += w * row * row.transpose();
        atb += w * row * std::log(y);
    }
    const Eigen::Vector3d c = ata.ldlt().solve(atb);
    if (!(c[2] < 0.0)) throw std::runtime_error("gaussian_fit: degenerate fit (non-negative curvature)");
    double s2u = -1.0 / (2.0 * c[2]);
    double mu = c[1] * s2u;
    double amp = std::exp(c[0] + mu * mu / (2.0 * s2u));
    double sig = std::sqrt(s2u);

    // one Gauss-Newton step on the linear-scale residuals
    Eigen::Matrix3d jtj = Eigen::Matrix3d::Zero();
    Eigen::Vector3d jtr = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < n; ++i) {
        const double u = (h.centers[i] - x0) / sc;
        const double z = (u - mu) / sig;
        const double g = std::exp(-0.5 * z * z);
        const double r = h.counts[i] - amp * g;
        const Eigen::Vector3d j(g, amp * g * z / sig, amp * g * z * z / sig);
        jtj += j * j.transpose();
        jtr += j * r;
    }
    const Eigen::Vector3d delta = jtj.ldlt().solve(jtr);
    if (delta.allFinite() && sig + delta[2] > 0.0) {
        amp += delta[0];
        mu += delta[1];
        sig += delta[2];
    }
    if (!(sig > 1e-12)) throw std::runtime_error("gaussian_fit: degenerate fit (sigma -> 0)");

    GaussianFit f;
    f.mean = x0 + sc * mu;
    f.sigma = sc * sig;
    f.amplitude = amp;
    double ss = 0.0;
    f.residuals.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double z = (h.centers[i] - f.mean) / f.sigma;
        f.residuals[i] = h.counts[i] - f.amplitude * std::exp(-0.5 * z * z);
        ss += f.residuals[i] * f.residuals[i];
    }
    f.residual_rms = std::sqrt(ss / static_cast<double>(n));
    return f;
}

double convex_hull_area(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw std::invalid_argument("convex_hull_area: size mismatch");
    std::vector<std::pair<double, double>> p(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) p[i] = {x[i], y[i]};
    std::sort(p.begin(), p.end());
    p.erase(std::unique(p.begin(), p.end()), p.end());
    if (p.size() < 3) return 0.0;
    auto cross = [](const auto& o, const auto& a, const auto& b) {
        return (a.first - o.first) * (b.second - o.second) - (a.second - o.second) * (b.first - o.first);
    };
    std::vector<std::pair<double, double>> hull(2 * p.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p[i]) <= 0) --k;
        hull[k++] = p[i];
    }
    for (std::size_t i = p.size() - 1, t = k + 1; i > 0; --i) {
        while (k >= t && cross(hull[k - 2], hull[k - 1], p[i - 1]) <= 0) --k;
        hull[k++] = p[i - 1];
    }
    hull.resize(k - 1);
    double area = 0.0;
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const auto& a = hull[i];
        const auto& b = hull[(i + 1) % hull.size()];
        area += a.first * b.second - b.first * a.second;
    }
    return 0.5 * std::abs(area);
}

double mean_squared_distance(const PhasePoints& p, double x0, double v0) {
    if (p.x.empty() || p.x.size() != p.v.size()) throw std::invalid_argument("mean_squared_distance: bad points");
    double s = 0.0;
    for (std::size_t i = 0; i < p.x.size(); ++i) {
        const double dx = p.x[i] - x0, dv = p.v[i] - v0;
        s += dx * dx + dv * dv;
    }
    return s / static_cast<double>(p.x.size());
}

}  // namespace qshuttle

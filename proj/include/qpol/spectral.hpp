#pragma once

// Joint spectral amplitude (JSA) of the down-conversion pair: pump-envelope x
// phase-matching construction, Gaussian filtering, Schmidt decomposition, and
// two-photon interference (Hong-Ou-Mandel) dip prediction, plus the
// accidental-floor visibility correction.

#include "qpol/fock.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace qpol {

inline constexpr double kSpeedOfLightNmPerFs = 299.792458;

inline double omega_rad_per_fs(double wavelength_nm) {
    return 2.0 * kPi * kSpeedOfLightNmPerFs / wavelength_nm;
}

struct PumpParams {
    double center_wavelength_nm = 390.0;
    double duration_fwhm_fs = 140.0;
};

struct PhaseMatchParams {
    double crystal_length_mm = 0.6;
    // Linearized group-velocity mismatch between pump and the (degenerate)
    // down-converted photons. The default is chosen so the unfiltered
    // marginal is broadband on the scale of a 3 nm filter.
    double gvm_slope_fs_per_mm = 270.0;
};

struct SpectralGrid {
    double min_nm = 760.0;
    double max_nm = 800.0;
    int points = 256;
};

// Two-photon amplitude over a square signal x idler wavelength grid
// (row = signal, column = idler), normalized to unit discrete L2 norm.
struct JointSpectralAmplitude {
    std::vector<double> wavelength_nm;
    std::vector<double> omega_rad_fs;
    Eigen::MatrixXcd amplitude;
    PumpParams pump;
    PhaseMatchParams phase_match;

    int points() const { return int(wavelength_nm.size()); }

    void normalize() {
        const double n = amplitude.norm();
        if (n < 1e-300) throw std::runtime_error("joint amplitude has zero norm");
        amplitude /= n;
    }
};

inline double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

// f(w_s, w_i) = alpha(w_s + w_i) * Phi(w_s, w_i): Gaussian pump envelope
// (converted from the pump-intensity FWHM) times a sinc phase-matching
// profile with a linearized group-velocity mismatch.
inline JointSpectralAmplitude build_jsa(const PumpParams& pump = {},
                                        const PhaseMatchParams& pm = {},
                                        const SpectralGrid& grid = {}) {
    if (!(grid.max_nm > grid.min_nm) || grid.points < 8)
        throw std::invalid_argument("degenerate spectral grid");
    if (pump.duration_fwhm_fs <= 0.0 || pump.center_wavelength_nm <= 0.0)
        throw std::invalid_argument("pump parameters must be positive");
    if (pm.crystal_length_mm <= 0.0)
        throw std::invalid_argument("crystal length must be positive");
    JointSpectralAmplitude jsa;
    jsa.pump = pump;
    jsa.phase_match = pm;
    const int n = grid.points;
    jsa.wavelength_nm.resize(size_t(n));
    jsa.omega_rad_fs.resize(size_t(n));
    for (int i = 0; i < n; ++i) {
        jsa.wavelength_nm[size_t(i)] =
            grid.min_nm + (grid.max_nm - grid.min_nm) * i / (n - 1);
        jsa.omega_rad_fs[size_t(i)] = omega_rad_per_fs(jsa.wavelength_nm[size_t(i)]);
    }
    const double omega_pump = omega_rad_per_fs(pump.center_wavelength_nm);
    const double omega_deg = omega_pump / 2.0;  // degeneracy point
    const double sigma_t = pump.duration_fwhm_fs / (2.0 * std::sqrt(std::log(2.0)));
    const double half_length = 0.5 * pm.crystal_length_mm * pm.gvm_slope_fs_per_mm;
    jsa.amplitude.resize(n, n);
    for (int i = 0; i < n; ++i) {
        const double nu_s = jsa.omega_rad_fs[size_t(i)] - omega_deg;
        for (int j = 0; j < n; ++j) {
            const double nu_i = jsa.omega_rad_fs[size_t(j)] - omega_deg;
            const double detune = nu_s + nu_i;
            const double alpha = std::exp(-0.5 * sigma_t * sigma_t * detune * detune);
            const double phi = sinc(half_length * detune);
            jsa.amplitude(i, j) = alpha * phi;
        }
    }
    jsa.normalize();
    return jsa;
}

// Gaussian spectral filter; `fwhm_nm` is the intensity FWHM, so the
// amplitude profile is exp(-2 ln2 (lambda-c)^2 / fwhm^2).
struct FilterSpec {
    double center_nm = 780.0;
    double fwhm_nm = 3.0;

    double amplitude(double wavelength_nm) const {
        const double d = (wavelength_nm - center_nm) / fwhm_nm;
        return std::exp(-2.0 * std::log(2.0) * d * d);
    }
};

struct FilteredJsa {
    JointSpectralAmplitude jsa;
    double transmitted_fraction = 0.0;  // probability the pair survives both filters
};

inline FilteredJsa apply_filters(const JointSpectralAmplitude& jsa,
                                 const FilterSpec& filter_signal,
                                 const FilterSpec& filter_idler) {
    if (filter_signal.fwhm_nm <= 0.0 || filter_idler.fwhm_nm <= 0.0)
        throw std::invalid_argument("filter FWHM must be positive");
    FilteredJsa out{jsa, 0.0};
    const int n = jsa.points();
    for (int i = 0; i < n; ++i) {
        const double gs = filter_signal.amplitude(jsa.wavelength_nm[size_t(i)]);
        for (int j = 0; j < n; ++j) {
            const double gi = filter_idler.amplitude(jsa.wavelength_nm[size_t(j)]);
            out.jsa.amplitude(i, j) *= gs * gi;
        }
    }
    const double norm2 = out.jsa.amplitude.squaredNorm();
    if (norm2 < 1e-300)
        throw std::runtime_error("filters do not overlap the spectral grid");
    out.transmitted_fraction = norm2;  // input was unit-norm
    out.jsa.normalize();
    return out;
}

// Schmidt decomposition via SVD: jsa = sum_k sqrt(lambda_k) u_k v_k^T with
// lambda_k the squared singular values (sum 1). K = 1/sum lambda^2 is the
// effective mode number; purity of a heralded photon is 1/K.
struct SchmidtResult {
    std::vector<double> lambdas;
    double schmidt_number = 1.0;
    double heralded_purity = 1.0;  // sum lambda_k^2
    Eigen::MatrixXcd u;            // signal modes (columns)
    Eigen::MatrixXcd v;            // idler modes (columns)
    Eigen::VectorXd singular_values;
};

inline SchmidtResult schmidt(const JointSpectralAmplitude& jsa) {
    if (std::abs(jsa.amplitude.norm() - 1.0) > 1e-9)
        throw std::invalid_argument("joint amplitude must be normalized");
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(jsa.amplitude,
                                        Eigen::ComputeThinU | Eigen::ComputeThinV);
    SchmidtResult res;
    res.singular_values = svd.singularValues();
    res.u = svd.matrixU();
    res.v = svd.matrixV();
    double sum = 0.0, sum2 = 0.0;
    for (int k = 0; k < res.singular_values.size(); ++k) {
        const double l = res.singular_values(k) * res.singular_values(k);
        res.lambdas.push_back(l);
        sum += l;
        sum2 += l * l;
    }
    for (double& l : res.lambdas) l /= sum;  // unit-sum guard against rounding
    res.heralded_purity = sum2 / (sum * sum);
    res.schmidt_number = 1.0 / res.heralded_purity;
    return res;
}

// Hong-Ou-Mandel coincidence rate between the paired photons:
// C(tau) = (1 - Re O(tau)) / 2 with the exchange overlap
// O(tau) = sum_{jk} f(j,k) conj(f(k,j)) e^{i (w_j - w_k) tau}.
// `fit` holds the Gaussian-dip least-squares model b - d exp(-tau^2/2w^2)
// used to read off the visibility (max - min)/max of the fitted dip.
struct HomCurve {
    std::vector<double> delay_fs;
    std::vector<double> rate;
    std::vector<double> fit;
    double visibility = 0.0;
    double baseline = 0.5;
    double dip_rate = 0.0;  // fitted rate at tau = 0
};

inline std::vector<double> default_delays(double span_fs = 2000.0, int points = 201) {
    std::vector<double> d(static_cast<size_t>(points));
    for (int i = 0; i < points; ++i)
        d[size_t(i)] = -span_fs + 2.0 * span_fs * i / (points - 1);
    return d;
}

inline HomCurve hom_curve(const JointSpectralAmplitude& jsa,
                          const std::vector<double>& delays_fs) {
    if (delays_fs.size() < 5)
        throw std::invalid_argument("need at least 5 delay samples");
    double dmin = delays_fs.front(), dmax = delays_fs.front();
    for (double d : delays_fs) {
        dmin = std::min(dmin, d);
        dmax = std::max(dmax, d);
    }
    if (dmin > 0.0 || dmax < 0.0)
        throw std::invalid_argument("delays must bracket zero");
    const int n = jsa.points();
    Eigen::MatrixXcd g(n, n);  // exchange kernel f(j,k) conj(f(k,j))
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
            g(j, k) = jsa.amplitude(j, k) * std::conj(jsa.amplitude(k, j));
    HomCurve curve;
    curve.delay_fs = delays_fs;
    curve.rate.reserve(delays_fs.size());
    for (double tau : delays_fs) {
        Eigen::VectorXcd a(n);
        for (int j = 0; j < n; ++j)
            a(j) = std::exp(Complex(0.0, jsa.omega_rad_fs[size_t(j)] * tau));
        const Complex overlap = (a.transpose() * (g * a.conjugate()))(0);
        curve.rate.push_back(std::max(0.0, 0.5 * (1.0 - overlap.real())));
    }

    // Gaussian-dip fit: for a trial width, (baseline, depth) solve by linear
    // least squares; the width is found by scan plus golden-section refine.
    const auto sse_for = [&](double w, double& b, double& d) {
        double s11 = 0, s12 = 0, s22 = 0, r1 = 0, r2 = 0;
        for (size_t i = 0; i < delays_fs.size(); ++i) {
            const double gdip = std::exp(-0.5 * delays_fs[i] * delays_fs[i] / (w * w));
            s11 += 1.0;
            s12 += gdip;
            s22 += gdip * gdip;
            r1 += curve.rate[i];
            r2 += curve.rate[i] * gdip;
        }
        const double det = s11 * s22 - s12 * s12;
        if (std::abs(det) < 1e-30) {
            b = r1 / s11;
            d = 0.0;
        } else {
            b = (s22 * r1 - s12 * r2) / det;
            d = -(s11 * r2 - s12 * r1) / det;  // model is b - d g
        }
        double sse = 0.0;
        for (size_t i = 0; i < delays_fs.size(); ++i) {
            const double gdip = std::exp(-0.5 * delays_fs[i] * delays_fs[i] / (w * w));
            const double e = curve.rate[i] - (b - d * gdip);
            sse += e * e;
        }
        return sse;
    };
    const double span = std::max(std::abs(dmin), std::abs(dmax));
    double best_w = span / 10.0, best_sse = 1e300, bb = 0.5, bd = 0.0;
    for (int i = 0; i < 60; ++i) {
        const double w = span * std::pow(10.0, -2.5 + 2.5 * i / 59.0);
        double b, d;
        const double sse = sse_for(w, b, d);
        if (sse < best_sse) {
            best_sse = sse;
            best_w = w;
            bb = b;
            bd = d;
        }
    }
    {  // golden-section refinement around the best scanned width
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        double lo = best_w / 2.0, hi = best_w * 2.0;
        for (int i = 0; i < 60; ++i) {
            const double m1 = hi - gr * (hi - lo), m2 = lo + gr * (hi - lo);
            double b1, d1, b2, d2;
            if (sse_for(m1, b1, d1) < sse_for(m2, b2, d2)) hi = m2;
            else lo = m1;
        }
        double b, d;
        if (sse_for(0.5 * (lo + hi), b, d) <= best_sse) {
            best_w = 0.5 * (lo + hi);
            bb = b;
            bd = d;
        }
    }
    curve.fit.reserve(delays_fs.size());
    double fit_max = -1e300, fit_min = 1e300;
    for (double tau : delays_fs) {
        const double f =
            bb - bd * std::exp(-0.5 * tau * tau / (best_w * best_w));
        curve.fit.push_back(f);
        fit_max = std::max(fit_max, f);
        fit_min = std::min(fit_min, f);
    }
    curve.baseline = bb;
    curve.dip_rate = bb - bd;
    curve.visibility =
        fit_max > 0.0 ? std::min(1.0, std::max(0.0, (fit_max - fit_min) / fit_max))
                      : 0.0;
    return curve;
}

// Interference visibility of two *independently heralded* photons, one from
// each of two identical sources: V = Tr(rho_s rho_i) with rho_s, rho_i the
// reduced spectral states. For an exchange-symmetric joint amplitude this
// equals the heralded purity sum lambda_k^2 — the quantity the paired-photon
// dip above cannot see (its tau=0 overlap is always 1 by symmetry).
inline double heralded_hom_visibility(const JointSpectralAmplitude& jsa) {
    const Eigen::MatrixXcd f = jsa.amplitude;
    const Eigen::MatrixXcd rho_s = f * f.adjoint();
    const Eigen::MatrixXcd rho_i = f.transpose() * f.conjugate();
    return (rho_s * rho_i).trace().real();
}

// Accidental-floor correction of a measured dip visibility. The flat
// background-to-signal ratio from double-pair events is 2 p2 / p1 (each
// double pair contributes two accidental pairings per true heralded pair).
struct NoiseSubtraction {
    double v_raw = 0.0;
    double floor_ratio = 0.0;  // background / signal at the baseline
    double v_subtracted = 0.0;
};

inline NoiseSubtraction noise_subtracted_visibility(double v_raw, double p1,
                                                    double p2, double p3 = 0.0) {
    if (v_raw < 0.0 || v_raw > 1.0)
        throw std::invalid_argument("raw visibility must lie in [0, 1]");
    if (!(1.0 >= p1 && p1 >= p2 && p2 >= p3 && p3 >= 0.0))
        throw std::invalid_argument(
            "pair probabilities must satisfy 1 >= p1 >= p2 >= p3 >= 0");
    NoiseSubtraction r;
    r.v_raw = v_raw;
    r.floor_ratio = p1 > 0.0 ? 2.0 * p2 / p1 : 0.0;
    r.v_subtracted = v_raw * (1.0 + r.floor_ratio);
    if (r.v_subtracted > 1.0 + 1e-9)
        throw std::domain_error(
            "accidental floor exceeds the observed dip depth");
    r.v_subtracted = std::min(1.0, r.v_subtracted);
    return r;
}

}  // namespace qpol

// Acceptance gate: nine release criteria, one PASS/FAIL line each.
// Exits nonzero if any criterion fails. Tolerances are pinned here on
// purpose — do not loosen them to make a regression pass.

#include "qpol/io.hpp"

#include "test_support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

using namespace qpol;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct Outcome {
    bool ok = false;
    std::string detail;
};

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, pattern, a, b, c);
    return buf;
}

double wrap_deg(double d) {
    while (d > 180.0) d -= 360.0;
    while (d < -180.0) d += 360.0;
    return d;
}

// Third-harmonic amplitude/phase of the order-3 central moment around the
// equator plus the largest pointwise deviation from a pure A sin(3 phi + d)
// model; m equatorial samples.
struct EquatorHarmonic {
    double amplitude = 0.0;
    double max_model_residual = 0.0;
    double max_symmetry_residual = 0.0;
};

EquatorHarmonic equator_third_harmonic(const DensityOperator& rho, int m = 720) {
    std::vector<double> f(static_cast<size_t>(m));
    Complex c3(0.0, 0.0);
    for (int k = 0; k < m; ++k) {
        const double phi = 2.0 * kPi * k / m;
        f[size_t(k)] = moment_along(rho, equatorial_direction(phi), 3);
        c3 += f[size_t(k)] * std::exp(Complex(0.0, -3.0 * phi));
    }
    EquatorHarmonic res;
    res.amplitude = 2.0 * std::abs(c3) / m;
    const double delta = std::arg(c3) + kPi / 2.0;
    for (int k = 0; k < m; ++k) {
        const double phi = 2.0 * kPi * k / m;
        const double model = res.amplitude * std::sin(3.0 * phi + delta);
        res.max_model_residual =
            std::max(res.max_model_residual, std::abs(f[size_t(k)] - model));
        const double shifted = f[size_t((k + m / 3) % m)];
        res.max_symmetry_residual =
            std::max(res.max_symmetry_residual, std::abs(f[size_t(k)] - shifted));
    }
    return res;
}

const std::vector<std::pair<std::string, PolarizationClass>>& representatives() {
    static const std::vector<std::pair<std::string, PolarizationClass>> table = {
        {"identity_quarter", PolarizationClass::OOO},
        {"oox_mix", PolarizationClass::OOX},
        {"oxo_mix", PolarizationClass::OXO},
        {"noon3", PolarizationClass::OXX},
        {"xox_mix", PolarizationClass::XOX},
        {"h3", PolarizationClass::XXX}};
    return table;
}

// --- criterion 1: operator algebra ------------------------------------------------

Outcome criterion_algebra() {
    const auto t0 = Clock::now();
    double worst = 0.0;
    for (int n = 1; n <= 6; ++n) {
        const StokesSet s = stokes_operators(n);
        const Complex two_i(0.0, 2.0);
        for (int j = 1; j <= 3; ++j) {
            const int k = j % 3 + 1, l = k % 3 + 1;
            const Matrix comm = s[j] * s[k] - s[k] * s[j];
            worst = std::max(worst, (comm - two_i * s[l]).cwiseAbs().maxCoeff());
            worst = std::max(worst,
                             (s[0] * s[j] - s[j] * s[0]).cwiseAbs().maxCoeff());
        }
        const Matrix casimir = s[1] * s[1] + s[2] * s[2] + s[3] * s[3];
        const Matrix expected =
            double(n) * double(n + 2) * Matrix::Identity(n + 1, n + 1);
        worst = std::max(worst, (casimir - expected).cwiseAbs().maxCoeff());
    }
    const double ms = ms_since(t0);
    return {worst <= 1e-10 && ms < 1000.0,
            fmt("max residual %.2e over N=1..6, %.0f ms (limit 1e-10, 1000 ms)",
                worst, ms)};
}

// --- criterion 2: classification table --------------------------------------------

Outcome criterion_classes() {
    const auto t0 = Clock::now();
    int correct = 0;
    std::string mismatch;
    for (const auto& [name, expected] : representatives()) {
        const PolarizationClass got =
            classify(named_state(name), ToleranceProfile::exact());
        if (got == expected) ++correct;
        else mismatch += " " + name + "->" + to_string(got);
    }
    const double ms = ms_since(t0);
    std::string detail =
        fmt("%.0f/6 classes exact, %.0f ms (limit 1000 ms)", correct, ms);
    if (!mismatch.empty()) detail += ";" + mismatch;
    return {correct == 6 && ms < 1000.0, detail};
}

// --- criterion 3: published moment values -----------------------------------------

Outcome criterion_reference_moments() {
    const double tol = 1e-9;
    double worst = 0.0;
    const auto check = [&](double got, double want) {
        worst = std::max(worst, std::abs(got - want));
    };

    const MomentTensors iq = moment_tensors(named_state("identity_quarter"));
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) check(iq.cov(a, b), a == b ? 5.0 : 0.0);
    check(variance_sum(named_state("identity_quarter")), 15.0);

    const MomentTensors noon = moment_tensors(named_state("noon3"));
    check(noon.cov(0, 0), 3.0);
    check(noon.cov(1, 1), 3.0);
    check(noon.cov(2, 2), 9.0);

    const MomentTensors oxo = moment_tensors(named_state("oxo_mix"));
    check(oxo.cov(0, 0), 3.0);
    check(oxo.cov(1, 1), 3.0);
    check(oxo.cov(2, 2), 9.0);
    double skew_max = 0.0;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c)
                skew_max = std::max(skew_max, std::abs(oxo.skew(a, b, c)));
    worst = std::max(worst, skew_max);

    // |3,0> saturates the equatorial variance equality at N = 3
    const DensityOperator h3 = named_state("h3");
    for (int k = 0; k < 64; ++k)
        check(moment_along(h3, equatorial_direction(2.0 * kPi * k / 64), 2), 3.0);

    // variance-sum bounds over 1000 random three-photon states
    Rng rng(20260815);
    int inside = 0;
    for (int i = 0; i < 1000; ++i) {
        const DensityOperator rho =
            i % 2 == 0 ? DensityOperator::pure(qpol_test::random_pure(3, rng))
                       : qpol_test::random_density(3, rng);
        const double sum = variance_sum(rho);
        if (sum >= 6.0 - tol && sum <= 15.0 + tol) ++inside;
    }
    return {worst <= tol && inside == 1000,
            fmt("max deviation %.2e (tol 1e-9), %.0f/1000 random states within "
                "[6,15]",
                worst, double(inside))};
}

// --- criterion 4: NOON equatorial skewness ------------------------------------------

Outcome criterion_noon_skewness() {
    const DensityOperator noon = named_state("noon3");
    const EquatorHarmonic h = equator_third_harmonic(noon);

    // independent oracle: direct matrix powers of S_n - <S_n>
    const StokesSet s = stokes_operators(3);
    double oracle_gap = 0.0;
    for (int k = 0; k < 16; ++k) {
        const Vec3 n = equatorial_direction(2.0 * kPi * k / 16 + 0.1);
        const Matrix sn = stokes_component(s, n);
        const double mean = (noon.matrix * sn).trace().real();
        const Matrix d = sn - mean * Matrix::Identity(4, 4);
        const double direct = (noon.matrix * d * d * d).trace().real();
        oracle_gap = std::max(oracle_gap,
                              std::abs(direct - moment_along(noon, n, 3)));
    }

    const bool ok = std::abs(h.amplitude - 6.0) <= 1e-9 &&
                    h.max_model_residual <= 1e-9 &&
                    h.max_symmetry_residual <= 1e-9 && oracle_gap <= 1e-10;
    return {ok,
            fmt("amplitude 6%+.2e, sine-model residual %.2e, 3-fold symmetry "
                "residual %.2e",
                h.amplitude - 6.0, h.max_model_residual,
                h.max_symmetry_residual) +
                fmt(", matrix-power oracle gap %.2e", oracle_gap)};
}

// --- criterion 5: preparation chain ---------------------------------------------------

Outcome criterion_preparation() {
    const double phi_deg = -85.7;
    const double phi = deg2rad(phi_deg);
    double worst = 0.0;
    const auto check_c = [&](const Complex& got, const Complex& want) {
        worst = std::max(worst, std::abs(got - want));
    };
    const auto check = [&](double got, double want) {
        worst = std::max(worst, std::abs(got - want));
    };

    // plain double-pair input through the PPBS: three surviving monomials
    const MultimodeState plain =
        apply_element(initial_state(), OpticalElement::ppbs(phi_deg));
    check_c(plain.monomial_coefficient({2, 0, 0, 2}), Complex(1.0 / 3.0, 0.0));
    check_c(plain.monomial_coefficient({1, 0, 1, 2}),
            std::sqrt(2.0) / 3.0 * std::exp(Complex(0.0, phi)));
    check_c(plain.monomial_coefficient({0, 0, 2, 2}),
            std::exp(Complex(0.0, 2.0 * phi)) / 6.0);

    // rotated input: the two heralded-branch monomials
    const MultimodeState rotated = apply_element(
        apply_element(initial_state(), OpticalElement::hwp(22.5)),
        OpticalElement::ppbs(phi_deg));
    check_c(rotated.monomial_coefficient({1, 0, 3, 0}),
            std::sqrt(2.0) / 18.0 * std::exp(Complex(0.0, 3.0 * phi)));
    check_c(rotated.monomial_coefficient({1, 0, 1, 2}),
            -std::sqrt(2.0) / 6.0 * std::exp(Complex(0.0, phi)));

    // heralding the plain input: |1,2> at probability 4/9
    const HeraldedState h_plain = ppbs_and_herald(initial_state(), phi_deg);
    check(h_plain.probability, 4.0 / 9.0);
    check(fidelity(h_plain.state, PureState::basis_state(1, 2)), 1.0);

    // heralding the rotated input: coefficient ratio -(1/3) e^{2 i phi}
    const HeraldedState h_rot =
        ppbs_and_herald(apply_element(initial_state(), OpticalElement::hwp(22.5)),
                        phi_deg);
    check(h_rot.probability, 4.0 / 27.0);
    const Complex c30 = h_rot.state.amplitudes(0) / std::sqrt(factorial_d(3));
    const Complex c12 = h_rot.state.amplitudes(2) / std::sqrt(factorial_d(2));
    check_c(c30 / c12, -std::exp(Complex(0.0, 2.0 * phi)) / 3.0);

    // finishing waveplates produce the NOON state
    const HeraldedState noon = finish_state(h_rot, 45.0, phi_deg / 4.0);
    check(fidelity(named_state("noon3"), noon.state), 1.0);

    // polarizer post-selection takes half the branch each way
    const HeraldedState lp_h = post_select_lp(noon, 0.0);
    const HeraldedState lp_v = post_select_lp(noon, 90.0);
    check(lp_h.probability / noon.probability, 0.5);
    check(lp_v.probability / noon.probability, 0.5);
    check(fidelity(lp_h.state, PureState::basis_state(3, 0)), 1.0);
    check(fidelity(lp_v.state, PureState::basis_state(0, 3)), 1.0);

    return {worst <= 1e-9,
            fmt("max deviation %.2e across coefficients, herald "
                "probabilities, NOON fidelity and LP split (tol 1e-9)",
                worst)};
}

// --- criterion 6: phase calibration --------------------------------------------------

Outcome criterion_calibration() {
    const double phi_true = -85.7;
    const auto grid = default_calibration_grid(64);
    const double grid_step = 90.0 / 64.0;

    const PhaseCalibration clean = calibrate_phase(phi_true, grid, 0, 1);
    const double clean_err = std::abs(wrap_deg(clean.phi_est_deg - phi_true));

    int hits = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const PhaseCalibration noisy = calibrate_phase(phi_true, grid, 10000, seed);
        if (std::abs(wrap_deg(noisy.phi_est_deg - phi_true)) <= 1.0) ++hits;
    }
    return {clean_err <= grid_step && hits >= 95,
            fmt("noiseless error %.2e deg (limit %.3f), noisy hits "
                "%.0f/100 within 1 deg (need 95)",
                clean_err, grid_step, double(hits))};
}

// --- criterion 7: tomography ----------------------------------------------------------

Outcome criterion_tomography() {
    const auto t0 = Clock::now();
    const auto settings = default_settings();

    double min_exact = 1.0;
    bool monotone = true;
    const auto monotone_ok = [&](const std::vector<double>& h) {
        for (size_t i = 1; i < h.size(); ++i)
            if (h[i] + 1e-12 * (1.0 + std::abs(h[i])) < h[i - 1]) return false;
        return true;
    };

    for (const auto& [name, cls] : representatives()) {
        (void)cls;
        const DensityOperator rho = named_state(name);
        std::vector<Eigen::Vector4d> probs;
        for (const auto& s : settings) probs.push_back(born_probabilities(rho, s));
        const ReconstructionResult res = mle_from_probabilities(settings, probs);
        min_exact = std::min(min_exact, fidelity(res.rho_hat, rho));
        monotone = monotone && monotone_ok(res.likelihood_history);
    }

    int worst_state_hits = 50;
    double min_noisy = 1.0;
    for (const auto& [name, cls] : representatives()) {
        (void)cls;
        const DensityOperator rho = named_state(name);
        int hits = 0;
        for (std::uint64_t seed = 1; seed <= 50; ++seed) {
            const auto records = simulate_counts(rho, settings, 10000, seed);
            const ReconstructionResult res = mle_reconstruct(records);
            const double fid = fidelity(res.rho_hat, rho);
            min_noisy = std::min(min_noisy, fid);
            if (fid >= 0.99) ++hits;
            monotone = monotone && monotone_ok(res.likelihood_history);
        }
        worst_state_hits = std::min(worst_state_hits, hits);
    }
    const double ms = ms_since(t0);
    const bool ok = min_exact >= 1.0 - 1e-6 && worst_state_hits >= 48 &&
                    monotone && ms < 60000.0;
    char detail[256];
    std::snprintf(detail, sizeof detail,
                  "exact-input min fidelity 1%+.2e, worst-state noisy hits "
                  "%d/50 (need 48), min noisy fidelity %.4f, likelihood "
                  "monotone: %s, %.0f ms (limit 60000)",
                  min_exact - 1.0, worst_state_hits, min_noisy,
                  monotone ? "yes" : "NO", ms);
    return {ok, detail};
}

// --- criterion 8: spectral purification ------------------------------------------------

Outcome criterion_spectral() {
    const JointSpectralAmplitude jsa = build_jsa();
    const FilteredJsa filtered = apply_filters(jsa, FilterSpec{}, FilterSpec{});
    const SchmidtResult sch = schmidt(filtered.jsa);
    const HomCurve curve = hom_curve(filtered.jsa, default_delays());
    const double identity_gap =
        std::abs(heralded_hom_visibility(filtered.jsa) - sch.heralded_purity);
    const bool ok = sch.schmidt_number <= 1.05 && curve.visibility >= 0.99 &&
                    identity_gap <= 1e-6;
    return {ok, fmt("filtered K %.4f (limit 1.05), dip visibility %.4f "
                    "(need 0.99), visibility-purity gap %.2e (tol 1e-6)",
                    sch.schmidt_number, curve.visibility, identity_gap)};
}

// --- criterion 9: sensitivity to admixture ----------------------------------------------

Outcome criterion_sensitivity() {
    const double eps = 0.05;
    const DensityOperator noon = named_state("noon3");
    const DensityOperator mixed(
        3, (1.0 - eps) * noon.matrix + eps * Matrix::Identity(4, 4) / 4.0);

    const double fid = fidelity(mixed, noon);
    const double fid_gap = std::abs(fid - (1.0 - 0.75 * eps));

    const double amp = equator_third_harmonic(mixed).amplitude;
    const double amp_gap = std::abs(amp - 6.0 * (1.0 - eps));

    const bool ok = fid_gap <= 1e-9 && amp_gap <= 1e-9;
    return {ok, fmt("fidelity %.6f (analytic 0.9625, gap %.2e), ", fid, fid_gap) +
                    fmt("equatorial amplitude %.6f (analytic 5.7, gap %.2e)",
                        amp, amp_gap)};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"operator algebra N=1..6", criterion_algebra},
        {"six-class regression", criterion_classes},
        {"reference moment values", criterion_reference_moments},
        {"NOON equatorial skewness", criterion_noon_skewness},
        {"preparation chain", criterion_preparation},
        {"phase calibration", criterion_calibration},
        {"tomography", criterion_tomography},
        {"spectral purification", criterion_spectral},
        {"admixture sensitivity", criterion_sensitivity}};

    int failures = 0;
    for (size_t i = 0; i < criteria.size(); ++i) {
        Outcome out;
        try {
            out = criteria[i].second();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        if (!out.ok) ++failures;
        std::printf("[%zu] %s  %s: %s\n", i + 1, out.ok ? "PASS" : "FAIL",
                    criteria[i].first.c_str(), out.detail.c_str());
    }
    std::printf("acceptance: %zu/%zu criteria passed\n",
                criteria.size() - size_t(failures), criteria.size());
    return failures == 0 ? 0 : 1;
}

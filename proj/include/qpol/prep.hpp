#pragma once

// Heralded three-photon state preparation: the linear-optics chain that turns
// a double-pair |2,2> input into |1,2>, |2,1>, |3,0>/|0,3> and NOON states
// via a partially-polarizing beamsplitter (PPBS), waveplates, a polarizer and
// a single-photon herald — plus PPBS phase calibration, the named reference
// states and pair-rate noise bookkeeping.

#include "qpol/fock.hpp"
#include "qpol/rng.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace qpol {

// Occupation of the four optical modes (n_aH, n_aV, n_bH, n_bV).
using Occupation = std::array<int, 4>;

// Sparse amplitude map over fixed-total-photon occupations of two spatial
// modes x two polarizations. Norm may drop below 1 after a projective
// element; the deficit is the discarded probability.
struct MultimodeState {
    std::map<Occupation, Complex> amplitudes;

    int photons() const {
        if (amplitudes.empty()) throw std::runtime_error("empty multimode state");
        int total = -1;
        for (const auto& [occ, amp] : amplitudes) {
            const int t = occ[0] + occ[1] + occ[2] + occ[3];
            if (total == -1) total = t;
            if (t != total)
                throw std::runtime_error("inconsistent photon number across amplitudes");
        }
        return total;
    }

    double norm2() const {
        double s = 0.0;
        for (const auto& [occ, amp] : amplitudes) s += std::norm(amp);
        return s;
    }

    Complex amplitude(const Occupation& occ) const {
        const auto it = amplitudes.find(occ);
        return it == amplitudes.end() ? Complex(0.0, 0.0) : it->second;
    }

    // Coefficient of the creation-operator monomial prod_i (a_i^dag)^{n_i}
    // in the unnormalized polynomial representation: amp / sqrt(prod n_i!).
    Complex monomial_coefficient(const Occupation& occ) const {
        double f = 1.0;
        for (int n : occ) f *= factorial_d(n);
        return amplitude(occ) / std::sqrt(f);
    }

    void prune(double eps = 1e-14) {
        for (auto it = amplitudes.begin(); it != amplitudes.end();)
            it = std::abs(it->second) < eps ? amplitudes.erase(it) : std::next(it);
    }
};

// Double-pair input |2,2>_{H,V} in spatial mode b (the chain's input arm);
// equals (1/2) a_H^dag^2 a_V^dag^2 |0> as a monomial.
inline MultimodeState initial_state() {
    MultimodeState s;
    s.amplitudes[{0, 0, 2, 2}] = 1.0;
    return s;
}

// Creation-operator substitution a_i^dag -> sum_j M(j,i) a_j^dag, expanded
// multinomially. Unitary M preserves the norm; projective M does not.
inline MultimodeState apply_mode_matrix(const MultimodeState& s,
                                        const Eigen::Matrix4cd& m) {
    MultimodeState out;
    for (const auto& [occ, amp] : s.amplitudes) {
        // polynomial in the output creation operators, seeded with the
        // monomial coefficient of this input term
        std::map<Occupation, Complex> poly;
        poly[{0, 0, 0, 0}] = s.monomial_coefficient(occ);
        for (int i = 0; i < 4; ++i) {
            for (int rep = 0; rep < occ[size_t(i)]; ++rep) {
                std::map<Occupation, Complex> next;
                for (const auto& [t, c] : poly) {
                    for (int j = 0; j < 4; ++j) {
                        if (m(j, i) == Complex(0.0, 0.0)) continue;
                        Occupation u = t;
                        ++u[size_t(j)];
                        next[u] += c * m(j, i);
                    }
                }
                poly.swap(next);
            }
        }
        for (const auto& [t, c] : poly) {
            double f = 1.0;
            for (int n : t) f *= factorial_d(n);
            out.amplitudes[t] += c * std::sqrt(f);
        }
    }
    out.prune();
    return out;
}

enum class SpatialMode { a, b };

enum class ElementKind { hwp, qwp, ppbs, pbs_merge, lp };

// One element of the preparation chain, reducible to a linear transform of
// the four creation operators (a projector for the LP).
struct OpticalElement {
    ElementKind kind = ElementKind::hwp;
    SpatialMode mode = SpatialMode::b;  // arm holding a waveplate or LP
    double angle_deg = 0.0;             // waveplate / LP axis
    double phi_deg = 0.0;               // PPBS reflection phase on H

    static OpticalElement hwp(double angle_deg, SpatialMode mode = SpatialMode::b) {
        return {ElementKind::hwp, mode, angle_deg, 0.0};
    }
    static OpticalElement qwp(double angle_deg, SpatialMode mode = SpatialMode::b) {
        return {ElementKind::qwp, mode, angle_deg, 0.0};
    }
    static OpticalElement ppbs(double phi_deg) {
        return {ElementKind::ppbs, SpatialMode::b, 0.0, phi_deg};
    }
    static OpticalElement pbs_merge() {
        return {ElementKind::pbs_merge, SpatialMode::b, 0.0, 0.0};
    }
    static OpticalElement lp(double angle_deg, SpatialMode mode = SpatialMode::b) {
        return {ElementKind::lp, mode, angle_deg, 0.0};
    }

    bool is_unitary() const { return kind != ElementKind::lp; }

    // 4x4 mode matrix over (aH, aV, bH, bV).
    Eigen::Matrix4cd mode_matrix() const {
        Eigen::Matrix4cd m = Eigen::Matrix4cd::Identity();
        const int off = mode == SpatialMode::a ? 0 : 2;
        switch (kind) {
            case ElementKind::hwp:
                m.block<2, 2>(off, off) = half_wave_plate(angle_deg).matrix;
                return m;
            case ElementKind::qwp:
                m.block<2, 2>(off, off) = quarter_wave_plate(angle_deg).matrix;
                return m;
            case ElementKind::ppbs: {
                // |r_H|^2 = 1/3, |t_H|^2 = 2/3, |r_V| = 1 (V never crosses
                // arms); the reflected H amplitudes carry the phase phi
                // relative to reflected V. Real symmetric H crossing block.
                const double phi = deg2rad(phi_deg);
                const Complex eip = std::exp(Complex(0.0, phi));
                m.setZero();
                m(0, 0) = -std::exp(Complex(0.0, -phi)) / std::sqrt(3.0);  // aH -> aH
                m(2, 0) = std::sqrt(2.0 / 3.0);                            // aH -> bH
                m(0, 2) = std::sqrt(2.0 / 3.0);                            // bH -> aH
                m(2, 2) = eip / std::sqrt(3.0);                            // bH -> bH
                m(1, 1) = -1.0;                                            // aV -> aV
                m(3, 3) = 1.0;                                             // bV -> bV
                return m;
            }
            case ElementKind::pbs_merge:
                // H transmits (stays in its arm), V reflects (crosses arms).
                m.setZero();
                m(0, 0) = 1.0;
                m(2, 2) = 1.0;
                m(3, 1) = 1.0;
                m(1, 3) = 1.0;
                return m;
            case ElementKind::lp: {
                // per-photon projector |chi><chi| on that arm
                const double a = deg2rad(angle_deg);
                Eigen::Matrix2cd p;
                p << std::cos(a) * std::cos(a), std::cos(a) * std::sin(a),
                     std::sin(a) * std::cos(a), std::sin(a) * std::sin(a);
                m.block<2, 2>(off, off) = p;
                return m;
            }
        }
        throw std::logic_error("unreachable");
    }
};

inline MultimodeState apply_element(const MultimodeState& s, const OpticalElement& e) {
    const Eigen::Matrix4cd m = e.mode_matrix();
    if (e.is_unitary() &&
        (m.adjoint() * m - Eigen::Matrix4cd::Identity()).cwiseAbs().maxCoeff() > 1e-10)
        throw std::logic_error("element mode matrix lost unitarity");
    return apply_mode_matrix(s, m);
}

// Normalized conditional state plus the probability of the heralding branch;
// probability + discarded_probability = 1.
struct HeraldedState {
    double probability = 0.0;
    double discarded_probability = 0.0;
    PureState state;
};

// Project onto the exactly-one-photon-in-arm-a branch and strip the herald
// photon. The herald must be H-polarized (V never crosses into arm a for
// chain inputs confined to arm b); a V-polarized herald amplitude indicates
// a chain this helper does not model.
inline HeraldedState herald_single_in_a(const MultimodeState& s) {
    const int total = s.photons();
    if (total < 2)
        throw std::invalid_argument("need at least two photons to herald one");
    const int n = total - 1;
    Vector amps = Vector::Zero(n + 1);
    double branch = 0.0;
    for (const auto& [occ, amp] : s.amplitudes) {
        if (occ[0] + occ[1] != 1) continue;
        if (occ[1] == 1) {
            if (std::abs(amp) > 1e-12)
                throw std::runtime_error("herald photon is not H-polarized");
            continue;
        }
        branch += std::norm(amp);
        amps(occ[3]) += amp;  // ket index = n_bV
    }
    if (branch < 1e-12) throw std::runtime_error("zero-probability herald");
    HeraldedState h{branch, 1.0 - branch, PureState(n, amps / std::sqrt(branch))};
    return h;
}

inline HeraldedState ppbs_and_herald(const MultimodeState& s, double phi_deg) {
    return herald_single_in_a(apply_element(s, OpticalElement::ppbs(phi_deg)));
}

// Finishing waveplates on the heralded arm: QWP1 then HWP2.
inline HeraldedState finish_state(const HeraldedState& h, double qwp1_deg,
                                  double hwp2_deg) {
    const Eigen::Matrix2cd w =
        half_wave_plate(hwp2_deg).matrix * quarter_wave_plate(qwp1_deg).matrix;
    return {h.probability, h.discarded_probability,
            evolve(h.state, lift_mode_unitary(w, h.state.photons))};
}

// N-photon coherent ket |chi^N> for the unit Jones vector chi.
inline PureState polarizer_ket(int photons, const Eigen::Vector2cd& chi) {
    FockBasis basis(photons);
    Vector amps(basis.dimension());
    for (int i = 0; i < basis.dimension(); ++i) {
        const int nh = basis.n_h(i), nv = basis.n_v(i);
        const double binom =
            factorial_d(photons) / (factorial_d(nh) * factorial_d(nv));
        amps(i) = std::sqrt(binom) * std::pow(chi(0), nh) * std::pow(chi(1), nv);
    }
    return PureState(photons, amps);
}

// Project every photon of the heralded state onto the LP axis. On the
// symmetric subspace the projector is rank one, |chi^N><chi^N|, so the
// survivor is the coherent ket and the success probability |<chi^N|psi>|^2
// multiplies the herald probability.
inline HeraldedState post_select_lp(const HeraldedState& h, double lp_angle_deg) {
    const double a = deg2rad(lp_angle_deg);
    Eigen::Vector2cd chi;
    chi << std::cos(a), std::sin(a);
    const PureState axis = polarizer_ket(h.state.photons, chi);
    const Complex c = axis.overlap(h.state);
    const double cond = std::norm(c);
    if (cond < 1e-12) throw std::runtime_error("zero-probability projection");
    const double prob = h.probability * cond;
    PureState out(axis.photons, (c / std::abs(c)) * axis.amplitudes);
    return {prob, 1.0 - prob, out};
}

// Run an ordered element chain on a multimode input. The single PPBS in the
// chain triggers the herald; earlier elements act on the 4-mode state and
// later waveplates / an LP act on the heralded arm b.
inline HeraldedState run_chain(const MultimodeState& input,
                               const std::vector<OpticalElement>& elements) {
    MultimodeState s = input;
    bool heralded = false;
    HeraldedState h{0.0, 1.0, PureState::basis_state(1, 0)};
    for (const auto& e : elements) {
        if (!heralded) {
            if (e.kind == ElementKind::ppbs) {
                h = ppbs_and_herald(s, e.phi_deg);
                heralded = true;
            } else {
                s = apply_element(s, e);
            }
            continue;
        }
        switch (e.kind) {
            case ElementKind::hwp:
            case ElementKind::qwp: {
                if (e.mode != SpatialMode::b)
                    throw std::invalid_argument(
                        "post-herald waveplates must sit in arm b");
                const ModeUnitary u = e.kind == ElementKind::hwp
                                          ? half_wave_plate(e.angle_deg)
                                          : quarter_wave_plate(e.angle_deg);
                h.state = evolve(h.state, lift_mode_unitary(u, h.state.photons));
                break;
            }
            case ElementKind::lp:
                if (e.mode != SpatialMode::b)
                    throw std::invalid_argument("post-herald LP must sit in arm b");
                h = post_select_lp(h, e.angle_deg);
                break;
            default:
                throw std::invalid_argument(
                    "only waveplates and an LP may follow the heralding PPBS");
        }
    }
    if (!heralded)
        throw std::invalid_argument("chain contains no heralding PPBS");
    return h;
}

// --- PPBS phase calibration --------------------------------------------------

struct CalibrationSample {
    double theta_deg = 0.0;    // HWP2 setting
    double probability = 0.0;  // exact coincidence probability
    double observed = 0.0;     // counts (noisy) or probability (noiseless)
};

struct PhaseCalibration {
    double phi_true_deg = 0.0;
    double phi_est_deg = 0.0;
    double theta_min_deg = 0.0;  // fitted fringe minimum; phi_est = 4 * theta_min
    long long shots = 0;
    std::uint64_t seed = 0;
    std::vector<CalibrationSample> samples;
};

inline std::vector<double> default_calibration_grid(int points = 64) {
    if (points < 3) throw std::invalid_argument("grid needs at least 3 points");
    std::vector<double> grid(points);
    for (int i = 0; i < points; ++i) grid[size_t(i)] = -45.0 + 90.0 * i / points;
    return grid;
}

// Coincidence probability of the calibration arrangement: a single SPDC pair
// |1,1> in arm b, HWP1 at 15 deg, PPBS herald, QWP1 at 45 deg, HWP2 at theta,
// projection onto (|H> - |V>)/sqrt(2). Analytically sin^2((phi - 4 theta)/2)/3.
inline double calibration_probability(double phi_deg, double theta_deg) {
    MultimodeState pair;
    pair.amplitudes[{0, 0, 1, 1}] = 1.0;
    const MultimodeState rotated = apply_element(pair, OpticalElement::hwp(15.0));
    const HeraldedState h = ppbs_and_herald(rotated, phi_deg);
    const HeraldedState out = finish_state(h, 45.0, theta_deg);
    Vector proj(2);
    proj << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0);
    const Complex amp = proj.dot(out.state.amplitudes);
    return out.probability * std::norm(amp);
}

// Simulate the calibration fringe over the HWP2 grid (Poisson counts when
// shots > 0, exact probabilities otherwise) and locate the minimizing theta
// of the fitted fringe beta0 + beta1 cos(4 theta) + beta2 sin(4 theta).
// The fringe is proportional to sin^2((phi - 4 theta)/2), so the minimizer
// yields the phase estimate phi_hat = 4 * theta_min.
inline PhaseCalibration calibrate_phase(double true_phi_deg,
                                        const std::vector<double>& theta_grid_deg,
                                        long long shots = 0, std::uint64_t seed = 1) {
    if (theta_grid_deg.empty()) throw std::invalid_argument("empty theta grid");
    if (theta_grid_deg.size() < 3)
        throw std::invalid_argument("theta grid needs at least 3 settings");
    PhaseCalibration cal;
    cal.phi_true_deg = true_phi_deg;
    cal.shots = shots;
    cal.seed = seed;
    Rng rng(seed);
    Eigen::MatrixXd design(long(theta_grid_deg.size()), 3);
    Eigen::VectorXd y(long(theta_grid_deg.size()));
    for (size_t i = 0; i < theta_grid_deg.size(); ++i) {
        const double theta = theta_grid_deg[i];
        const double p = calibration_probability(true_phi_deg, theta);
        CalibrationSample sample;
        sample.theta_deg = theta;
        sample.probability = p;
        sample.observed =
            shots > 0 ? double(poisson_draw(rng, double(shots) * p)) : p;
        cal.samples.push_back(sample);
        const double t4 = deg2rad(4.0 * theta);
        design(long(i), 0) = 1.0;
        design(long(i), 1) = std::cos(t4);
        design(long(i), 2) = std::sin(t4);
        y(long(i)) = sample.observed;
    }
    const Eigen::Vector3d beta = design.colPivHouseholderQr().solve(y);
    // model: A/2 (1 - cos(phi - 4 theta)) => beta1 = -A/2 cos(phi),
    // beta2 = -A/2 sin(phi)
    cal.phi_est_deg = rad2deg(std::atan2(-beta(2), -beta(1)));
    cal.theta_min_deg = cal.phi_est_deg / 4.0;
    return cal;
}

// --- named reference states ---------------------------------------------------

// The nine named three-photon states used throughout: one representative per
// invariance class plus the individual basis kets.
inline DensityOperator named_state(const std::string& name) {
    const auto ket = [](int nh, int nv) { return PureState::basis_state(nh, nv); };
    const auto mix = [&](std::vector<std::pair<double, PureState>> parts) {
        Matrix m = Matrix::Zero(4, 4);
        for (const auto& [w, psi] : parts)
            m += w * (psi.amplitudes * psi.amplitudes.adjoint());
        return DensityOperator(3, m);
    };
    if (name == "identity_quarter")
        return DensityOperator(3, Matrix::Identity(4, 4) / 4.0);
    if (name == "ooxt_mix" || name == "oox_mix")  // oox_mix accepted as an alias
        return mix({{1.0 / 3.0, ket(3, 0)}, {1.0 / 2.0, ket(1, 2)}, {1.0 / 6.0, ket(0, 3)}});
    if (name == "oxo_mix")
        return mix({{0.5, ket(3, 0)}, {0.5, ket(0, 3)}});
    if (name == "noon3") {
        Vector v = Vector::Zero(4);
        v(0) = 1.0 / std::sqrt(2.0);
        v(3) = Complex(0.0, -1.0 / std::sqrt(2.0));
        return DensityOperator::pure(PureState(3, v));
    }
    if (name == "xox_mix")
        return mix({{19.0 / 36.0, ket(3, 0)}, {15.0 / 36.0, ket(1, 2)}, {2.0 / 36.0, ket(0, 3)}});
    if (name == "h3") return DensityOperator::pure(ket(3, 0));
    if (name == "v3") return DensityOperator::pure(ket(0, 3));
    if (name == "one_two") return DensityOperator::pure(ket(1, 2));
    if (name == "two_one") return DensityOperator::pure(ket(2, 1));
    throw std::invalid_argument("unknown state name: " + name);
}

inline const std::vector<std::string>& named_state_names() {
    static const std::vector<std::string> names = {
        "identity_quarter", "ooxt_mix", "oxo_mix", "noon3", "xox_mix",
        "h3", "v3", "one_two", "two_one"};
    return names;
}

// --- pair-rate bookkeeping -----------------------------------------------------

// Per-pulse emission probabilities of one, two and three SPDC pairs, with the
// derived heralded-signal and leading-noise rates. The scaling model is
// p_k proportional to (pump power)^k.
struct PairNoiseReport {
    double p1 = 0.0, p2 = 0.0, p3 = 0.0;
    double repetition_rate_hz = 80.0e6;
    double single_rate_hz = 0.0;
    double herald_signal_rate_hz = 0.0;  // fourfolds from double pairs
    double noise_rate_hz = 0.0;          // leading noise from triple pairs
    double snr = 0.0;                    // p2 / p3
    bool noise_free = false;             // p3 == 0
};

inline PairNoiseReport pair_noise_report(double p1, double p2, double p3,
                                         double repetition_rate_hz = 80.0e6) {
    if (!(1.0 >= p1 && p1 >= p2 && p2 >= p3 && p3 >= 0.0))
        throw std::invalid_argument(
            "pair probabilities must satisfy 1 >= p1 >= p2 >= p3 >= 0");
    if (repetition_rate_hz <= 0.0)
        throw std::invalid_argument("repetition rate must be positive");
    PairNoiseReport r;
    r.p1 = p1;
    r.p2 = p2;
    r.p3 = p3;
    r.repetition_rate_hz = repetition_rate_hz;
    r.single_rate_hz = repetition_rate_hz * p1;
    r.herald_signal_rate_hz = repetition_rate_hz * p2;
    r.noise_rate_hz = repetition_rate_hz * p3;
    r.noise_free = p3 == 0.0;
    r.snr = r.noise_free ? std::numeric_limits<double>::infinity() : p2 / p3;
    return r;
}

inline PairNoiseReport scale_pump(const PairNoiseReport& r, double pump_factor) {
    if (pump_factor < 0.0) throw std::invalid_argument("pump factor must be >= 0");
    return pair_noise_report(r.p1 * pump_factor, r.p2 * pump_factor * pump_factor,
                             r.p3 * pump_factor * pump_factor * pump_factor,
                             r.repetition_rate_hz);
}

}  // namespace qpol

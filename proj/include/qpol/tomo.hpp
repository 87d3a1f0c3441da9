#pragma once

// Sixteen-setting collective polarization tomography of three-photon states:
// waveplate settings, Born-rule outcome probabilities, multinomial count
// simulation, and iterative maximum-likelihood reconstruction (R rho R with
// a diluted fallback step).

#include "qpol/fock.hpp"
#include "qpol/moments.hpp"
#include "qpol/rng.hpp"
#include "qpol/sphere.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace qpol {

// One QWP2/HWP3/PBS analyzer configuration, with the Poincare direction it
// projects along (outcome (3,0) corresponds to all photons in the +direction
// eigenstate).
struct MeasurementSetting {
    double qwp2_deg = 0.0;
    double hwp3_deg = 0.0;
    Vec3 direction = Vec3(0.0, 0.0, 1.0);
};

// Analyzer Jones matrix: light passes the QWP, then the HWP, then an H/V PBS.
inline Eigen::Matrix2cd analyzer_matrix(const MeasurementSetting& s) {
    return half_wave_plate(s.hwp3_deg).matrix * quarter_wave_plate(s.qwp2_deg).matrix;
}

// Poincare direction an analyzer pair measures along: the Jones vector the
// analyzer maps onto |H> is the +n eigenstate, so n is its Stokes vector.
inline Vec3 direction_of_analyzer(double qwp2_deg, double hwp3_deg) {
    const Eigen::Matrix2cd j =
        half_wave_plate(hwp3_deg).matrix * quarter_wave_plate(qwp2_deg).matrix;
    const Eigen::Vector2cd chi = j.adjoint() * Eigen::Vector2cd(1.0, 0.0);
    const Complex z = std::conj(chi(0)) * chi(1);
    return Vec3(2.0 * z.real(), 2.0 * z.imag(), std::norm(chi(0)) - std::norm(chi(1)));
}

// Waveplate pair measuring along unit direction n: maps the +n Jones
// eigenvector to |H> and the -n one to |V> (up to phases). Closed form:
// QWP at q = atan2(n1, n3)/2 brings n into the S1-S3 plane, the HWP then
// rotates the great circle onto +S3.
inline MeasurementSetting setting_for_direction(const Vec3& n) {
    if (std::abs(n.norm() - 1.0) > 1e-9)
        throw std::invalid_argument("direction must be a unit vector");
    const double q = 0.5 * std::atan2(n(0), n(2));
    const double u = 0.5 * std::atan2(-n(1), std::hypot(n(0), n(2)));
    const double h = 0.5 * (u + q);
    return {rad2deg(q), rad2deg(h), n};
}

// The default tomography set: collective projections along the six signed
// Poincare axes plus ten golden-spiral spread directions; informationally
// complete (verified by design_rank).
inline std::vector<MeasurementSetting> default_settings() {
    std::vector<MeasurementSetting> out;
    const std::vector<Vec3> axes = {{0, 0, 1},  {0, 0, -1}, {1, 0, 0},
                                    {-1, 0, 0}, {0, 1, 0},  {0, -1, 0}};
    for (const auto& n : axes) out.push_back(setting_for_direction(n));
    for (const auto& n : fibonacci_directions(10, 0.5, 0.35))
        out.push_back(setting_for_direction(n));
    return out;
}

// Born probabilities of the four photon-splitting outcomes
// (n_H, n_V) = (3,0), (2,1), (1,2), (0,3) behind the analyzer.
inline Eigen::Vector4d born_probabilities(const DensityOperator& rho,
                                          const MeasurementSetting& s) {
    if (rho.photons != 3)
        throw std::invalid_argument("tomography operates on three-photon states");
    const Matrix u = lift_mode_unitary(analyzer_matrix(s), 3);
    const Matrix rotated = u * rho.matrix * u.adjoint();
    Eigen::Vector4d p;
    double sum = 0.0;
    for (int k = 0; k < 4; ++k) {
        p(k) = std::max(0.0, rotated(k, k).real());
        sum += p(k);
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw std::runtime_error("outcome probabilities do not sum to 1");
    return p / sum;
}

struct CountRecord {
    MeasurementSetting setting;
    std::array<long long, 4> counts{};
    long long shots = 0;

    long long total() const { return counts[0] + counts[1] + counts[2] + counts[3]; }
};

// Multinomial counts for each setting; one deterministic stream per dataset.
inline std::vector<CountRecord> simulate_counts(
    const DensityOperator& rho, const std::vector<MeasurementSetting>& settings,
    long long shots, std::uint64_t seed) {
    if (shots < 1) throw std::invalid_argument("shots must be >= 1");
    Rng rng(seed);
    std::vector<CountRecord> out;
    out.reserve(settings.size());
    for (const auto& s : settings) {
        const Eigen::Vector4d p = born_probabilities(rho, s);
        const auto draws =
            multinomial_draw(rng, {p(0), p(1), p(2), p(3)}, shots);
        CountRecord rec;
        rec.setting = s;
        rec.shots = shots;
        for (int k = 0; k < 4; ++k) rec.counts[size_t(k)] = draws[size_t(k)];
        out.push_back(rec);
    }
    return out;
}

// Rank of the linearized measurement map over the 16-dimensional real space
// of 4x4 Hermitian matrices; 16 means informationally complete.
inline int design_rank(const std::vector<MeasurementSetting>& settings) {
    Eigen::MatrixXd design(long(settings.size()) * 4, 16);
    long row = 0;
    for (const auto& s : settings) {
        const Matrix u = lift_mode_unitary(analyzer_matrix(s), 3);
        for (int k = 0; k < 4; ++k) {
            const Matrix proj = u.adjoint().col(k) * u.row(k);  // U^dag |k><k| U
            int col = 0;
            for (int i = 0; i < 4; ++i) design(row, col++) = proj(i, i).real();
            for (int i = 0; i < 4; ++i)
                for (int j = i + 1; j < 4; ++j) {
                    design(row, col++) = 2.0 * proj(i, j).real();
                    design(row, col++) = -2.0 * proj(i, j).imag();
                }
            ++row;
        }
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(design);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > 1e-10 * sv(0)) ++rank;
    return rank;
}

inline bool is_informationally_complete(const std::vector<MeasurementSetting>& settings) {
    return design_rank(settings) == 16;
}

struct MleConfig {
    int max_iterations = 5000;
    double likelihood_tolerance = 1e-10;  // stop when the gain drops below
    double dilution = 0.5;                // initial epsilon of the diluted step
    // Optional per-iteration observer (iterate, log-likelihood).
    std::function<void(const Matrix&, double)> observer;
};

struct ReconstructionResult {
    DensityOperator rho_hat;
    double log_likelihood = 0.0;
    int iterations = 0;
    bool converged = false;
    bool complete = true;  // informational completeness of the supplied settings
    std::vector<double> likelihood_history;
};

namespace detail {

struct WeightedProjector {
    Matrix projector;
    double weight = 0.0;
};

inline double log_likelihood_of(const Matrix& rho,
                                const std::vector<WeightedProjector>& data) {
    double ll = 0.0;
    for (const auto& d : data) {
        if (d.weight <= 0.0) continue;
        const double p = std::max(1e-300, (rho * d.projector).trace().real());
        ll += d.weight * std::log(p);
    }
    return ll;
}

// Iterative R rho R maximum-likelihood ascent. Falls back to the diluted
// update (I + eps R) rho (I + eps R) whenever the full step would lower the
// likelihood, so the likelihood is non-decreasing by construction and every
// iterate stays positive with unit trace.
inline ReconstructionResult mle_core(const std::vector<WeightedProjector>& data,
                                     int dim, double total_weight,
                                     const MleConfig& config, bool complete) {
    Matrix rho = Matrix::Identity(dim, dim) / double(dim);
    double ll = log_likelihood_of(rho, data);
    std::vector<double> history{ll};
    bool converged = false;
    int it = 0;
    for (it = 1; it <= config.max_iterations; ++it) {
        Matrix r = Matrix::Zero(dim, dim);
        for (const auto& d : data) {
            if (d.weight <= 0.0) continue;
            const double p = std::max(1e-300, (rho * d.projector).trace().real());
            r += (d.weight / p) * d.projector;
        }
        r /= total_weight;
        Matrix candidate = r * rho * r;
        candidate /= candidate.trace().real();
        double ll_candidate = log_likelihood_of(candidate, data);
        if (ll_candidate < ll) {
            double eps = config.dilution;
            while (eps > 1e-12) {
                const Matrix step =
                    Matrix::Identity(dim, dim) + eps * r;
                candidate = step * rho * step.adjoint();
                candidate /= candidate.trace().real();
                ll_candidate = log_likelihood_of(candidate, data);
                if (ll_candidate >= ll) break;
                eps *= 0.5;
            }
            if (ll_candidate < ll) {  // numerically stalled at the optimum
                converged = true;
                break;
            }
        }
        const double gain = ll_candidate - ll;
        rho = 0.5 * (candidate + candidate.adjoint().eval());
        ll = ll_candidate;
        history.push_back(ll);
        if (config.observer) config.observer(rho, ll);
        if (gain < config.likelihood_tolerance) {
            converged = true;
            break;
        }
    }
    ReconstructionResult res{DensityOperator(dim - 1, rho), ll,
                             std::min(it, config.max_iterations), converged,
                             complete, std::move(history)};
    return res;
}

}  // namespace detail

inline ReconstructionResult mle_reconstruct(const std::vector<CountRecord>& records,
                                            const MleConfig& config = {}) {
    if (records.empty()) throw std::invalid_argument("empty data");
    long long total = 0;
    for (const auto& rec : records) total += rec.total();
    if (total == 0) throw std::invalid_argument("empty data");
    std::vector<detail::WeightedProjector> data;
    std::vector<MeasurementSetting> settings;
    for (const auto& rec : records) {
        settings.push_back(rec.setting);
        const Matrix u = lift_mode_unitary(analyzer_matrix(rec.setting), 3);
        for (int k = 0; k < 4; ++k)
            data.push_back({u.adjoint().col(k) * u.row(k),
                            double(rec.counts[size_t(k)])});
    }
    const bool complete = is_informationally_complete(settings);
    return detail::mle_core(data, 4, double(total), config, complete);
}

// Same estimator fed with exact outcome probabilities instead of counts
// (the infinite-data limit; its fixed point is the true state).
inline ReconstructionResult mle_from_probabilities(
    const std::vector<MeasurementSetting>& settings,
    const std::vector<Eigen::Vector4d>& probabilities, const MleConfig& config = {}) {
    if (settings.empty() || settings.size() != probabilities.size())
        throw std::invalid_argument("settings/probabilities size mismatch");
    std::vector<detail::WeightedProjector> data;
    double total = 0.0;
    for (size_t i = 0; i < settings.size(); ++i) {
        const Matrix u = lift_mode_unitary(analyzer_matrix(settings[i]), 3);
        for (int k = 0; k < 4; ++k) {
            data.push_back({u.adjoint().col(k) * u.row(k), probabilities[i](k)});
            total += probabilities[i](k);
        }
    }
    if (total <= 0.0) throw std::invalid_argument("empty data");
    return detail::mle_core(data, 4, total, config,
                            is_informationally_complete(settings));
}

// Reconstruction quality relative to a target: fidelity, purities, and the
// sup over sampled directions of the per-order moment deviation.
struct EvaluationReport {
    double fidelity = 0.0;
    double purity_estimate = 0.0;
    double purity_target = 0.0;
    std::array<double, 3> moment_deviation{};  // orders 1..3
};

inline EvaluationReport evaluate(const DensityOperator& rho_hat,
                                 const DensityOperator& target,
                                 int sample_count = 512) {
    if (rho_hat.photons != target.photons)
        throw std::invalid_argument("photon numbers differ");
    EvaluationReport rep;
    rep.fidelity = fidelity(rho_hat, target);
    rep.purity_estimate = purity(rho_hat);
    rep.purity_target = purity(target);
    const MomentTensors ta = moment_tensors(rho_hat);
    const MomentTensors tb = moment_tensors(target);
    for (const Vec3& n : fibonacci_directions(sample_count))
        for (int m = 1; m <= 3; ++m) {
            const double dev =
                std::abs(contract_moment(ta, n, m) - contract_moment(tb, n, m));
            rep.moment_deviation[size_t(m - 1)] =
                std::max(rep.moment_deviation[size_t(m - 1)], dev);
        }
    return rep;
}

}  // namespace qpol

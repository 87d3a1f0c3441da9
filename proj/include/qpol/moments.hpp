#pragma once

// Directional moments of the Stokes vector: mean, covariance and third
// central moment tensors, their sphere fields, rotation-invariance tests and
// the resulting hidden-polarization classification.

#include "qpol/fock.hpp"
#include "qpol/sphere.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace qpol {

using Mat3 = Eigen::Matrix3d;

// Fully symmetric rank-3 tensor over the Stokes indices 1..3.
struct Rank3Tensor {
    std::array<double, 27> v{};

    double& operator()(int i, int j, int k) { return v[size_t(9 * i + 3 * j + k)]; }
    double operator()(int i, int j, int k) const { return v[size_t(9 * i + 3 * j + k)]; }

    double frobenius_norm() const {
        double s = 0.0;
        for (double x : v) s += x * x;
        return std::sqrt(s);
    }

    // T_ijk n_i n_j n_k
    double contract(const Vec3& n) const {
        double s = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                for (int k = 0; k < 3; ++k) s += (*this)(i, j, k) * n(i) * n(j) * n(k);
        return s;
    }
};

// First three moments of (S1, S2, S3). `cov` and `skew` are central and
// fully symmetrized, so n-contractions give exactly <(Delta S_n)^m>.
struct MomentTensors {
    int photons = 0;
    Vec3 mean = Vec3::Zero();
    Mat3 cov = Mat3::Zero();
    Rank3Tensor skew;
};

inline MomentTensors moment_tensors(const DensityOperator& rho) {
    const StokesSet stokes = stokes_operators(rho.photons);
    MomentTensors out;
    out.photons = rho.photons;
    std::array<Matrix, 3> delta;
    for (int j = 0; j < 3; ++j) {
        out.mean(j) = expectation(rho, stokes.s[j + 1]);
        delta[j] = stokes.s[j + 1] -
                   out.mean(j) * Matrix::Identity(rho.dimension(), rho.dimension());
    }
    for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k)
            out.cov(j, k) =
                0.5 * expectation(rho, delta[j] * delta[k] + delta[k] * delta[j]);
    static constexpr int kPerm[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                        {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) {
                const int idx[3] = {i, j, k};
                Matrix acc = Matrix::Zero(rho.dimension(), rho.dimension());
                for (auto& p : kPerm)
                    acc += delta[idx[p[0]]] * delta[idx[p[1]]] * delta[idx[p[2]]];
                out.skew(i, j, k) = expectation(rho, acc) / 6.0;
            }
    return out;
}

// Contraction of the stored tensors along a unit direction: order 1 gives
// the raw mean projection <S_n>; orders 2 and 3 give the central moments
// <(Delta S_n)^2> and <(Delta S_n)^3>.
inline double contract_moment(const MomentTensors& t, const Vec3& n, int order) {
    if (std::abs(n.norm() - 1.0) > 1e-9)
        throw std::invalid_argument("direction must be a unit vector");
    switch (order) {
        case 1: return t.mean.dot(n);
        case 2: return n.dot(t.cov * n);
        case 3: return t.skew.contract(n);
        default: throw std::invalid_argument("moment order must be 1, 2 or 3");
    }
}

// Same quantity evaluated directly from operator powers (no tensors); the
// two routes agree and cross-check each other in the tests.
inline double moment_along(const DensityOperator& rho, const Vec3& n, int order) {
    if (std::abs(n.norm() - 1.0) > 1e-9)
        throw std::invalid_argument("direction must be a unit vector");
    if (order < 1 || order > 3)
        throw std::invalid_argument("moment order must be 1, 2 or 3");
    const StokesSet stokes = stokes_operators(rho.photons);
    const Matrix sn = stokes_component(stokes, n);
    const double mean = expectation(rho, sn);
    if (order == 1) return mean;
    const Matrix d =
        sn - mean * Matrix::Identity(rho.dimension(), rho.dimension());
    return order == 2 ? expectation(rho, d * d) : expectation(rho, d * d * d);
}

struct SphereSample {
    Vec3 direction;
    double value = 0.0;
};

// A directional moment evaluated over a sampling of the sphere.
struct SphereField {
    int photons = 0;
    int order = 1;
    std::string sampling;  // "fibonacci" or "latlong"
    std::vector<SphereSample> samples;

    double max_abs() const {
        double m = 0.0;
        for (const auto& s : samples) m = std::max(m, std::abs(s.value));
        return m;
    }
};

inline SphereField sphere_field(const DensityOperator& rho, int order,
                                const SphereSampling& sampling = {}) {
    const MomentTensors t = moment_tensors(rho);
    SphereField field;
    field.photons = rho.photons;
    field.order = order;
    field.sampling =
        sampling.kind == SphereSampling::Kind::fibonacci ? "fibonacci" : "latlong";
    for (const Vec3& n : sampling.directions())
        field.samples.push_back({n, contract_moment(t, n, order)});
    return field;
}

// --- variance-sum bounds ----------------------------------------------------

inline double variance_sum(const DensityOperator& rho) {
    const MomentTensors t = moment_tensors(rho);
    return t.cov.trace();
}

// sum_j <(Delta S_j)^2> = N(N+2) - |mean|^2, bounded by [2N, N(N+2)]:
// the upper bound is attained iff the mean vanishes, the lower bound iff
// the state is an SU(2)-coherent (fully polarized) state.
struct BoundsReport {
    int photons = 0;
    double sum = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    bool at_lower = false;
    bool at_upper = false;
    bool within = false;
};

inline BoundsReport check_bounds(const DensityOperator& rho, double tol = 1e-9) {
    BoundsReport r;
    r.photons = rho.photons;
    r.sum = variance_sum(rho);
    const double n = double(rho.photons);
    r.lower = 2.0 * n;
    r.upper = n * (n + 2.0);
    r.at_lower = std::abs(r.sum - r.lower) <= tol;
    r.at_upper = std::abs(r.sum - r.upper) <= tol;
    r.within = r.sum >= r.lower - tol && r.sum <= r.upper + tol;
    return r;
}

// --- rotation invariance and classification ---------------------------------

// Named tolerance profiles: `exact` for analytically constructed states,
// `experimental` for reconstructions from finite data. Residuals are
// absolute, in photon-number units.
struct ToleranceProfile {
    std::string name = "exact";
    double tol = 1e-8;

    static ToleranceProfile exact() { return {"exact", 1e-8}; }
    static ToleranceProfile experimental() { return {"experimental", 0.15}; }
    static ToleranceProfile named(const std::string& name) {
        if (name == "exact") return exact();
        if (name == "experimental") return experimental();
        throw std::invalid_argument("unknown tolerance profile: " + name);
    }
};

// Rotation invariance of each moment order, with the residual that was
// compared against the tolerance:
//   order 1: |mean|                          (invariant iff zero)
//   order 2: ||cov - (tr cov / 3) I||_F      (invariant iff isotropic)
//   order 3: ||skew||_F                      (invariant iff zero)
struct InvarianceTriple {
    bool mean_invariant = false;
    bool var_invariant = false;
    bool skew_invariant = false;
    double mean_residual = 0.0;
    double var_residual = 0.0;
    double skew_residual = 0.0;
    double tol = 0.0;
};

inline InvarianceTriple invariance(const MomentTensors& t, double tol) {
    InvarianceTriple r;
    r.tol = tol;
    r.mean_residual = t.mean.norm();
    r.var_residual = (t.cov - (t.cov.trace() / 3.0) * Mat3::Identity()).norm();
    r.skew_residual = t.skew.frobenius_norm();
    r.mean_invariant = r.mean_residual <= tol;
    r.var_invariant = r.var_residual <= tol;
    r.skew_invariant = r.skew_residual <= tol;
    return r;
}

inline InvarianceTriple invariance(const DensityOperator& rho,
                                   const ToleranceProfile& profile = {}) {
    return invariance(moment_tensors(rho), profile.tol);
}

// Class labels: one letter per moment order (mean, variance, skew);
// O = rotation-invariant at that order, X = not. Only six patterns are
// realizable: invariance can be lost at order 3 before order 2 or 1, but a
// state with anisotropic lower moments cannot have an isotropic-looking
// order above them restored, except in the two X?X columns.
enum class PolarizationClass { OOO, OOX, OXO, OXX, XOX, XXX };

inline std::string to_string(PolarizationClass c) {
    switch (c) {
        case PolarizationClass::OOO: return "OOO";
        case PolarizationClass::OOX: return "OOX";
        case PolarizationClass::OXO: return "OXO";
        case PolarizationClass::OXX: return "OXX";
        case PolarizationClass::XOX: return "XOX";
        case PolarizationClass::XXX: return "XXX";
    }
    throw std::logic_error("unreachable");
}

inline PolarizationClass classify(const InvarianceTriple& inv) {
    const bool m = inv.mean_invariant, v = inv.var_invariant, s = inv.skew_invariant;
    if (m && v && s) return PolarizationClass::OOO;
    if (m && v && !s) return PolarizationClass::OOX;
    if (m && !v && s) return PolarizationClass::OXO;
    if (m && !v && !s) return PolarizationClass::OXX;
    if (!m && v && !s) return PolarizationClass::XOX;
    if (!m && !v && !s) return PolarizationClass::XXX;
    // XOO or XXO: a nonzero mean forces an anisotropic third moment.
    throw std::domain_error(
        "impossible invariance pattern " + std::string(m ? "O" : "X") +
        (v ? "O" : "X") + (s ? "O" : "X") +
        " (nonzero mean with isotropic skew); check the tolerance profile");
}

// Classification is defined for the three-photon taxonomy.
inline PolarizationClass classify(const DensityOperator& rho,
                                  const ToleranceProfile& profile = {}) {
    if (rho.photons != 3)
        throw std::invalid_argument("classification applies to three-photon states");
    return classify(invariance(rho, profile));
}

// Number of leading rotation-invariant moment orders (0..3): the order up to
// which the state looks unpolarized.
inline int unpolarized_order(const InvarianceTriple& inv) {
    if (!inv.mean_invariant) return 0;
    if (!inv.var_invariant) return 1;
    if (!inv.skew_invariant) return 2;
    return 3;
}

inline int unpolarized_order(const DensityOperator& rho,
                             const ToleranceProfile& profile = {}) {
    return unpolarized_order(invariance(rho, profile));
}

// Uncertainty relation for a pair of Stokes components (1-based j, k, with
// l the remaining axis): Var(S_j) * Var(S_k) >= |<S_l>|^2... reported as the
// product square roots: sqrt(Var_j) * sqrt(Var_k) vs |<S_l>|.
struct UncertaintyReport {
    int j = 1, k = 2, l = 3;
    double lhs = 0.0;  // sqrt(Var_j Var_k)
    double rhs = 0.0;  // |<S_l>|
    bool satisfied = false;
    bool saturated = false;
};

inline UncertaintyReport uncertainty_product(const DensityOperator& rho, int j, int k,
                                             double tol = 1e-9) {
    if (j < 1 || j > 3 || k < 1 || k > 3 || j == k)
        throw std::invalid_argument("component indices must be distinct and in 1..3");
    UncertaintyReport r;
    r.j = j;
    r.k = k;
    r.l = 6 - j - k;
    const MomentTensors t = moment_tensors(rho);
    r.lhs = std::sqrt(t.cov(j - 1, j - 1) * t.cov(k - 1, k - 1));
    r.rhs = std::abs(t.mean(r.l - 1));
    r.satisfied = r.lhs >= r.rhs - tol;
    r.saturated = std::abs(r.lhs - r.rhs) <= tol;
    return r;
}

}  // namespace qpol

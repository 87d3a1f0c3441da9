#pragma once

// Two-mode (H/V) photon-number algebra at fixed total photon number N:
// basis kets |n_H, n_V> with n_H + n_V = N, Stokes operators, mode-unitary
// lifts, SU(2) rotations, and state containers with validated invariants.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace qpol {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Vec3 = Eigen::Vector3d;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

inline double factorial_d(int n) {
    if (n < 0) throw std::invalid_argument("factorial of negative integer");
    double f = 1.0;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

// Fixed-N two-mode Fock basis. Index i in [0, N] labels |N-i, i>, i.e. kets
// are ordered by descending H occupation: |N,0>, |N-1,1>, ..., |0,N>.
struct FockBasis {
    int photons = 0;

    explicit FockBasis(int n) : photons(n) {
        if (n < 1) throw std::invalid_argument("photon number must be >= 1");
    }

    int dimension() const { return photons + 1; }
    int n_h(int index) const { return photons - check(index); }
    int n_v(int index) const { return check(index); }
    int index_of(int nh, int nv) const {
        if (nh < 0 || nv < 0 || nh + nv != photons)
            throw std::invalid_argument("occupation does not match photon number");
        return nv;
    }
    std::string label(int index) const {
        return "|" + std::to_string(n_h(index)) + "," + std::to_string(n_v(index)) + ">";
    }

  private:
    int check(int index) const {
        if (index < 0 || index > photons) throw std::out_of_range("basis index out of range");
        return index;
    }
};

// Normalized pure state in the fixed-N basis above.
struct PureState {
    int photons = 0;
    Vector amplitudes;

    PureState(int n, Vector amps) : photons(n), amplitudes(std::move(amps)) {
        if (n < 1) throw std::invalid_argument("photon number must be >= 1");
        if (amplitudes.size() != n + 1)
            throw std::invalid_argument("amplitude vector has wrong dimension");
        const double norm = amplitudes.norm();
        if (std::abs(norm - 1.0) > 1e-10)
            throw std::invalid_argument("pure state is not normalized");
        amplitudes /= norm;  // remove residual rounding
    }

    // |n_h, n_v> basis ket.
    static PureState basis_state(int nh, int nv) {
        const int n = nh + nv;
        FockBasis basis(n);
        Vector v = Vector::Zero(n + 1);
        v(basis.index_of(nh, nv)) = 1.0;
        return PureState(n, std::move(v));
    }

    Complex overlap(const PureState& other) const {
        if (other.photons != photons)
            throw std::invalid_argument("photon numbers differ");
        return amplitudes.dot(other.amplitudes);  // conjugates *this
    }
};

// Diagnostics from validating a candidate density matrix.
struct StateDiagnostics {
    double hermiticity_error = 0.0;  // max |rho - rho^dagger| entry
    double trace_error = 0.0;        // |tr(rho) - 1|
    double min_eigenvalue = 0.0;

    bool ok() const {
        return hermiticity_error <= 1e-12 && trace_error <= 1e-12 && min_eigenvalue >= -1e-10;
    }
};

inline StateDiagnostics diagnose_density(const Matrix& m) {
    StateDiagnostics d;
    d.hermiticity_error = (m - m.adjoint()).cwiseAbs().maxCoeff();
    d.trace_error = std::abs(m.trace() - Complex(1.0, 0.0));
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()),
                                             Eigen::EigenvaluesOnly);
    d.min_eigenvalue = es.eigenvalues().minCoeff();
    return d;
}

// Density operator on the fixed-N space. Construction enforces Hermiticity,
// unit trace and positivity (up to numerical slack).
struct DensityOperator {
    int photons = 0;
    Matrix matrix;

    DensityOperator(int n, Matrix m) : photons(n), matrix(std::move(m)) {
        if (n < 1) throw std::invalid_argument("photon number must be >= 1");
        if (matrix.rows() != n + 1 || matrix.cols() != n + 1)
            throw std::invalid_argument("density matrix has wrong dimension");
        const StateDiagnostics d = diagnose_density(matrix);
        if (!d.ok())
            throw std::invalid_argument(
                "invalid density matrix (hermiticity " + std::to_string(d.hermiticity_error) +
                ", trace error " + std::to_string(d.trace_error) +
                ", min eigenvalue " + std::to_string(d.min_eigenvalue) + ")");
        matrix = 0.5 * (matrix + matrix.adjoint().eval());
        matrix /= matrix.trace().real();
    }

    static DensityOperator pure(const PureState& psi) {
        return DensityOperator(psi.photons,
                               psi.amplitudes * psi.amplitudes.adjoint());
    }

    int dimension() const { return photons + 1; }
};

// The four Stokes operators on the fixed-N space: s[0] = N*I (total photon
// number), s[1..3] the SU(2) generators obeying [S_j, S_k] = 2i eps_jkl S_l.
struct StokesSet {
    int photons = 0;
    std::array<Matrix, 4> s;

    const Matrix& operator[](int j) const {
        if (j < 0 || j > 3) throw std::out_of_range("Stokes index must be 0..3");
        return s[j];
    }
};

inline StokesSet stokes_operators(int photons) {
    FockBasis basis(photons);
    const int dim = basis.dimension();
    StokesSet out;
    out.photons = photons;
    out.s[0] = Matrix::Identity(dim, dim) * double(photons);
    out.s[1] = Matrix::Zero(dim, dim);
    out.s[2] = Matrix::Zero(dim, dim);
    out.s[3] = Matrix::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) {
        out.s[3](i, i) = double(basis.n_h(i) - basis.n_v(i));
        if (i + 1 < dim) {
            // <i+1| S1 |i>: moves one photon H -> V from |N-i, i>.
            const double c = std::sqrt(double(basis.n_h(i)) * double(basis.n_v(i) + 1));
            out.s[1](i + 1, i) = c;
            out.s[1](i, i + 1) = c;
            out.s[2](i + 1, i) = Complex(0.0, c);
            out.s[2](i, i + 1) = Complex(0.0, -c);
        }
    }
    return out;
}

// n1*S1 + n2*S2 + n3*S3 for a (not necessarily unit) direction n.
inline Matrix stokes_component(const StokesSet& stokes, const Vec3& n) {
    return n(0) * stokes.s[1] + n(1) * stokes.s[2] + n(2) * stokes.s[3];
}

// --- single-photon (Jones) optics -----------------------------------------

// 2x2 mode transformation acting on the (H, V) creation operators.
struct ModeUnitary {
    Eigen::Matrix2cd matrix;
    std::string label;
};

inline Eigen::Matrix2cd rotation2(double angle_rad) {
    Eigen::Matrix2cd r;
    r << std::cos(angle_rad), -std::sin(angle_rad),
         std::sin(angle_rad),  std::cos(angle_rad);
    return r;
}

// Half-wave plate with fast axis at `angle_deg` from H:
// R(theta) diag(1, -1) R(-theta).
inline ModeUnitary half_wave_plate(double angle_deg) {
    const double t = deg2rad(angle_deg);
    Eigen::Matrix2cd d = Eigen::Matrix2cd::Zero();
    d(0, 0) = 1.0;
    d(1, 1) = -1.0;
    return {rotation2(t) * d * rotation2(-t), "hwp(" + std::to_string(angle_deg) + ")"};
}

// Quarter-wave plate with fast axis at `angle_deg` from H:
// R(theta) diag(1, i) R(-theta).
inline ModeUnitary quarter_wave_plate(double angle_deg) {
    const double t = deg2rad(angle_deg);
    Eigen::Matrix2cd d = Eigen::Matrix2cd::Zero();
    d(0, 0) = 1.0;
    d(1, 1) = Complex(0.0, 1.0);
    return {rotation2(t) * d * rotation2(-t), "qwp(" + std::to_string(angle_deg) + ")"};
}

inline bool is_unitary2(const Eigen::Matrix2cd& u, double tol = 1e-10) {
    return (u.adjoint() * u - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() <= tol;
}

// Lift a 2x2 mode unitary to the N-photon space via the substitution
// a_H^dag -> u00 a_H^dag + u10 a_V^dag (and likewise for a_V^dag), expanding
// the input monomial binomially. The lift is a homomorphism:
// lift(A*B) = lift(A)*lift(B).
inline Matrix lift_mode_unitary(const Eigen::Matrix2cd& u, int photons) {
    if (!is_unitary2(u))
        throw std::invalid_argument("mode matrix is not unitary");
    FockBasis basis(photons);
    const int dim = basis.dimension();
    Matrix out = Matrix::Zero(dim, dim);
    for (int j = 0; j < dim; ++j) {
        const int p = basis.n_h(j), q = basis.n_v(j);
        // coeff[b] accumulates the monomial coefficient of h^(N-b) v^b.
        std::vector<Complex> coeff(dim, Complex(0.0, 0.0));
        for (int r = 0; r <= p; ++r) {
            const double bin_r = factorial_d(p) / (factorial_d(r) * factorial_d(p - r));
            const Complex ch = bin_r * std::pow(u(0, 0), p - r) * std::pow(u(1, 0), r);
            for (int s = 0; s <= q; ++s) {
                const double bin_s = factorial_d(q) / (factorial_d(s) * factorial_d(q - s));
                const Complex cv = bin_s * std::pow(u(0, 1), q - s) * std::pow(u(1, 1), s);
                coeff[r + s] += ch * cv;
            }
        }
        const double in_norm = std::sqrt(factorial_d(p) * factorial_d(q));
        for (int i = 0; i < dim; ++i) {
            const double out_norm =
                std::sqrt(factorial_d(basis.n_h(i)) * factorial_d(basis.n_v(i)));
            out(i, j) = coeff[i] * out_norm / in_norm;
        }
    }
    return out;
}

inline Matrix lift_mode_unitary(const ModeUnitary& u, int photons) {
    return lift_mode_unitary(u.matrix, photons);
}

// exp(-i * theta * S_n / 2) for a unit direction n on the Poincare sphere.
inline Matrix su2_rotation(const Vec3& axis, double theta_rad, int photons) {
    const double norm = axis.norm();
    if (std::abs(norm - 1.0) > 1e-9)
        throw std::invalid_argument("rotation axis must be a unit vector");
    const StokesSet stokes = stokes_operators(photons);
    const Matrix sn = stokes_component(stokes, axis / norm);
    Eigen::SelfAdjointEigenSolver<Matrix> es(sn);
    const int dim = photons + 1;
    Vector phases(dim);
    for (int i = 0; i < dim; ++i)
        phases(i) = std::exp(Complex(0.0, -0.5 * theta_rad * es.eigenvalues()(i)));
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

// --- state functional -------------------------------------------------------

inline PureState evolve(const PureState& psi, const Matrix& u) {
    if (u.rows() != psi.photons + 1 || u.cols() != psi.photons + 1)
        throw std::invalid_argument("operator dimension does not match state");
    return PureState(psi.photons, u * psi.amplitudes);
}

inline DensityOperator evolve(const DensityOperator& rho, const Matrix& u) {
    if (u.rows() != rho.dimension() || u.cols() != rho.dimension())
        throw std::invalid_argument("operator dimension does not match state");
    return DensityOperator(rho.photons, u * rho.matrix * u.adjoint());
}

inline Complex expectation_c(const DensityOperator& rho, const Matrix& op) {
    return (rho.matrix * op).trace();
}

// Expectation of a Hermitian observable; the imaginary part is a rounding
// artifact and is checked to stay negligible.
inline double expectation(const DensityOperator& rho, const Matrix& op) {
    const Complex e = expectation_c(rho, op);
    if (std::abs(e.imag()) > 1e-8 * (1.0 + std::abs(e.real())))
        throw std::runtime_error("expectation of non-Hermitian operator");
    return e.real();
}

inline double purity(const DensityOperator& rho) {
    return (rho.matrix * rho.matrix).trace().real();
}

// Hermitian square root with eigenvalue clamping at zero.
inline Matrix sqrt_psd(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()));
    Vector d(es.eigenvalues().size());
    for (int i = 0; i < d.size(); ++i)
        d(i) = std::sqrt(std::max(0.0, es.eigenvalues()(i)));
    return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
}

// Uhlmann fidelity F(rho, sigma) = (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2,
// symmetric in its arguments and equal to |<psi|phi>|^2 for pure inputs.
inline double fidelity(const DensityOperator& rho, const DensityOperator& sigma) {
    if (rho.photons != sigma.photons)
        throw std::invalid_argument("photon numbers differ");
    const Matrix a = sqrt_psd(rho.matrix);
    Eigen::SelfAdjointEigenSolver<Matrix> es(a * sigma.matrix * a);
    double sum = 0.0;
    for (int i = 0; i < es.eigenvalues().size(); ++i)
        sum += std::sqrt(std::max(0.0, es.eigenvalues()(i)));
    return std::min(1.0, sum * sum);
}

inline double fidelity(const DensityOperator& rho, const PureState& psi) {
    return fidelity(rho, DensityOperator::pure(psi));
}

// |<psi|phi>|^2 with any global phase discarded.
inline double fidelity(const PureState& psi, const PureState& phi) {
    return std::norm(psi.overlap(phi));
}

}  // namespace qpol

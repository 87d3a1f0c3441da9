#pragma once

// Deterministic direction sets on the unit sphere, used for moment fields,
// invariance checks and tomography settings.

#include "qpol/fock.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace qpol {

// Golden-angle spiral: `count` well-spread unit vectors. `offset` shifts the
// latitude ladder (0.5 = cell midpoints, avoiding the poles), `azimuth_rad`
// rotates the whole set (useful to avoid accidental axis alignment).
inline std::vector<Vec3> fibonacci_directions(int count, double offset = 0.5,
                                              double azimuth_rad = 0.0) {
    if (count < 1) throw std::invalid_argument("direction count must be >= 1");
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    std::vector<Vec3> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        const double z = 1.0 - 2.0 * (i + offset) / count;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden * i + azimuth_rad;
        out.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
    }
    return out;
}

// Antipodally symmetric spread: a half-count spiral confined to the upper
// hemisphere plus the mirrored antipodes, so n and -n always appear in
// pairs (sample 2k+1 is the antipode of sample 2k). Odd-order fields are
// exactly antisymmetric across such pairs.
inline std::vector<Vec3> antipodal_directions(int count) {
    if (count < 2 || count % 2 != 0)
        throw std::invalid_argument("antipodal direction count must be even and >= 2");
    const int half = count / 2;
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    std::vector<Vec3> out;
    out.reserve(count);
    for (int i = 0; i < half; ++i) {
        const double z = 1.0 - (i + 0.5) / half;  // upper hemisphere only
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden * i;
        const Vec3 n(r * std::cos(phi), r * std::sin(phi), z);
        out.push_back(n);
        out.push_back(-n);
    }
    return out;
}

// Regular (theta, phi) grid; theta is the polar angle from +z. Poles are
// sampled at cell midpoints to avoid duplicated points.
inline std::vector<Vec3> latlong_directions(int n_theta, int n_phi) {
    if (n_theta < 1 || n_phi < 1)
        throw std::invalid_argument("grid sizes must be >= 1");
    std::vector<Vec3> out;
    out.reserve(size_t(n_theta) * n_phi);
    for (int i = 0; i < n_theta; ++i) {
        const double theta = kPi * (i + 0.5) / n_theta;
        for (int j = 0; j < n_phi; ++j) {
            const double phi = 2.0 * kPi * j / n_phi;
            out.emplace_back(std::sin(theta) * std::cos(phi),
                             std::sin(theta) * std::sin(phi), std::cos(theta));
        }
    }
    return out;
}

// Great circle in the S1-S2 plane (the "equator"); phi measured from +S1.
inline Vec3 equatorial_direction(double phi_rad) {
    return Vec3(std::cos(phi_rad), std::sin(phi_rad), 0.0);
}

struct SphereSampling {
    enum class Kind { fibonacci, latlong };
    Kind kind = Kind::fibonacci;
    int count = 2048;    // fibonacci (must be even: antipodal pairs)
    int n_theta = 32;    // latlong
    int n_phi = 64;

    std::vector<Vec3> directions() const {
        if (kind == Kind::fibonacci) return antipodal_directions(count);
        return latlong_directions(n_theta, n_phi);
    }
};

}  // namespace qpol

#include "qpol/moments.hpp"

#include "qpol/prep.hpp"
#include "test_support.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace qpol;
using qpol_test::random_density;
using qpol_test::random_pure;
using qpol_test::random_unitary2;

namespace {

Vec3 random_direction(Rng& rng) {
    Vec3 n(qpol_test::gauss(rng), qpol_test::gauss(rng), qpol_test::gauss(rng));
    while (n.norm() < 1e-3)
        n = Vec3(qpol_test::gauss(rng), qpol_test::gauss(rng), qpol_test::gauss(rng));
    return n / n.norm();
}

}  // namespace

TEST_CASE("maximally mixed state: zero mean, isotropic variance 5, zero skew",
          "[moments]") {
    const MomentTensors t = moment_tensors(named_state("identity_quarter"));
    REQUIRE(t.mean.norm() < 1e-12);
    REQUIRE((t.cov - 5.0 * Mat3::Identity()).norm() < 1e-12);
    REQUIRE(t.skew.frobenius_norm() < 1e-12);
}

TEST_CASE("NOON state covariance diagonal is (3, 3, 9)", "[moments]") {
    const MomentTensors t = moment_tensors(named_state("noon3"));
    REQUIRE(t.mean.norm() < 1e-12);
    REQUIRE(t.cov(0, 0) == Catch::Approx(3.0));
    REQUIRE(t.cov(1, 1) == Catch::Approx(3.0));
    REQUIRE(t.cov(2, 2) == Catch::Approx(9.0));
    REQUIRE(std::abs(t.cov(0, 1)) < 1e-12);
    REQUIRE(std::abs(t.cov(0, 2)) < 1e-12);
}

TEST_CASE("19/36-15/36-2/36 mixture: mean z, isotropic variance 14/3",
          "[moments]") {
    // diagonal-state oracle: <S3> = (19*3 - 15 - 2*3)/36 = 1,
    // <S3^2> = (19*9 + 15 + 2*9)/36, <S1^2> = (19*3 + 15*7 + 2*3)/36 = 14/3
    const double mean_z = (19.0 * 3 - 15.0 - 2.0 * 3) / 36.0;
    const double var_z = (19.0 * 9 + 15.0 + 2.0 * 9) / 36.0 - mean_z * mean_z;
    const double var_x = (19.0 * 3 + 15.0 * 7 + 2.0 * 3) / 36.0;
    REQUIRE(mean_z == Catch::Approx(1.0));
    REQUIRE(var_z == Catch::Approx(14.0 / 3.0));
    REQUIRE(var_x == Catch::Approx(14.0 / 3.0));

    const MomentTensors t = moment_tensors(named_state("xox_mix"));
    REQUIRE((t.mean - Vec3(0, 0, 1)).norm() < 1e-12);
    REQUIRE((t.cov - (14.0 / 3.0) * Mat3::Identity()).norm() < 1e-12);
}

TEST_CASE("moment_along on eigenstates and mixtures", "[moments]") {
    const DensityOperator h3 = named_state("h3");
    const Vec3 z(0, 0, 1);
    REQUIRE(moment_along(h3, z, 1) == Catch::Approx(3.0));
    REQUIRE(moment_along(h3, z, 2) == Catch::Approx(0.0).margin(1e-12));

    // 1/3, 1/2, 1/6 mixture along z: mean 0, variance 5, skew 9 - .5 - 4.5 = 4
    const DensityOperator oox = named_state("oox_mix");
    REQUIRE(moment_along(oox, z, 1) == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(moment_along(oox, z, 2) == Catch::Approx(5.0));
    REQUIRE(moment_along(oox, z, 3) == Catch::Approx(4.0));

    REQUIRE_THROWS_AS(moment_along(h3, z, 4), std::invalid_argument);
    REQUIRE_THROWS_AS(moment_along(h3, Vec3(0, 0, 2), 1), std::invalid_argument);
}

TEST_CASE("NOON equatorial skewness: amplitude 6, three-fold symmetry",
          "[moments]") {
    const DensityOperator noon = named_state("noon3");
    const StokesSet s = stokes_operators(3);

    double max_abs = 0.0;
    for (int i = 0; i < 720; ++i) {
        const double phi = 2.0 * kPi * i / 720;
        const Vec3 n = equatorial_direction(phi);
        const double v = moment_along(noon, n, 3);

        // direct matrix-cube oracle (mean vanishes on the equator)
        const Matrix sn = stokes_component(s, n);
        const double oracle = expectation(noon, sn * sn * sn);
        REQUIRE(std::abs(expectation(noon, sn)) < 1e-12);
        REQUIRE(v == Catch::Approx(oracle).margin(1e-10));

        // exact 3-fold symmetry
        const double shifted =
            moment_along(noon, equatorial_direction(phi + 2.0 * kPi / 3.0), 3);
        REQUIRE(v == Catch::Approx(shifted).margin(1e-9));
        max_abs = std::max(max_abs, std::abs(v));
    }
    REQUIRE(max_abs == Catch::Approx(6.0).margin(2e-3));  // grid-max undershoot

    // Fourier read-off: the field is a pure third harmonic of amplitude 6
    const int m = 512;
    Complex third(0.0, 0.0);
    double power = 0.0;
    for (int i = 0; i < m; ++i) {
        const double phi = 2.0 * kPi * i / m;
        const double v = moment_along(noon, equatorial_direction(phi), 3);
        third += v * std::exp(Complex(0.0, -3.0 * phi));
        power += v * v;
    }
    const double amplitude = 2.0 * std::abs(third) / m;
    REQUIRE(amplitude == Catch::Approx(6.0).margin(1e-9));
    REQUIRE(power / m == Catch::Approx(18.0).margin(1e-9));  // A^2/2, no other harmonics
}

TEST_CASE("tensor contraction agrees with direct operator moments", "[moments]") {
    Rng rng(101);
    for (int rep = 0; rep < 200; ++rep) {
        const DensityOperator rho = random_density(3, rng);
        const MomentTensors t = moment_tensors(rho);
        for (int d = 0; d < 50; ++d) {
            const Vec3 n = random_direction(rng);
            for (int order = 1; order <= 3; ++order)
                REQUIRE(std::abs(contract_moment(t, n, order) -
                                 moment_along(rho, n, order)) < 1e-9);
        }
    }
}

TEST_CASE("sphere fields: constants, equator zeros, antipodal identity",
          "[moments]") {
    SphereSampling sampling;
    sampling.count = 256;

    const SphereField iso = sphere_field(named_state("identity_quarter"), 2, sampling);
    for (const auto& s : iso.samples) REQUIRE(s.value == Catch::Approx(5.0));

    // |3,0>: odd moments vanish on the S1-S2 equator
    const DensityOperator h3 = named_state("h3");
    for (int i = 0; i < 32; ++i) {
        const Vec3 n = equatorial_direction(2.0 * kPi * i / 32);
        REQUIRE(std::abs(moment_along(h3, n, 1)) < 1e-12);
        REQUIRE(std::abs(moment_along(h3, n, 3)) < 1e-12);
    }

    // antipodal pairs: odd orders exactly antisymmetric
    for (const auto& rho : {named_state("noon3"), named_state("h3")}) {
        for (int order : {1, 3}) {
            const SphereField f = sphere_field(rho, order, sampling);
            REQUIRE(f.samples.size() % 2 == 0);
            for (size_t i = 0; i + 1 < f.samples.size(); i += 2) {
                REQUIRE((f.samples[i].direction + f.samples[i + 1].direction).norm() <
                        1e-14);
                REQUIRE(f.samples[i].value ==
                        Catch::Approx(-f.samples[i + 1].value).margin(1e-10));
            }
        }
    }
}

TEST_CASE("variance-sum bounds and the named extremal states", "[moments]") {
    const BoundsReport mixed = check_bounds(named_state("identity_quarter"));
    REQUIRE(mixed.sum == Catch::Approx(15.0));
    REQUIRE(mixed.at_upper);
    REQUIRE_FALSE(mixed.at_lower);

    const BoundsReport h3 = check_bounds(named_state("h3"));
    REQUIRE(h3.sum == Catch::Approx(6.0));
    REQUIRE(h3.at_lower);

    const DensityOperator oxo = named_state("oxo_mix");
    const MomentTensors t = moment_tensors(oxo);
    REQUIRE(t.cov(0, 0) == Catch::Approx(3.0));
    REQUIRE(t.cov(1, 1) == Catch::Approx(3.0));
    REQUIRE(t.cov(2, 2) == Catch::Approx(9.0));
    REQUIRE(variance_sum(oxo) == Catch::Approx(15.0));
    REQUIRE(check_bounds(oxo).at_upper);

    // other maximum sum-uncertainty states named in the text
    REQUIRE(variance_sum(named_state("noon3")) == Catch::Approx(15.0));
    REQUIRE(variance_sum(named_state("oox_mix")) == Catch::Approx(15.0));

    Rng rng(77);
    for (int rep = 0; rep < 1000; ++rep)
        REQUIRE(check_bounds(random_density(3, rng)).within);
}

TEST_CASE("invariance triples of the class representatives", "[moments]") {
    const auto inv = [](const char* name) {
        return invariance(named_state(name), ToleranceProfile::exact());
    };
    const InvarianceTriple iso = inv("identity_quarter");
    REQUIRE(iso.mean_invariant);
    REQUIRE(iso.var_invariant);
    REQUIRE(iso.skew_invariant);

    const InvarianceTriple noon = inv("noon3");
    REQUIRE(noon.mean_invariant);
    REQUIRE_FALSE(noon.var_invariant);
    REQUIRE_FALSE(noon.skew_invariant);

    const InvarianceTriple xox = inv("xox_mix");
    REQUIRE_FALSE(xox.mean_invariant);
    REQUIRE(xox.var_invariant);
    REQUIRE_FALSE(xox.skew_invariant);
    REQUIRE(xox.mean_residual == Catch::Approx(1.0));
}

TEST_CASE("six-class labels match the representatives", "[moments]") {
    REQUIRE(classify(named_state("identity_quarter")) == PolarizationClass::OOO);
    REQUIRE(classify(named_state("oox_mix")) == PolarizationClass::OOX);
    REQUIRE(classify(named_state("oxo_mix")) == PolarizationClass::OXO);
    REQUIRE(classify(named_state("noon3")) == PolarizationClass::OXX);
    REQUIRE(classify(named_state("xox_mix")) == PolarizationClass::XOX);
    REQUIRE(classify(named_state("h3")) == PolarizationClass::XXX);
    REQUIRE(to_string(PolarizationClass::OXX) == "OXX");

    REQUIRE(unpolarized_order(named_state("identity_quarter")) == 3);
    REQUIRE(unpolarized_order(named_state("oox_mix")) == 2);
    REQUIRE(unpolarized_order(named_state("noon3")) == 1);
    REQUIRE(unpolarized_order(named_state("h3")) == 0);
}

TEST_CASE("impossible invariance patterns are rejected", "[moments]") {
    InvarianceTriple bad;
    bad.mean_invariant = false;
    bad.var_invariant = true;
    bad.skew_invariant = true;  // XOO
    REQUIRE_THROWS_AS(classify(bad), std::domain_error);
    bad.var_invariant = false;  // XXO
    REQUIRE_THROWS_AS(classify(bad), std::domain_error);

    // classification is a three-photon taxonomy
    const DensityOperator qubit(1, Matrix::Identity(2, 2) / 2.0);
    REQUIRE_THROWS_AS(classify(qubit), std::invalid_argument);
}

TEST_CASE("class labels are rotation invariants", "[moments]") {
    Rng rng(303);
    const char* names[] = {"identity_quarter", "oox_mix", "oxo_mix",
                           "noon3",            "xox_mix",  "h3"};
    for (const char* name : names) {
        const DensityOperator rho = named_state(name);
        const PolarizationClass cls = classify(rho);
        for (int rep = 0; rep < 8; ++rep) {
            const Matrix u = lift_mode_unitary(random_unitary2(rng), 3);
            REQUIRE(classify(evolve(rho, u)) == cls);
        }
    }
}

TEST_CASE("no pure three-photon state has isotropic variance", "[moments]") {
    Rng rng(505);
    for (int rep = 0; rep < 1000; ++rep) {
        const PureState psi = random_pure(3, rng);
        const InvarianceTriple inv =
            invariance(DensityOperator::pure(psi), ToleranceProfile::exact());
        REQUIRE_FALSE(inv.var_invariant);
    }
}

TEST_CASE("uncertainty products", "[moments]") {
    const UncertaintyReport h3 = uncertainty_product(named_state("h3"), 1, 2);
    REQUIRE(h3.lhs == Catch::Approx(3.0));
    REQUIRE(h3.rhs == Catch::Approx(3.0));
    REQUIRE(h3.saturated);

    const UncertaintyReport iso = uncertainty_product(named_state("identity_quarter"), 2, 3);
    REQUIRE(iso.lhs == Catch::Approx(5.0));
    REQUIRE(iso.rhs == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(iso.satisfied);

    const UncertaintyReport noon = uncertainty_product(named_state("noon3"), 1, 2);
    REQUIRE(noon.lhs == Catch::Approx(3.0));
    REQUIRE(noon.rhs == Catch::Approx(0.0).margin(1e-12));

    REQUIRE_THROWS_AS(uncertainty_product(named_state("h3"), 1, 1),
                      std::invalid_argument);

    // the uncertainty relation holds for random states and all index pairs
    Rng rng(909);
    for (int rep = 0; rep < 100; ++rep) {
        const DensityOperator rho = random_density(3, rng);
        for (int j = 1; j <= 3; ++j)
            for (int k = 1; k <= 3; ++k)
                if (j != k) REQUIRE(uncertainty_product(rho, j, k).satisfied);
    }
}

TEST_CASE("tolerance profiles", "[moments]") {
    REQUIRE(ToleranceProfile::named("exact").tol == Catch::Approx(1e-8));
    REQUIRE(ToleranceProfile::named("experimental").tol == Catch::Approx(0.15));
    REQUIRE_THROWS_AS(ToleranceProfile::named("sloppy"), std::invalid_argument);

    // a slightly depolarized NOON state still classifies OXX experimentally
    const DensityOperator noon = named_state("noon3");
    Matrix m = 0.97 * noon.matrix + 0.03 * Matrix::Identity(4, 4) / 4.0;
    const DensityOperator noisy(3, m);
    REQUIRE(classify(noisy, ToleranceProfile::experimental()) ==
            PolarizationClass::OXX);
}

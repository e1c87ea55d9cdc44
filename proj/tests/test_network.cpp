#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>

#include "eopulse/errors.hpp"
#include "eopulse/network.hpp"

using namespace eopulse;
using cx = std::complex<double>;

TEST_CASE("pure resistance realizes as direct feedthrough") {
    const auto z = network::Impedance::pure_resistance(50.0);
    const auto r = network::realize_impedance(z);
    CHECK(r.order == 0);
    CHECK(r.D == doctest::Approx(0.02).epsilon(1e-15).scale(0.0));
    CHECK(r.stable());
    CHECK(r.slowest_time_constant() == 0.0);
    CHECK(std::abs(r.admittance_at(cx(0.0, 1e9)) - cx(0.02, 0.0)) <= 1e-15);
}

TEST_CASE("series RL admittance matches direct evaluation everywhere") {
    const double R = 100.0, L = 1e-6;
    const network::Impedance z{{R, L}, {1.0}};
    const auto r = network::realize_impedance(z);
    CHECK(r.order == 1);
    CHECK(r.stable());
    CHECK(r.slowest_time_constant() ==
          doctest::Approx(L / R).epsilon(1e-12).scale(0.0));

    for (double w : {1e3, 1e6, 1e8, 1e9}) {
        const cx s(0.0, w);
        const cx direct = 1.0 / z.evaluate(s);
        REQUIRE(std::abs(r.admittance_at(s) - direct) <= 1e-12 * std::abs(direct));
    }
    CHECK(network::verify_realization(r, z, 1e3, 1e9) <= 1e-9);
}

TEST_CASE("series RLC with capacitive branch") {
    // Z(s) = (1 + s R C + s^2 L C) / (s C)
    const double R = 8688.0, C = 1.1510444157e-16, L = 2e-8;
    const network::Impedance z{{1.0, R * C, L * C}, {0.0, C}};
    const auto r = network::realize_impedance(z);
    CHECK(r.order == 2);
    CHECK(r.stable());
    CHECK(network::verify_realization(r, z, 1e9, 1e14) <= 1e-9);

    // Poles of Y are the zeros of Z: underdamped complex pair.
    const auto poles = r.poles();
    REQUIRE(poles.size() == 2);
    CHECK(poles[0].imag() != 0.0);
    CHECK(poles[0].real() < 0.0);
    // Pair sums to -R/L, multiplies to 1/(L C).
    const cx sum = poles[0] + poles[1];
    const cx prod = poles[0] * poles[1];
    CHECK(sum.real() == doctest::Approx(-R / L).epsilon(1e-9));
    CHECK(std::abs(sum.imag()) <= 1e-3 * std::abs(sum.real()));
    CHECK(prod.real() == doctest::Approx(1.0 / (L * C)).epsilon(1e-9));
}

TEST_CASE("improper impedance (Y would differentiate) is rejected") {
    // Z = 1/(1+s) -> Y = 1 + s
    const network::Impedance z{{1.0}, {1.0, 1.0}};
    try {
        network::realize_impedance(z);
        FAIL("expected IMPROPER_IMPEDANCE");
    } catch (const SimError& e) {
        CHECK(e.code() == ErrorCode::ImproperImpedance);
    }
}

TEST_CASE("dc short through the network is rejected") {
    // Z = sL vanishes at s=0: Y has a pole at the origin, the battery would
    // drive unbounded charge.
    const network::Impedance z{{0.0, 1e-6}, {1.0}};
    try {
        network::realize_impedance(z);
        FAIL("expected IMPROPER_IMPEDANCE");
    } catch (const SimError& e) {
        CHECK(e.code() == ErrorCode::ImproperImpedance);
    }
}

TEST_CASE("zero denominator is degenerate") {
    const network::Impedance z{{1.0, 1.0}, {0.0}};
    try {
        network::realize_impedance(z);
        FAIL("expected DEGENERATE_DENOMINATOR");
    } catch (const SimError& e) {
        CHECK(e.code() == ErrorCode::DegenerateDenominator);
    }
    const network::Impedance z2{{1.0}, {}};
    CHECK_THROWS_AS(network::realize_impedance(z2), SimError);
}

TEST_CASE("unstable realization is detected via poles") {
    // Z = R - sL puts Y's pole in the right half plane.
    const network::Impedance z{{100.0, -1e-6}, {1.0}};
    const auto r = network::realize_impedance(z);
    CHECK(!r.stable());
}

TEST_CASE("passivity sampling flags negative resistance") {
    CHECK(network::passivity_sample(network::Impedance::pure_resistance(50.0),
                                    1e3, 1e12));
    CHECK(!network::passivity_sample(network::Impedance{{-50.0}, {1.0}}, 1e3,
                                     1e12));
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "eopulse/envelope.hpp"
#include "eopulse/errors.hpp"
#include "eopulse/quadrature.hpp"

using namespace eopulse;

namespace {

model::PulseSpec rect(double E, double T, double Ttr) {
    model::PulseSpec s;
    s.shape = model::EnvelopeShape::rectangular;
    s.carrier_angular_frequency = 2.263e15;
    s.field_amplitude = E;
    s.plateau_duration = T;
    s.transient_duration = Ttr;
    return s;
}

} // namespace

TEST_CASE("idealized rectangular pulse") {
    const auto env = envelope::Envelope::make(rect(2.0, 3e-12, 0.0));
    CHECK(env.idealized());
    CHECK(env.has_plateau());
    CHECK(env.start() == 0.0);
    CHECK(env.end() == 3e-12);
    CHECK(env.plateau_end() == 3e-12);
    CHECK(env.peak_amplitude() == 2.0);
    const auto p = env.piece_containing(1e-12);
    CHECK(env.amplitude_sq(1e-12, p) == 4.0);
    CHECK(env.amplitude_sq_rate(1e-12, p) == 0.0);
    // Outside the pulse the field vanishes regardless of piece.
    CHECK(env.amplitude(5e-12, p) == 0.0);
}

TEST_CASE("raised-cosine ramps join the plateau with C1 continuity") {
    const double E = 3.0, T = 3e-12, Ttr = 4e-13;
    const auto env = envelope::Envelope::make(rect(E, T, Ttr));
    CHECK(!env.idealized());
    CHECK(env.start() == -Ttr);
    CHECK(env.end() == T + Ttr);

    const auto up = env.piece_containing(-0.5 * Ttr);
    CHECK(env.amplitude(-Ttr, up) == doctest::Approx(0.0).scale(E));
    CHECK(env.amplitude(0.0, up) == doctest::Approx(E).epsilon(1e-14));
    CHECK(env.amplitude_sq_rate(-Ttr, up) == doctest::Approx(0.0).scale(E * E / Ttr));
    CHECK(env.amplitude_sq_rate(0.0, up) ==
          doctest::Approx(0.0).scale(E * E / Ttr));
    // Midpoint of the ramp carries half the amplitude.
    CHECK(env.amplitude(-0.5 * Ttr, up) == doctest::Approx(0.5 * E).epsilon(1e-14));

    // d(E^2)/dt integrates to the plateau value across the ramp.
    const std::size_t n = 401;
    std::vector<double> rate(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = -Ttr + Ttr * static_cast<double>(i) / (n - 1);
        rate[i] = env.amplitude_sq_rate(t, up);
    }
    const auto r = quadrature::simpson(rate, Ttr / (n - 1));
    CHECK(r.value == doctest::Approx(E * E).epsilon(1e-10));

    // Trailing ramp mirrors the leading one.
    const auto down = env.piece_containing(T + 0.5 * Ttr);
    CHECK(env.amplitude(T + 0.5 * Ttr, down) ==
          doctest::Approx(0.5 * E).epsilon(1e-14));
    CHECK(env.amplitude_sq_rate(T + 0.25 * Ttr, down) ==
          doctest::Approx(-env.amplitude_sq_rate(-0.25 * Ttr, up)).epsilon(1e-12));

    CHECK(env.min_feature_time() == Ttr);
}

TEST_CASE("gaussian FWHM is in intensity, not amplitude") {
    const double E = 2.0, T = 1e-12;
    auto spec = rect(E, T, 0.0);
    spec.shape = model::EnvelopeShape::gaussian;
    const auto env = envelope::Envelope::make(spec);
    CHECK(!env.idealized());
    const auto p = env.piece_containing(0.0);
    CHECK(env.amplitude_sq(0.0, p) == E * E);
    CHECK(env.amplitude_sq(0.5 * T, p) ==
          doctest::Approx(0.5 * E * E).epsilon(1e-12));
    CHECK(env.amplitude_sq(-0.5 * T, p) ==
          doctest::Approx(0.5 * E * E).epsilon(1e-12));
    // The window spans +-3T, far enough that the edges are negligible.
    CHECK(env.amplitude_sq(env.end(), p) <= 4e-11 * E * E);

    // Rate is the analytic derivative.
    const double t = 0.3 * T;
    const double a = std::log(2.0) / (2.0 * 0.25 * T * T);
    const double want = -4.0 * a * t * E * E * std::exp(-2.0 * a * t * t);
    CHECK(env.amplitude_sq_rate(t, p) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("tabulated envelope: interpolation and validation") {
    const std::string path = "test_envelope_table.txt";
    {
        std::FILE* f = std::fopen(path.c_str(), "w");
        std::fprintf(f, "# t E\n0 0\n1e-13 2\n3e-13 2\n4e-13 0\n");
        std::fclose(f);
    }
    model::PulseSpec s;
    s.shape = model::EnvelopeShape::tabulated;
    s.carrier_angular_frequency = 2.263e15;
    s.table_path = path;
    const auto env = envelope::Envelope::make(s);
    CHECK(env.start() == 0.0);
    CHECK(env.end() == 4e-13);
    CHECK(env.peak_amplitude() == 2.0);
    CHECK(env.min_feature_time() == 1e-13);
    const auto p = env.piece_containing(5e-14);
    CHECK(env.amplitude(5e-14, p) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(env.amplitude(2e-13, p) == doctest::Approx(2.0).epsilon(1e-12));

    {
        std::FILE* f = std::fopen(path.c_str(), "w");
        std::fprintf(f, "0 0\n0 1\n"); // non-increasing time
        std::fclose(f);
    }
    CHECK_THROWS_AS(envelope::Envelope::make(s), SimError);

    {
        std::FILE* f = std::fopen(path.c_str(), "w");
        std::fprintf(f, "0 0\n");
        std::fclose(f);
    }
    CHECK_THROWS_AS(envelope::Envelope::make(s), SimError);

    s.table_path = "does_not_exist_anywhere.txt";
    CHECK_THROWS_AS(envelope::Envelope::make(s), SimError);
    std::remove(path.c_str());
}

TEST_CASE("breakpoints cover every smooth interval") {
    const auto env = envelope::Envelope::make(rect(1.0, 3e-12, 4e-13));
    const auto& b = env.breakpoints();
    REQUIRE(b.size() == 4);
    CHECK(b[0] == -4e-13);
    CHECK(b[1] == 0.0);
    CHECK(b[2] == 3e-12);
    CHECK(b[3] == 3e-12 + 4e-13);
}

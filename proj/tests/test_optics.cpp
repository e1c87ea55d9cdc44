#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <span>
#include <vector>

#include "eopulse/circuit.hpp"
#include "eopulse/constants.hpp"
#include "eopulse/envelope.hpp"
#include "eopulse/errors.hpp"
#include "eopulse/grid.hpp"
#include "eopulse/optics.hpp"
#include "eopulse/quadrature.hpp"
#include "test_support.hpp"

using namespace eopulse;
using testsupport::canonical_model;
namespace k = eopulse::constants;

namespace {

struct Run {
    model::Model m;
    circuit::ChargeTrajectory q;
    optics::OpticalTrajectory o;
};

Run run_optics(const testsupport::Overrides& ov = {}) {
    Run r{canonical_model(ov), {}, {}};
    r.q = circuit::integrate_circuit(r.m, envelope::Envelope::make(r.m.pulse));
    r.o = optics::frequency_shift(r.m, r.q);
    return r;
}

double segment_integral(const grid::Segment& s,
                        std::span<const double> col) {
    return quadrature::simpson(col.subspan(s.first, s.count), s.dt).value;
}

// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace

TEST_CASE("index shift onset matches the quadratic electro-optic response") {
    const auto r = run_optics();
    const auto& plat = r.q.grid.segments[r.q.plateau_segment];

    // From scratch: delta_n(0+) = chi_eo/(2n) * (-chi2 E^2 / eps_r), sigma1=0.
    const double E2 = r.m.pulse.field_amplitude * r.m.pulse.field_amplitude;
    const double chi2 = *r.m.material.chi2_dc;
    const double fp = -chi2 * E2 / r.m.material.relative_permittivity;
    const double want =
        4.0 * chi2 / (2.0 * r.m.material.refractive_index) * fp;

    CHECK(want == testsupport::rel(-2.2360e-4, 1e-3)); // frozen anchor
    CHECK(r.o.delta_n[plat.first] == testsupport::rel(want, 1e-12));
    CHECK(r.o.phase[plat.first] ==
          testsupport::rel(want * r.m.pulse.carrier_angular_frequency *
                               r.m.geometry.device_length *
                               r.m.material.fill_factor / k::speed_of_light,
                           1e-12));

    // Screening eats a fraction kappa(1 - e^(-T/tau)) of it by the pulse end.
    const double T = r.m.pulse.plateau_duration;
    const double depletion =
        1.0 - r.m.material.fill_factor * (1.0 - std::exp(-T / r.m.derived.tau));
    CHECK(r.o.delta_n[plat.first + plat.count - 1] ==
          testsupport::rel(want * depletion, 1e-6));
}

TEST_CASE("full screening cancels the index shift at unit fill factor") {
    const auto r = run_optics({{"material.fill_factor", "1"}});
    const auto& plat = r.q.grid.segments[r.q.plateau_segment];
    const double onset = r.o.delta_n[plat.first];
    const double last = r.o.delta_n[plat.first + plat.count - 1];
    const double T = r.m.pulse.plateau_duration;
    REQUIRE(onset != 0.0);
    CHECK(last / onset ==
          testsupport::rel(std::exp(-T / r.m.derived.tau), 1e-6));
}

TEST_CASE("shift decomposition is exact") {
    const auto r = run_optics();
    for (std::size_t i = 0; i < r.o.delta_omega.size(); ++i)
        REQUIRE(r.o.delta_omega[i] ==
                r.o.delta_omega_usual[i] + r.o.delta_omega_extra[i]);
    // Idealized rectangular pulse: E^2 is constant inside every segment, so
    // the usual self-phase-modulation part vanishes on all samples.
    for (std::size_t i = 0; i < r.o.delta_omega_usual.size(); i += 13)
        REQUIRE(r.o.delta_omega_usual[i] == 0.0);
}

TEST_CASE("phase derivative reproduces the frequency shift") {
    const auto r = run_optics();
    double max_shift = 0.0;
    for (double v : r.o.delta_omega)
        max_shift = std::max(max_shift, std::fabs(v));
    REQUIRE(max_shift > 0.0);

    // Central differences of the phase column inside smooth segments must
    // match -delta_omega; rates come from the ODE right-hand side, so this
    // cross-checks two independent computations.
    for (const grid::Segment& s : r.o.grid.segments) {
        if (s.count < 5) continue;
        for (std::size_t j : {s.count / 4, s.count / 2, 3 * s.count / 4}) {
            const std::size_t i = s.first + j;
            const double fd =
                (r.o.phase[i + 1] - r.o.phase[i - 1]) / (2.0 * s.dt);
            CHECK(std::fabs(-fd - r.o.delta_omega[i]) <= 1e-5 * max_shift);
        }
    }
}

TEST_CASE("extra shift relaxes on the circuit time constant") {
    const auto r = run_optics();
    const auto& plat = r.q.grid.segments[r.q.plateau_segment];
    const double tau = r.m.derived.tau;

    // Frozen anchor: onset magnitude 2 eps0 omega kappa^2 chi2^2 E^2 L /
    // (n eps c tau) = 4.22e8 rad/s for the canonical parameters.
    const double onset = r.o.delta_omega_extra[plat.first];
    CHECK(onset < 0.0); // red shift while the screening charge builds
    CHECK(std::fabs(onset) == doctest::Approx(4.2196e8).epsilon(1e-3));

    // Peak magnitude sits at the switch-on sample.
    double peak = 0.0;
    for (double v : r.o.delta_omega_extra) peak = std::max(peak, std::fabs(v));
    CHECK(peak == std::fabs(onset));

    // After the pulse the stored charge drains back: blue shift.
    const auto& tail = r.q.grid.segments.back();
    CHECK(r.o.delta_omega_extra[tail.first + tail.count / 4] > 0.0);

    // Exponential fit over t in [0.2 tau, 2.2 tau] recovers tau.
    std::vector<double> ts, lns;
    for (std::size_t j = 0; j < plat.count; ++j) {
        const double t = r.q.grid.time[plat.first + j];
        if (t < 0.2 * tau || t > 2.2 * tau) continue;
        ts.push_back(t);
        lns.push_back(std::log(-r.o.delta_omega_extra[plat.first + j]));
    }
    REQUIRE(ts.size() >= 16);
    const double tau_fit = -1.0 / fit_slope(ts, lns);
    CHECK(tau_fit == testsupport::rel(tau, 1e-3));
}

TEST_CASE("photon flux is conserved sample by sample") {
    const auto r = run_optics();
    const auto p = optics::apply_shift_to_pulse(r.m, r.q, r.o);

    REQUIRE(p.flux_in.size() == p.flux_out.size());
    for (std::size_t i = 0; i < p.flux_in.size(); ++i)
        REQUIRE(p.flux_out[i] == p.flux_in[i]);
    CHECK(p.photons_in == p.photons_out);
    CHECK(p.photon_quadrature_error <= 1e-12); // piecewise-constant flux

    // Plateau flux: W^2 I / (hbar omega) with I = eps0 c n E^2 / 2.
    const auto& plat = r.q.grid.segments[r.q.plateau_segment];
    const double W = r.m.geometry.cross_section;
    const double omega = r.m.pulse.carrier_angular_frequency;
    const double I = 0.5 * k::eps0 * k::speed_of_light *
                     r.m.material.refractive_index *
                     r.m.pulse.field_amplitude * r.m.pulse.field_amplitude;
    const double want_flux = W * W * I / (k::hbar * omega);
    const std::size_t mid = plat.first + plat.count / 2;
    CHECK(p.flux_in[mid] == doctest::Approx(want_flux).epsilon(1e-12));
    CHECK(I == doctest::Approx(r.m.derived.intensity).epsilon(1e-12));

    CHECK(p.omega_out[mid] - omega ==
          doctest::Approx(r.o.delta_omega[mid]).epsilon(1e-8));
    CHECK(p.delta_I[mid] ==
          doctest::Approx(k::hbar * r.o.delta_omega[mid] * p.flux_in[mid] /
                          (W * W))
              .epsilon(1e-14));

    CHECK(p.energy_in == k::hbar * omega * p.photons_in);
    // Red-shifted photons leave with less energy while sigma1 still holds
    // charge at the end of the plateau; over the full span including the
    // drain-back, the net shift is what the resistor ate.
    CHECK(p.energy_out < p.energy_in);
}

TEST_CASE("leading and trailing modulation cancel for a smooth pulse") {
    const auto r = run_optics({{"pulse.transient_duration", "5e-14"}});
    const auto& segs = r.o.grid.segments;

    double up = 0.0, down = 0.0, l1 = 0.0;
    std::vector<double> absu(r.o.delta_omega_usual.size());
    for (std::size_t i = 0; i < absu.size(); ++i)
        absu[i] = std::fabs(r.o.delta_omega_usual[i]);
    for (const grid::Segment& s : segs) {
        l1 += segment_integral(s, absu);
        if (s.t1 <= 0.0)
            up += segment_integral(s, r.o.delta_omega_usual);
        else if (s.t0 >= r.m.pulse.plateau_duration)
            down += segment_integral(s, r.o.delta_omega_usual);
    }
    REQUIRE(l1 > 0.0);
    CHECK(std::fabs(up + down) <= 1e-9 * l1);
    // Rising edge lowers the index (chi2 > 0, FP < 0): blue then red.
    CHECK(up > 0.0);
    CHECK(down < 0.0);
}

TEST_CASE("spectrum conserves power and moves the centroid red") {
    const auto r = run_optics({{"pulse.transient_duration", "5e-14"}});
    const auto sp = optics::pulse_spectrum(r.m, r.q, r.o, 4096);
    REQUIRE(sp.power_in.size() == 4096);

    double pin = 0.0, pout = 0.0, min_ = 0.0, mout = 0.0;
    for (std::size_t i = 0; i < sp.power_in.size(); ++i) {
        pin += sp.power_in[i];
        pout += sp.power_out[i];
        min_ += sp.power_in[i] * sp.omega_offset[i];
        mout += sp.power_out[i] * sp.omega_offset[i];
    }
    REQUIRE(pin > 0.0);
    // Pointwise |out(t)| == |in(t)|, so total spectral power is preserved.
    CHECK(pout == doctest::Approx(pin).epsilon(1e-9));

    // First moment moves by the flux-weighted mean shift.
    std::vector<double> wsq(r.o.delta_omega.size());
    for (std::size_t i = 0; i < wsq.size(); ++i)
        wsq[i] = r.o.delta_omega[i] * r.q.envelope_sq[i];
    double num = 0.0, den = 0.0;
    for (const grid::Segment& s : r.o.grid.segments) {
        num += segment_integral(s, wsq);
        den += segment_integral(s, r.q.envelope_sq);
    }
    const double mean_shift = num / den;
    const double centroid_shift = mout / pin - min_ / pin;
    REQUIRE(mean_shift < 0.0);
    CHECK(centroid_shift < 0.0);
    CHECK(centroid_shift == doctest::Approx(mean_shift).epsilon(0.1));
}

TEST_CASE("mismatched grids are rejected") {
    const auto r = run_optics();
    auto broken = r.o;
    broken.grid.time.pop_back();
    try {
        optics::apply_shift_to_pulse(r.m, r.q, broken);
        FAIL("expected GRID_MISMATCH");
    } catch (const SimError& e) {
        CHECK(e.code() == ErrorCode::GridMismatch);
    }
    CHECK_THROWS_AS(optics::pulse_spectrum(r.m, r.q, broken, 512), SimError);
}

TEST_CASE("missing electro-optic coefficient is rejected") {
    auto r = run_optics();
    r.m.material.chi2_dc.reset();
    try {
        optics::frequency_shift(r.m, r.q);
        FAIL("expected MISSING_FIELD");
    } catch (const SimError& e) {
        CHECK(e.code() == ErrorCode::MissingField);
        CHECK(e.field() == "material.chi2_dc");
    }
}

#include "eopulse/optics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "eopulse/constants.hpp"
#include "eopulse/kernels.hpp"
#include "eopulse/quadrature.hpp"

namespace eopulse::optics {

namespace k = eopulse::constants;

namespace {

void require_chi2(const model::Model& m) {
    if (!m.material.chi2_dc)
        throw SimError(ErrorCode::MissingField, "material.chi2_dc",
                       "optical response needs the electro-optic coefficient");
}

void require_same_grid(const grid::TimeGrid& a, const grid::TimeGrid& b) {
    if (a.size() != b.size() || a.segments.size() != b.segments.size() ||
        (a.size() > 0 && (a.time.front() != b.time.front() ||
                          a.time.back() != b.time.back())))
        throw SimError(ErrorCode::GridMismatch, "",
                       "trajectories were sampled on different grids");
}

} // namespace

OpticalTrajectory frequency_shift(const model::Model& m,
                                  const circuit::ChargeTrajectory& q) {
    require_chi2(m);
    const double n = m.material.refractive_index;
    const double idx_per_field = m.derived.chi2_eo / (2.0 * n);
    const double phase_per_idx = m.pulse.carrier_angular_frequency *
                                 m.geometry.device_length *
                                 m.material.fill_factor / k::speed_of_light;

    OpticalTrajectory o;
    o.grid = q.grid;
    o.run_id = q.run_id;
    const std::size_t N = q.grid.size();
    o.delta_n.resize(N);
    o.phase.resize(N);
    o.delta_omega.resize(N);
    o.delta_omega_usual.resize(N);
    o.delta_omega_extra.resize(N);

    // delta_n = chi_eo/(2n) (FP + F1); phase = (omega L kappa / c) delta_n;
    // delta_omega = -dphase/dt split by which field is moving.
    kernels::fma_abc(q.FP, q.F1, idx_per_field, idx_per_field, 0.0, o.delta_n);
    kernels::scale(o.delta_n, phase_per_idx, o.phase);
    const double shift_per_rate = -phase_per_idx * idx_per_field;
    kernels::scale(q.FP_rate, shift_per_rate, o.delta_omega_usual);
    kernels::scale(q.dsigma1_dt, shift_per_rate / m.derived.eps,
                   o.delta_omega_extra);
    kernels::fma_abc(o.delta_omega_usual, o.delta_omega_extra, 1.0, 1.0, 0.0,
                     o.delta_omega);
    return o;
}

PulseRecord apply_shift_to_pulse(const model::Model& m,
                                 const circuit::ChargeTrajectory& q,
                                 const OpticalTrajectory& o) {
    require_same_grid(q.grid, o.grid);
    const double omega = m.pulse.carrier_angular_frequency;
    const double W = m.geometry.cross_section;
    // I(t) = eps0 c n E^2(t) / 2, flux = W^2 I / (hbar omega)
    const double intensity_per_esq =
        0.5 * k::eps0 * k::speed_of_light * m.material.refractive_index;
    const double flux_per_esq = W * W * intensity_per_esq / (k::hbar * omega);

    PulseRecord p;
    p.grid = q.grid;
    p.run_id = q.run_id;
    const std::size_t N = q.grid.size();
    p.flux_in.resize(N);
    p.omega_out.resize(N);
    p.delta_I.resize(N);

    kernels::scale(q.envelope_sq, flux_per_esq, p.flux_in);
    p.flux_out = p.flux_in;
    std::vector<double> ones(N, 1.0);
    kernels::fma_abc(o.delta_omega, ones, 1.0, omega, 0.0, p.omega_out);
    // delta_I = I delta_omega / omega = hbar delta_omega flux / W^2
    kernels::multiply(o.delta_omega, p.flux_in, p.delta_I);
    kernels::scale(p.delta_I, k::hbar / (W * W), p.delta_I);

    double flux_integral = 0.0, flux_err = 0.0;
    double shift_integral = 0.0;
    std::vector<double> weighted(N);
    kernels::multiply(p.flux_in, o.delta_omega, weighted);
    for (const grid::Segment& s : p.grid.segments) {
        const auto r = quadrature::simpson(
            std::span<const double>(p.flux_in).subspan(s.first, s.count), s.dt);
        flux_integral += r.value;
        flux_err += r.error_estimate;
        shift_integral +=
            quadrature::simpson(
                std::span<const double>(weighted).subspan(s.first, s.count), s.dt)
                .value;
    }
    p.photons_in = flux_integral;
    p.photons_out = flux_integral; // same samples, same quadrature
    p.photon_quadrature_error =
        flux_integral > 0.0 ? flux_err / flux_integral : 0.0;
    p.energy_in = k::hbar * omega * flux_integral;
    p.energy_out = p.energy_in + k::hbar * shift_integral;
    return p;
}

namespace {

// In-place radix-2 decimation-in-time transform.
void fft(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * k::pi / static_cast<double>(len);
        const std::complex<double> w_len(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                const std::complex<double> u = a[i + j];
                const std::complex<double> v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= w_len;
            }
        }
    }
}

} // namespace

Spectrum pulse_spectrum(const model::Model&,
                        const circuit::ChargeTrajectory& q,
                        const OpticalTrajectory& o, std::size_t points) {
    require_same_grid(q.grid, o.grid);
    std::size_t n = 1;
    while (n < points) n <<= 1;

    const double t0 = q.grid.time.front();
    const double t1 = q.grid.time.back();
    const double dt = (t1 - t0) / static_cast<double>(n - 1);

    // Carrier-frame phase theta with dtheta/dt = delta_omega, i.e. the
    // negative of the accumulated device phase; trapezoid on the resample.
    std::vector<std::complex<double>> in(n), out(n);
    double theta = 0.0;
    double prev_shift = grid::sample(o.grid, o.delta_omega, t0);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = t0 + dt * static_cast<double>(i);
        const double shift = grid::sample(o.grid, o.delta_omega, t);
        if (i > 0) theta += 0.5 * (prev_shift + shift) * dt;
        prev_shift = shift;
        const double amp =
            std::sqrt(std::max(grid::sample(q.grid, q.envelope_sq, t), 0.0));
        in[i] = {amp, 0.0};
        out[i] = amp * std::complex<double>(std::cos(theta), std::sin(theta));
    }
    fft(in);
    fft(out);

    Spectrum sp;
    sp.omega_offset.resize(n);
    sp.power_in.resize(n);
    sp.power_out.resize(n);
    const double dw = 2.0 * k::pi / (dt * static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        // fftshift: negative offsets first
        const std::size_t src = (i + n / 2) % n;
        const double kk = static_cast<double>(i) - static_cast<double>(n / 2);
        sp.omega_offset[i] = kk * dw;
        sp.power_in[i] = std::norm(in[src]);
        sp.power_out[i] = std::norm(out[src]);
    }
    return sp;
}

} // namespace eopulse::optics

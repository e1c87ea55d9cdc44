#pragma once

#include <string>
#include <vector>

#include "eopulse/circuit.hpp"
#include "eopulse/grid.hpp"
#include "eopulse/model.hpp"

namespace eopulse::optics {

/// Index shift, accumulated phase and instantaneous frequency shift of the
/// probe carrier, sampled on the charge trajectory's grid. The shift
/// decomposes into the part driven by d(E^2)/dt at fixed sigma1 (usual
/// self-phase modulation) and the part driven by dsigma1/dt at fixed E^2
/// (the circuit-induced extra shift). Both come from the chain rule through
/// the stored ODE rates, never from differencing delta_n.
struct OpticalTrajectory {
    grid::TimeGrid grid;
    std::vector<double> delta_n;            // dimensionless
    std::vector<double> phase;              // rad, omega L kappa delta_n / c
    std::vector<double> delta_omega;        // rad/s, -dphase/dt
    std::vector<double> delta_omega_usual;  // rad/s
    std::vector<double> delta_omega_extra;  // rad/s
    std::string run_id;
};

OpticalTrajectory frequency_shift(const model::Model& m,
                                  const circuit::ChargeTrajectory& q);

/// Photon bookkeeping of the shifted pulse. flux_out == flux_in per sample
/// (photon number is conserved; only the carrier frequency moves), so the
/// photon balance is exact by construction and the quadrature error of the
/// flux integral is reported separately.
struct PulseRecord {
    grid::TimeGrid grid;
    std::vector<double> flux_in;    // photons/s, W^2 I(t) / (hbar omega)
    std::vector<double> flux_out;   // photons/s
    std::vector<double> omega_out;  // rad/s, omega + delta_omega
    std::vector<double> delta_I;    // W/m^2, I delta_omega / omega
    double photons_in = 0.0;
    double photons_out = 0.0;
    double photon_quadrature_error = 0.0; // Richardson estimate, relative
    double energy_in = 0.0;               // J
    double energy_out = 0.0;              // J
    std::string run_id;
};

PulseRecord apply_shift_to_pulse(const model::Model& m,
                                 const circuit::ChargeTrajectory& q,
                                 const OpticalTrajectory& o);

/// Diagnostic power spectrum of the complex envelope before and after the
/// device, on a uniform 2^k resample of the full grid span.
struct Spectrum {
    std::vector<double> omega_offset; // rad/s relative to the carrier
    std::vector<double> power_in;
    std::vector<double> power_out;
};

Spectrum pulse_spectrum(const model::Model& m,
                        const circuit::ChargeTrajectory& q,
                        const OpticalTrajectory& o, std::size_t points = 4096);

} // namespace eopulse::optics

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "eopulse/envelope.hpp"
#include "eopulse/grid.hpp"
#include "eopulse/model.hpp"
#include "eopulse/network.hpp"

namespace eopulse::circuit {

/// Screening-charge trajectory and everything sampled on its grid. FP here is
/// the polarization-induced field inside the electro-optic medium; F1 is the
/// screening field sigma1/eps; J flows through the external loop. J and the
/// stored rates come from the ODE right-hand side evaluated at the
/// interpolated state, never from differencing.
struct ChargeTrajectory {
    grid::TimeGrid grid;
    std::vector<double> sigma1;       // C/m^2
    std::vector<double> F1;           // V/m
    std::vector<double> FP;           // V/m
    std::vector<double> FP_rate;      // V/m/s
    std::vector<double> F_total;      // V/m, F0 + FP + F1 inside the medium
    std::vector<double> J;            // A
    std::vector<double> dsigma1_dt;   // C/m^2/s
    std::vector<double> envelope_sq;  // E^2(t), V^2/m^2
    std::vector<std::vector<double>> circuit_state; // rational kind, per state dim

    double sigma_peak_abs = 0.0;
    bool tail_converged = true;
    double tail_end_fraction = 0.0;   // late |dsigma1/dt| / peak rate
    /// Index into grid.segments of the [0, T] plateau, or npos.
    std::size_t plateau_segment = npos;
    std::size_t pulse_end_segment = npos; // last segment overlapping the pulse
    std::string run_id;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    const grid::Segment& plateau() const;
};

/// Relaxation response to an ideal rectangular pulse through a pure
/// resistance: the closed-form reference the integrator is tested against.
/// sigma1(t) = -kappa eps FP (1 - e^(-t/tau)) while the pulse is on, then
/// decays exponentially from its value at T. Requires resistance kind and an
/// idealized rectangular envelope.
double sigma_analytic(const model::Model& m, double t);

/// dsigma1/dt of the same reference.
double sigma_analytic_rate(const model::Model& m, double t);

/// Uniform-field polarization response FP = -(eps0/eps) chi2_dc E^2.
double polarization_field(const model::Model& m, double envelope_sq);

ChargeTrajectory integrate_circuit(const model::Model& m,
                                   const envelope::Envelope& env);

/// Closed-loop system matrix of [sigma1, x_network]; eigenvalues give the
/// relaxation spectrum used for tail planning.
std::vector<double> closed_loop_matrix(const model::Model& m,
                                       const network::Realization& r);

double slowest_loop_time_constant(const model::Model& m);

} // namespace eopulse::circuit

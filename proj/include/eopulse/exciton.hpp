#pragma once

#include <string>
#include <vector>

#include "eopulse/circuit.hpp"
#include "eopulse/envelope.hpp"
#include "eopulse/grid.hpp"
#include "eopulse/model.hpp"

namespace eopulse::exciton {

/// Virtual-excitation regime check at the peak envelope amplitude:
/// lhs = (T_tr/hbar)^2 must exceed rhs = (mu E / Delta^2)^2 by the
/// configured margin for the pulse to create no real population.
struct AdiabaticityReport {
    double detuning = 0.0; // J
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;   // lhs/rhs, +inf for zero field
    bool adiabatic = false;
};

AdiabaticityReport check_adiabaticity(const model::Model& m,
                                      const envelope::Envelope& env);

/// Two-level state in the frame rotating at the carrier frequency, under the
/// rotating-wave approximation, co-integrated with the screening charge.
struct ExcitonTrajectory {
    grid::TimeGrid grid;
    std::vector<double> amp_re, amp_im; // excited-level amplitude
    std::vector<double> occupation;
    std::vector<double> level_energy;   // J; shifted only when feedback is on
    std::vector<double> FP_micro;       // V/m, -l N_x <a^dag a> / eps0
    double max_norm_error = 0.0;        // max ||state|^2 - 1| over samples
    std::string run_id;
};

struct MicroscopicRun {
    circuit::ChargeTrajectory charge; // FP column is the microscopic response
    ExcitonTrajectory exciton;
    AdiabaticityReport adiabaticity;
};

/// Integrates the coupled exciton + circuit dynamics. With feedback on, the
/// level energy acquires the dipole shift -l(FP + F1); with feedback off the
/// detuning stays bare (the configuration used for chi2 extraction). The
/// polarization field FP drives the circuit either way.
MicroscopicRun evolve_two_level(const model::Model& m,
                                const envelope::Envelope& env, bool feedback);

struct Chi2Fit {
    double chi2_dc = 0.0;  // m/V
    double residual = 0.0; // relative rms deviation from the quadratic law
    std::vector<double> field_sq;           // ladder abscissae E^2
    std::vector<double> polarization_field; // measured plateau FP
};

/// Runs a geometric ladder of weak drive amplitudes with feedback off, reads
/// the settled plateau polarization field, and fits FP = -(eps0/eps) chi2 E^2
/// by least squares through the origin.
Chi2Fit extract_chi2(const model::Model& m);

} // namespace eopulse::exciton

#pragma once

#include <string>

#include "eopulse/circuit.hpp"
#include "eopulse/model.hpp"
#include "eopulse/optics.hpp"

namespace eopulse::ledger {

/// Energy absorbed by the external network over the whole run: R J^2 for the
/// resistance kind, terminal voltage times current for the rational kind
/// (stored reactive energy returns to zero with the decayed state).
struct JouleEnergy {
    double value = 0.0;
    double closed_form = 0.0; // NaN unless resistance + ideal rectangular
    double quadrature_error = 0.0;
};

JouleEnergy joule_energy(const model::Model& m,
                         const circuit::ChargeTrajectory& q);

struct BatteryWork {
    double quadrature = 0.0;  // integral of V0 J dt
    double closed_form = 0.0; // V0 W L [sigma1(end) - sigma1(start)]
};

/// Net battery work over the full run; zero in closed form whenever sigma1
/// returns to its initial value.
BatteryWork battery_work(const model::Model& m,
                         const circuit::ChargeTrajectory& q);

/// Same integral over [t0, t1] only, without the decayed-tail precondition:
/// the instantaneous battery power is nonzero mid-run, only the net vanishes.
BatteryWork battery_work_window(const model::Model& m,
                                const circuit::ChargeTrajectory& q, double t0,
                                double t1);

/// Photon-energy loss of the pulse attributable to the circuit-driven part
/// of the frequency shift. The signed integral equals the network-absorbed
/// energy exactly (same integrand, rewritten); the absolute-value variant
/// counts energy shuttled back during smooth ramp-down separately and is
/// reported as a diagnostic.
struct OpticalLoss {
    double value = 0.0;       // -hbar * integral of delta_omega_extra * flux
    double abs_value = 0.0;   // hbar * integral of |delta_omega_extra| * flux
    double closed_form = 0.0; // NaN unless resistance + ideal rectangular
};

OpticalLoss optical_energy_loss(const model::Model& m,
                                const optics::OpticalTrajectory& o,
                                const optics::PulseRecord& p);

struct BalanceReport {
    double U_network = 0.0;        // Joule / absorbed energy, numerical
    double U_R_closed = 0.0;       // NaN when not applicable
    double U_battery = 0.0;        // numerical net battery work
    double U_battery_closed = 0.0;
    double U_ERS = 0.0;            // signed optical loss
    double U_ERS_abs = 0.0;
    double U_ERS_closed = 0.0;     // NaN when not applicable
    double photons_in = 0.0;
    double photons_out = 0.0;
    double photon_residual = 0.0;       // |out - in| / in
    double photon_quadrature_error = 0.0;
    double residual_energy = 0.0;       // |U_network - U_ERS| / max(|.|)
    double residual_battery = 0.0;      // |U_battery| / U_network
    double quadrature_error = 0.0;      // Joule-integral Richardson estimate
    bool pass_energy = false;
    bool pass_battery = false;
    bool pass_photon = false;
    bool pass = false;
    std::string run_id;
};

/// Certifies the balance identities on one run's trajectories. All inputs
/// must carry the same run id and a decayed tail.
BalanceReport balance_report(const model::Model& m,
                             const circuit::ChargeTrajectory& q,
                             const optics::OpticalTrajectory& o,
                             const optics::PulseRecord& p);

} // namespace eopulse::ledger

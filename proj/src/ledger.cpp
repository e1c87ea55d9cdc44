#include "eopulse/ledger.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "eopulse/constants.hpp"
#include "eopulse/kernels.hpp"
#include "eopulse/quadrature.hpp"

namespace eopulse::ledger {

namespace k = eopulse::constants;

namespace {

constexpr double kTailBound = 1e-6; // ledger precondition on the tail decay

void require_tail(const circuit::ChargeTrajectory& q) {
    if (q.sigma_peak_abs > 0.0 && q.tail_end_fraction > kTailBound)
        throw SimError(ErrorCode::TruncatedTail, "numerics.max_tail_time",
                       "the charge rate has not decayed to 1e-6 of its peak; "
                       "energy accounting would miss part of the tail");
}

bool idealized_resistance(const model::Model& m,
                          const circuit::ChargeTrajectory& q) {
    return m.circuit.kind == model::NetworkKind::resistance &&
           m.pulse.shape == model::EnvelopeShape::rectangular &&
           m.pulse.transient_duration == 0.0 &&
           q.plateau_segment != circuit::ChargeTrajectory::npos;
}

double nan_value() { return std::numeric_limits<double>::quiet_NaN(); }

struct Integral {
    double value = 0.0;
    double error = 0.0;
};

Integral integrate_column(const grid::TimeGrid& g,
                          std::span<const double> col) {
    Integral acc;
    for (const grid::Segment& s : g.segments) {
        const auto r = quadrature::simpson(col.subspan(s.first, s.count), s.dt);
        acc.value += r.value;
        acc.error += r.error_estimate;
    }
    return acc;
}

} // namespace

JouleEnergy joule_energy(const model::Model& m,
                         const circuit::ChargeTrajectory& q) {
    require_tail(q);
    JouleEnergy out;
    out.closed_form = nan_value();

    const std::size_t N = q.grid.size();
    std::vector<double> power(N);
    if (m.circuit.kind == model::NetworkKind::resistance) {
        if (m.open_circuit()) {
            // J is identically zero; R * J^2 would be inf * 0 sample-wise.
            out.value = 0.0;
        } else {
            kernels::multiply(q.J, q.J, power);
            kernels::scale(power, m.circuit.resistance, power);
            const Integral r = integrate_column(q.grid, power);
            out.value = r.value;
            out.quadrature_error = r.error;
        }
    } else {
        // u = -W (F1 + kappa FP), absorbed power u J
        std::vector<double> u(N);
        kernels::fma_abc(q.F1, q.FP, -m.geometry.cross_section,
                         -m.geometry.cross_section * m.material.fill_factor,
                         0.0, u);
        kernels::multiply(u, q.J, power);
        const Integral r = integrate_column(q.grid, power);
        out.value = r.value;
        out.quadrature_error = r.error;
    }

    if (idealized_resistance(m, q) && m.material.chi2_dc) {
        const double E2 = m.pulse.field_amplitude * m.pulse.field_amplitude;
        const double amp = m.material.fill_factor * m.geometry.cross_section *
                           m.geometry.device_length * k::eps0 *
                           (*m.material.chi2_dc) * E2;
        const double expo =
            std::isinf(m.derived.tau)
                ? 0.0
                : 1.0 - std::exp(-m.pulse.plateau_duration / m.derived.tau);
        out.closed_form = amp * amp * expo / m.derived.capacitance;
    }
    return out;
}

BatteryWork battery_work(const model::Model& m,
                         const circuit::ChargeTrajectory& q) {
    require_tail(q);
    return battery_work_window(m, q, q.grid.time.front(), q.grid.time.back());
}

BatteryWork battery_work_window(const model::Model& m,
                                const circuit::ChargeTrajectory& q, double t0,
                                double t1) {
    BatteryWork out;
    const double V0 = m.derived.battery_voltage;
    const double WL = m.geometry.cross_section * m.geometry.device_length;

    // Simpson over segments fully inside the window, trapezoid over the
    // sample range of partially covered ones.
    for (const grid::Segment& s : q.grid.segments) {
        const double a = std::max(t0, s.t0), b = std::min(t1, s.t1);
        if (b <= a) continue;
        const std::span<const double> col(q.J);
        if (a == s.t0 && b == s.t1) {
            out.quadrature +=
                V0 * quadrature::simpson(col.subspan(s.first, s.count), s.dt)
                         .value;
        } else {
            const auto idx = [&](double t) {
                return s.first + static_cast<std::size_t>(std::llround(
                                     (t - s.t0) / s.dt));
            };
            const std::size_t j0 = idx(a), j1 = idx(b);
            if (j1 > j0)
                out.quadrature +=
                    V0 * quadrature::trapezoid(col.subspan(j0, j1 - j0 + 1),
                                               s.dt);
        }
    }
    out.closed_form = V0 * WL * (grid::sample(q.grid, q.sigma1, t1) -
                                 grid::sample(q.grid, q.sigma1, t0));
    return out;
}

OpticalLoss optical_energy_loss(const model::Model&,
                                const optics::OpticalTrajectory& o,
                                const optics::PulseRecord& p) {
    OpticalLoss out;
    out.closed_form = nan_value();

    const std::size_t N = o.grid.size();
    std::vector<double> weighted(N), abs_shift(N);
    kernels::multiply(o.delta_omega_extra, p.flux_in, weighted);
    const Integral signed_i = integrate_column(o.grid, weighted);
    out.value = -k::hbar * signed_i.value;
    kernels::abs_val(o.delta_omega_extra, abs_shift);
    kernels::multiply(abs_shift, p.flux_in, weighted);
    out.abs_value = k::hbar * integrate_column(o.grid, weighted).value;
    return out;
}

BalanceReport balance_report(const model::Model& m,
                             const circuit::ChargeTrajectory& q,
                             const optics::OpticalTrajectory& o,
                             const optics::PulseRecord& p) {
    if ((!q.run_id.empty() && !o.run_id.empty() && q.run_id != o.run_id) ||
        (!q.run_id.empty() && !p.run_id.empty() && q.run_id != p.run_id) ||
        (!o.run_id.empty() && !p.run_id.empty() && o.run_id != p.run_id))
        throw SimError(ErrorCode::InconsistentRunIds, "",
                       "ledger inputs come from different runs");
    require_tail(q);

    BalanceReport rep;
    rep.run_id = !q.run_id.empty() ? q.run_id : o.run_id;

    const JouleEnergy joule = joule_energy(m, q);
    rep.U_network = joule.value;
    rep.U_R_closed = joule.closed_form;
    rep.quadrature_error = joule.quadrature_error;

    const BatteryWork bat = battery_work(m, q);
    rep.U_battery = bat.quadrature;
    rep.U_battery_closed = bat.closed_form;

    OpticalLoss loss = optical_energy_loss(m, o, p);
    if (idealized_resistance(m, q)) {
        // Closed form on the plateau: delta_n there changes only through the
        // screening field, so the endpoint difference is the sigma1-driven
        // part that the extra shift integrates to.
        const grid::Segment& plat = q.grid.segments[q.plateau_segment];
        const double dn0 = o.delta_n[plat.first];
        const double dnT = o.delta_n[plat.first + plat.count - 1];
        loss.closed_form = m.geometry.cross_section * m.geometry.cross_section *
                           m.derived.intensity * m.geometry.device_length *
                           m.material.fill_factor * (dnT - dn0) /
                           k::speed_of_light;
    }
    rep.U_ERS = loss.value;
    rep.U_ERS_abs = loss.abs_value;
    rep.U_ERS_closed = loss.closed_form;

    rep.photons_in = p.photons_in;
    rep.photons_out = p.photons_out;
    rep.photon_residual =
        p.photons_in > 0.0
            ? std::fabs(p.photons_out - p.photons_in) / p.photons_in
            : 0.0;
    rep.photon_quadrature_error = p.photon_quadrature_error;

    const double scale = std::max(std::fabs(rep.U_network), std::fabs(rep.U_ERS));
    rep.residual_energy =
        scale > 0.0 ? std::fabs(rep.U_network - rep.U_ERS) / scale : 0.0;
    rep.residual_battery =
        rep.U_network != 0.0 ? std::fabs(rep.U_battery) / std::fabs(rep.U_network)
                             : 0.0;

    rep.pass_energy = rep.residual_energy <= m.thresholds.residual_energy;
    rep.pass_battery = rep.residual_battery <= m.thresholds.residual_battery;
    rep.pass_photon = rep.photon_residual <= m.thresholds.photon &&
                      rep.photon_quadrature_error <= m.thresholds.photon;
    rep.pass = rep.pass_energy && rep.pass_battery && rep.pass_photon;
    return rep;
}

} // namespace eopulse::ledger

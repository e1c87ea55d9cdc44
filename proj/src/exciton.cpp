#include "eopulse/exciton.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "eopulse/constants.hpp"
#include "eopulse/kernels.hpp"
#include "eopulse/network.hpp"
#include "eopulse/ode.hpp"

namespace eopulse::exciton {

namespace k = eopulse::constants;

AdiabaticityReport check_adiabaticity(const model::Model& m,
                                      const envelope::Envelope& env) {
    m.require_mode(model::RunMode::microscopic);
    const auto& mi = *m.microscopic;
    const double delta = m.derived.detuning;
    if (delta <= 0.0)
        throw SimError(ErrorCode::ZeroDetuning, "microscopic.exciton_energy",
                       "detuning eps_x - hbar omega must be positive");

    AdiabaticityReport rep;
    rep.detuning = delta;
    // Effective switching time: the configured transient, or the envelope's
    // own feature time for shapes without one. Ideal rectangular edges are
    // instantaneous and therefore never adiabatic at nonzero field.
    double ttr = m.pulse.transient_duration;
    if (ttr <= 0.0) {
        if (m.pulse.shape == model::EnvelopeShape::gaussian)
            ttr = m.pulse.plateau_duration;
        else if (m.pulse.shape == model::EnvelopeShape::tabulated)
            ttr = env.min_feature_time();
    }
    rep.lhs = (ttr / k::hbar) * (ttr / k::hbar);
    const double drive = mi.transition_dipole * env.peak_amplitude();
    rep.rhs = (drive / (delta * delta)) * (drive / (delta * delta));
    rep.margin = rep.rhs > 0.0 ? rep.lhs / rep.rhs
                               : std::numeric_limits<double>::infinity();
    rep.adiabatic = rep.margin >= m.numerics.adiabatic_threshold;
    return rep;
}

namespace {

// State layout: [b0_re, b0_im, b1_re, b1_im, sigma1, x_network...]
struct CoupledSystem {
    const model::Model* m;
    const envelope::Envelope* env;
    network::Realization real;
    bool rational = false;
    bool feedback = false;
    double mu, l, Nx, delta;
    double kappa, eps, W, L, R, tau;

    std::size_t dim() const { return 5 + real.order; }

    double fp_of_occupation(double occ) const { return -l * Nx * occ / k::eps0; }

    void rhs(double t, std::span<const double> y, std::span<double> dydt,
             std::size_t piece, bool inside) const {
        const double E = inside ? env->amplitude(t, piece) : 0.0;
        const double half_rabi = 0.5 * mu * E / k::hbar;
        const double occ = y[2] * y[2] + y[3] * y[3];
        const double FP = fp_of_occupation(occ);
        const double F1 = y[4] / eps;
        const double det_eff = feedback ? delta - l * (FP + F1) : delta;
        const double rot = det_eff / k::hbar;

        // i b0' = -(Omega/2) b1 ; i b1' = -(Omega/2) b0 + (det/hbar) b1
        dydt[0] = -half_rabi * y[3];
        dydt[1] = half_rabi * y[2];
        dydt[2] = -half_rabi * y[1] + rot * y[3];
        dydt[3] = half_rabi * y[0] - rot * y[2];

        if (!rational) {
            dydt[4] = -y[4] / tau - kappa * FP / (R * L);
            return;
        }
        const double u = -W * (F1 + kappa * FP);
        double J = real.D * u;
        for (std::size_t i = 0; i < real.order; ++i)
            J += real.C[i] * y[5 + i];
        dydt[4] = J / (W * L);
        for (std::size_t i = 0; i < real.order; ++i) {
            double acc = real.B[i] * u;
            for (std::size_t j = 0; j < real.order; ++j)
                acc += real.A[i * real.order + j] * y[5 + j];
            dydt[5 + i] = acc;
        }
    }
};

struct Phase {
    double t0, t1;
    std::size_t piece;
    bool inside;
};

} // namespace

MicroscopicRun evolve_two_level(const model::Model& m,
                                const envelope::Envelope& env, bool feedback) {
    MicroscopicRun run;
    run.adiabaticity = check_adiabaticity(m, env);

    CoupledSystem sys;
    sys.m = &m;
    sys.env = &env;
    sys.feedback = feedback;
    sys.mu = m.microscopic->transition_dipole;
    sys.l = m.microscopic->static_dipole;
    sys.Nx = m.microscopic->exciton_density;
    sys.delta = m.derived.detuning;
    sys.kappa = m.material.fill_factor;
    sys.eps = m.derived.eps;
    sys.W = m.geometry.cross_section;
    sys.L = m.geometry.device_length;
    sys.rational = (m.circuit.kind == model::NetworkKind::rational);
    sys.R = m.circuit.resistance;
    sys.tau = m.derived.tau;
    if (sys.rational) {
        sys.real = network::realize_impedance(
            {m.circuit.impedance_num, m.circuit.impedance_den});
        if (!sys.real.stable())
            throw SimError(ErrorCode::UnstableNetwork, "circuit.impedance_num",
                           "network realization has a pole with Re >= 0");
    }

    // The rotating detuning phase must be resolved on top of the circuit
    // features: >= 20 steps per detuning period 2 pi hbar / Delta.
    const double detuning_period = 2.0 * k::pi * k::hbar / sys.delta;
    const double relax = circuit::slowest_loop_time_constant(m);
    double auto_max_step =
        std::min(detuning_period / 20.0, env.min_feature_time() / 50.0);
    if (!std::isinf(relax)) auto_max_step = std::min(auto_max_step, relax / 50.0);
    double max_step = auto_max_step;
    if (m.numerics.max_step > 0.0) {
        if (m.numerics.max_step > auto_max_step * (1.0 + 1e-12))
            throw SimError(
                ErrorCode::StepTooCoarse, "numerics.max_step",
                "max_step must resolve the detuning period by >= 20 steps");
        max_step = m.numerics.max_step;
    }

    ode::Options opts;
    opts.rel_tol = m.numerics.rel_tol;
    opts.abs_tol = m.numerics.abs_tol;
    opts.max_step = max_step;

    std::vector<Phase> phases;
    {
        const std::vector<double>& bp = env.breakpoints();
        for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
            const double mid = 0.5 * (bp[i] + bp[i + 1]);
            phases.push_back({bp[i], bp[i + 1], env.piece_containing(mid), true});
        }
    }

    ode::PiecewiseSolution sol;
    std::vector<double> y(sys.dim(), 0.0);
    y[0] = 1.0; // ground level
    double sigma_peak = 0.0;
    double rate_peak = 0.0;
    std::vector<double> dd(sys.dim());

    // Returns max |dsigma1/dt| over the last quarter of the window. Unlike
    // the bare circuit, sigma1 does not return to zero here: the exciton has
    // no decay channel, so the small occupation left behind by a finite ramp
    // freezes FP at a nonzero constant and sigma1 settles to the matching
    // equilibrium. The loop current is what dies out, so convergence probes
    // the charge rate instead of the charge.
    auto run_phase = [&](const Phase& ph) {
        const ode::Rhs rhs = [&sys, &ph](double t, std::span<const double> yy,
                                         std::span<double> ddd) {
            sys.rhs(t, yy, ddd, ph.piece, ph.inside);
        };
        ode::DenseSolution part = ode::integrate(rhs, y, ph.t0, ph.t1, opts);
        const double probe_from = ph.t1 - 0.25 * (ph.t1 - ph.t0);
        double late_peak = 0.0;
        for (const auto& node : part.nodes()) {
            sigma_peak = std::max(sigma_peak, std::fabs(node.y[4]));
            sys.rhs(node.t, node.y, dd, ph.piece, ph.inside);
            const double rate = std::fabs(dd[4]);
            rate_peak = std::max(rate_peak, rate);
            if (node.t >= probe_from) late_peak = std::max(late_peak, rate);
        }
        const auto fin = part.final_state();
        y.assign(fin.begin(), fin.end());
        sol.append(std::move(part));
        return late_peak;
    };

    for (const Phase& ph : phases)
        run_phase(ph);

    const double pulse_end = env.end();
    double t_final = pulse_end;
    bool tail_converged = true;
    double tail_late_peak = 0.0;
    if (!std::isinf(relax) && rate_peak > 0.0) {
        const double target = m.numerics.tail_decay_target * rate_peak;
        const double cap = m.numerics.max_tail_time > 0.0
                               ? pulse_end + m.numerics.max_tail_time
                               : pulse_end + 80.0 * relax;
        double chunk = m.numerics.tail_factor * relax;
        tail_late_peak = rate_peak;
        while (true) {
            const double t1 = std::min(t_final + chunk, cap);
            if (t1 > t_final) {
                tail_late_peak = run_phase({t_final, t1, 0, false});
                t_final = t1;
            }
            if (tail_late_peak <= target) break;
            if (t_final >= cap) {
                tail_converged = false;
                break;
            }
            chunk = 4.0 * relax;
        }
    }

    std::vector<double> boundaries = env.breakpoints();
    if (t_final > pulse_end) boundaries.push_back(t_final);

    circuit::ChargeTrajectory& q = run.charge;
    q.grid = grid::TimeGrid::build(boundaries, m.numerics.output_points);
    q.tail_converged = tail_converged;
    q.sigma_peak_abs = sigma_peak;
    q.tail_end_fraction = rate_peak > 0.0 ? tail_late_peak / rate_peak : 0.0;

    ExcitonTrajectory& x = run.exciton;
    x.grid = q.grid;

    const std::size_t N = q.grid.size();
    q.sigma1.resize(N);
    q.F1.resize(N);
    q.FP.resize(N);
    q.FP_rate.resize(N);
    q.F_total.resize(N);
    q.J.resize(N);
    q.dsigma1_dt.resize(N);
    q.envelope_sq.resize(N);
    if (sys.rational)
        q.circuit_state.assign(sys.real.order, std::vector<double>(N));
    x.amp_re.resize(N);
    x.amp_im.resize(N);
    x.occupation.resize(N);
    x.level_energy.resize(N);
    x.FP_micro.resize(N);

    const double eps_x = m.microscopic->exciton_energy;
    std::vector<double> state(sys.dim());
    for (std::size_t si = 0; si < q.grid.segments.size(); ++si) {
        const grid::Segment& s = q.grid.segments[si];
        const double mid = 0.5 * (s.t0 + s.t1);
        const bool inside = mid >= env.start() && mid <= env.end();
        const std::size_t piece = env.piece_containing(mid);
        if (env.has_plateau() && s.t0 == env.plateau_begin() &&
            s.t1 == env.plateau_end())
            q.plateau_segment = si;
        if (inside) q.pulse_end_segment = si;

        for (std::size_t j = 0; j < s.count; ++j) {
            const std::size_t i = s.first + j;
            const double t = q.grid.time[i];
            sol.evaluate(t, state);

            const double E = inside ? env.amplitude(t, piece) : 0.0;
            q.envelope_sq[i] = E * E;
            const double occ = state[2] * state[2] + state[3] * state[3];
            const double FP = sys.fp_of_occupation(occ);
            const double F1 = state[4] / sys.eps;
            x.amp_re[i] = state[2];
            x.amp_im[i] = state[3];
            x.occupation[i] = occ;
            x.FP_micro[i] = FP;
            x.level_energy[i] = feedback ? eps_x - sys.l * (FP + F1) : eps_x;
            const double norm =
                state[0] * state[0] + state[1] * state[1] + occ;
            x.max_norm_error =
                std::max(x.max_norm_error, std::fabs(norm - 1.0));

            q.sigma1[i] = state[4];
            q.F1[i] = F1;
            q.FP[i] = FP;
            q.F_total[i] = m.circuit.bias_field + FP + F1;
            // d<occ>/dt = Omega (b1_im b0_re - b1_re b0_im) via the RHS
            const double half_rabi = 0.5 * sys.mu * E / k::hbar;
            q.FP_rate[i] = sys.fp_of_occupation(
                2.0 * half_rabi * (state[3] * state[0] - state[2] * state[1]));
            if (!sys.rational) {
                q.dsigma1_dt[i] = m.open_circuit()
                                      ? 0.0
                                      : -state[4] / sys.tau -
                                            sys.kappa * FP / (sys.R * sys.L);
            } else {
                const double u = -sys.W * (F1 + sys.kappa * FP);
                double J = sys.real.D * u;
                for (std::size_t d = 0; d < sys.real.order; ++d) {
                    J += sys.real.C[d] * state[5 + d];
                    q.circuit_state[d][i] = state[5 + d];
                }
                q.dsigma1_dt[i] = J / (sys.W * sys.L);
            }
            q.J[i] = sys.W * sys.L * q.dsigma1_dt[i];
        }
    }
    return run;
}

Chi2Fit extract_chi2(const model::Model& m) {
    m.require_mode(model::RunMode::microscopic);
    const auto& mi = *m.microscopic;
    const double delta = m.derived.detuning;
    if (delta <= 0.0)
        throw SimError(ErrorCode::ZeroDetuning, "microscopic.exciton_energy",
                       "detuning eps_x - hbar omega must be positive");

    // Weak-drive ladder: one decade below min(configured amplitude, the
    // amplitude where mu E / Delta = 0.03), settled-plateau readout.
    const double e_cap = 0.03 * delta / mi.transition_dipole;
    const double e_top = m.pulse.field_amplitude > 0.0
                             ? std::min(m.pulse.field_amplitude, e_cap)
                             : e_cap;
    constexpr int kPoints = 8;

    model::Model probe = m;
    probe.pulse.shape = model::EnvelopeShape::rectangular;
    probe.pulse.transient_duration = 100.0 * k::hbar / delta;
    probe.pulse.plateau_duration = 60.0 * k::hbar / delta;

    Chi2Fit fit;
    for (int p = 0; p < kPoints; ++p) {
        const double E =
            e_top * std::pow(10.0, -static_cast<double>(kPoints - 1 - p) /
                                       (kPoints - 1));
        probe.pulse.field_amplitude = E;
        const envelope::Envelope env = envelope::Envelope::make(probe.pulse);
        const MicroscopicRun run = evolve_two_level(probe, env, false);
        const grid::Segment& plat = run.charge.plateau();
        const std::size_t mid = plat.first + plat.count / 2;
        fit.field_sq.push_back(E * E);
        fit.polarization_field.push_back(run.exciton.FP_micro[mid]);
    }

    double sxy = 0.0, sxx = 0.0;
    for (int p = 0; p < kPoints; ++p) {
        sxy += fit.field_sq[p] * fit.polarization_field[p];
        sxx += fit.field_sq[p] * fit.field_sq[p];
    }
    const double slope = sxy / sxx;
    double dev = 0.0, mag = 0.0;
    for (int p = 0; p < kPoints; ++p) {
        const double r = fit.polarization_field[p] - slope * fit.field_sq[p];
        dev += r * r;
        mag += fit.polarization_field[p] * fit.polarization_field[p];
    }
    fit.residual = mag > 0.0 ? std::sqrt(dev / mag) : 0.0;
    fit.chi2_dc = -slope * m.derived.eps / k::eps0;
    if (fit.residual > 1e-3)
        throw SimError(ErrorCode::NonquadraticResponse, "pulse.field_amplitude",
                       "plateau polarization is not quadratic in the field; "
                       "drive too strong for the virtual-excitation regime");
    return fit;
}

} // namespace eopulse::exciton

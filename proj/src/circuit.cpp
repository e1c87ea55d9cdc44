#include "eopulse/circuit.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

#include "eopulse/constants.hpp"
#include "eopulse/kernels.hpp"
#include "eopulse/ode.hpp"

namespace eopulse::circuit {

namespace k = eopulse::constants;

const grid::Segment& ChargeTrajectory::plateau() const {
    if (plateau_segment == npos)
        throw SimError(ErrorCode::GridMismatch, "",
                       "trajectory has no rectangular plateau segment");
    return grid.segments[plateau_segment];
}

double polarization_field(const model::Model& m, double envelope_sq) {
    if (!m.material.chi2_dc)
        throw SimError(ErrorCode::MissingField, "material.chi2_dc",
                       "polarization field needs the rectification susceptibility");
    return -(k::eps0 / m.derived.eps) * (*m.material.chi2_dc) * envelope_sq;
}

namespace {

void require_analytic_regime(const model::Model& m) {
    if (m.circuit.kind != model::NetworkKind::resistance)
        throw SimError(ErrorCode::UnsupportedNetwork, "circuit.kind",
                       "closed-form relaxation exists only for the resistance kind");
    if (m.pulse.shape != model::EnvelopeShape::rectangular ||
        m.pulse.transient_duration != 0.0)
        throw SimError(ErrorCode::BadValue, "pulse.shape",
                       "closed-form relaxation requires the ideal rectangular pulse");
}

} // namespace

double sigma_analytic(const model::Model& m, double t) {
    require_analytic_regime(m);
    const double FP = polarization_field(
        m, m.pulse.field_amplitude * m.pulse.field_amplitude);
    const double tau = m.derived.tau;
    const double kappa = m.material.fill_factor;
    const double eps = m.derived.eps;
    const double T = m.pulse.plateau_duration;
    if (t <= 0.0) return 0.0;
    if (t <= T)
        return -kappa * eps * FP * (1.0 - std::exp(-t / tau));
    const double at_T = -kappa * eps * FP * (1.0 - std::exp(-T / tau));
    return at_T * std::exp((T - t) / tau);
}

double sigma_analytic_rate(const model::Model& m, double t) {
    require_analytic_regime(m);
    const double FP = polarization_field(
        m, m.pulse.field_amplitude * m.pulse.field_amplitude);
    const double tau = m.derived.tau;
    const double kappa = m.material.fill_factor;
    const double eps = m.derived.eps;
    const double T = m.pulse.plateau_duration;
    if (t <= 0.0) return 0.0;
    if (std::isinf(tau)) return 0.0;
    if (t <= T) return -kappa * eps * FP * std::exp(-t / tau) / tau;
    const double at_T = -kappa * eps * FP * (1.0 - std::exp(-T / tau));
    return -at_T * std::exp((T - t) / tau) / tau;
}

std::vector<double> closed_loop_matrix(const model::Model& m,
                                       const network::Realization& r) {
    // State [sigma1, x]:
    //   u = -W sigma1/eps  (drive off)
    //   sigma1' = (C x + D u)/(W L)
    //   x' = A x + B u
    const double W = m.geometry.cross_section;
    const double L = m.geometry.device_length;
    const double eps = m.derived.eps;
    const std::size_t n = r.order + 1;
    std::vector<double> M(n * n, 0.0);
    M[0] = -r.D / (L * eps);
    for (std::size_t j = 0; j < r.order; ++j)
        M[j + 1] = r.C[j] / (W * L);
    for (std::size_t i = 0; i < r.order; ++i) {
        M[(i + 1) * n] = -r.B[i] * W / eps;
        for (std::size_t j = 0; j < r.order; ++j)
            M[(i + 1) * n + (j + 1)] = r.A[i * r.order + j];
    }
    return M;
}

double slowest_loop_time_constant(const model::Model& m) {
    if (m.circuit.kind == model::NetworkKind::resistance)
        return m.derived.tau; // may be +inf for the open circuit
    const network::Realization r = network::realize_impedance(
        {m.circuit.impedance_num, m.circuit.impedance_den});
    const std::vector<double> M = closed_loop_matrix(m, r);
    const std::size_t n = r.order + 1;
    Eigen::MatrixXd mat(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            mat(i, j) = M[i * n + j];
    Eigen::EigenSolver<Eigen::MatrixXd> solver(mat, false);
    // A DC-blocking network (den(0) = 0) conserves one charge combination,
    // so the closed loop carries an exact zero eigenvalue. Rounding noise on
    // that zero scales with the matrix norm and can masquerade as a slow
    // mode; drop the smallest-magnitude eigenvalue before reading the decay.
    std::size_t skip = n;
    if (m.circuit.impedance_den[0] == 0.0) {
        double min_mag = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
            const double mag = std::abs(solver.eigenvalues()(i));
            if (mag < min_mag) {
                min_mag = mag;
                skip = static_cast<std::size_t>(i);
            }
        }
    }
    double slowest = 0.0;
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
        if (static_cast<std::size_t>(i) == skip) continue;
        const double re = std::fabs(solver.eigenvalues()(i).real());
        if (re > 0.0) slowest = std::max(slowest, 1.0 / re);
    }
    if (slowest == 0.0)
        throw SimError(ErrorCode::UnstableNetwork, "circuit",
                       "closed loop has no decaying mode");
    return slowest;
}

namespace {

struct LoopSystem {
    const model::Model* m;
    const envelope::Envelope* env;
    network::Realization real; // identity D = 1/R for the resistance kind
    bool rational = false;
    double kappa, eps, W, L, R, tau;

    std::size_t dim() const { return 1 + real.order; }

    // One smooth envelope piece at a time; `inside` false means E = 0.
    void rhs(double t, std::span<const double> y, std::span<double> dydt,
             std::size_t piece, bool inside) const {
        const double esq = inside ? env->amplitude_sq(t, piece) : 0.0;
        const double FP = -(k::eps0 / eps) * chi2() * esq;
        if (!rational) {
            // sigma1' = -sigma1/(C0 R) - kappa FP/(R L)
            dydt[0] = -y[0] / tau - kappa * FP / (R * L);
            return;
        }
        const double u = -W * (y[0] / eps + kappa * FP);
        double J = real.D * u;
        for (std::size_t i = 0; i < real.order; ++i)
            J += real.C[i] * y[1 + i];
        dydt[0] = J / (W * L);
        for (std::size_t i = 0; i < real.order; ++i) {
            double acc = real.B[i] * u;
            for (std::size_t j = 0; j < real.order; ++j)
                acc += real.A[i * real.order + j] * y[1 + j];
            dydt[1 + i] = acc;
        }
    }

    double chi2() const { return *m->material.chi2_dc; }
};

struct Phase {
    double t0, t1;
    std::size_t piece;
    bool inside;
};

} // namespace

ChargeTrajectory integrate_circuit(const model::Model& m,
                                   const envelope::Envelope& env) {
    LoopSystem sys;
    sys.m = &m;
    sys.env = &env;
    sys.kappa = m.material.fill_factor;
    sys.eps = m.derived.eps;
    sys.W = m.geometry.cross_section;
    sys.L = m.geometry.device_length;
    sys.rational = (m.circuit.kind == model::NetworkKind::rational);
    sys.R = m.circuit.resistance;
    sys.tau = m.derived.tau;

    if (sys.rational) {
        const network::Impedance z{m.circuit.impedance_num, m.circuit.impedance_den};
        sys.real = network::realize_impedance(z);
        if (!sys.real.stable())
            throw SimError(ErrorCode::UnstableNetwork, "circuit.impedance_num",
                           "network realization has a pole with Re >= 0");
    }

    const double relax = slowest_loop_time_constant(m); // +inf when open
    const double feature =
        std::min(env.min_feature_time(), std::isinf(relax) ? env.min_feature_time()
                                                           : relax);
    const double auto_max_step = feature / 50.0;
    double max_step = auto_max_step;
    if (m.numerics.max_step > 0.0) {
        if (m.numerics.max_step > auto_max_step * (1.0 + 1e-12))
            throw SimError(ErrorCode::StepTooCoarse, "numerics.max_step",
                           "max_step must resolve min(relaxation, transient)/50");
        max_step = m.numerics.max_step;
    }

    ode::Options opts;
    opts.rel_tol = m.numerics.rel_tol;
    opts.abs_tol = m.numerics.abs_tol;
    opts.max_step = max_step;

    // Integration phases: the envelope's smooth pieces, then the tail.
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
    std::vector<double> dydt(sys.dim());
    double sigma_peak = 0.0;
    double rate_peak = 0.0;

    // Returns max |dsigma1/dt| over the last quarter of the window: the tail
    // convergence probe. The rate decays to zero even when sigma1 settles at
    // a displaced value, and a max over a window cannot sit on a zero
    // crossing of an oscillatory decay.
    auto run_phase = [&](const Phase& ph) {
        const ode::Rhs rhs = [&sys, &ph](double t, std::span<const double> yy,
                                         std::span<double> dd) {
            sys.rhs(t, yy, dd, ph.piece, ph.inside);
        };
        ode::DenseSolution part = ode::integrate(rhs, y, ph.t0, ph.t1, opts);
        const double probe_from = ph.t1 - 0.25 * (ph.t1 - ph.t0);
        double late_peak = 0.0;
        for (const auto& node : part.nodes()) {
            sigma_peak = std::max(sigma_peak, std::fabs(node.y[0]));
            sys.rhs(node.t, node.y, dydt, ph.piece, ph.inside);
            const double rate = std::fabs(dydt[0]);
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

    // Tail: at least tail_factor relaxation times, then extend until the
    // charge rate decays below the target fraction of its peak (or the cap
    // is reached).
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

    // Output grid: envelope breakpoints plus one tail segment.
    std::vector<double> boundaries = env.breakpoints();
    if (t_final > pulse_end) boundaries.push_back(t_final);

    ChargeTrajectory traj;
    traj.grid = grid::TimeGrid::build(boundaries, m.numerics.output_points);
    traj.tail_converged = tail_converged;
    traj.sigma_peak_abs = sigma_peak;
    traj.tail_end_fraction =
        rate_peak > 0.0 ? tail_late_peak / rate_peak : 0.0;

    const std::size_t N = traj.grid.size();
    traj.sigma1.resize(N);
    traj.F1.resize(N);
    traj.FP.resize(N);
    traj.FP_rate.resize(N);
    traj.F_total.resize(N);
    traj.J.resize(N);
    traj.dsigma1_dt.resize(N);
    traj.envelope_sq.resize(N);
    if (sys.rational)
        traj.circuit_state.assign(sys.real.order, std::vector<double>(N));

    std::vector<double> esq_rate(N);
    std::vector<double> state(sys.dim());

    for (std::size_t si = 0; si < traj.grid.segments.size(); ++si) {
        const grid::Segment& s = traj.grid.segments[si];
        const double mid = 0.5 * (s.t0 + s.t1);
        const bool inside = mid >= env.start() && mid <= env.end();
        const std::size_t piece = env.piece_containing(mid);
        if (env.has_plateau() && s.t0 == env.plateau_begin() &&
            s.t1 == env.plateau_end())
            traj.plateau_segment = si;
        if (inside) traj.pulse_end_segment = si;

        for (std::size_t j = 0; j < s.count; ++j) {
            const std::size_t i = s.first + j;
            const double t = traj.grid.time[i];
            traj.envelope_sq[i] = inside ? env.amplitude_sq(t, piece) : 0.0;
            esq_rate[i] = inside ? env.amplitude_sq_rate(t, piece) : 0.0;
            sol.evaluate(t, state);
            traj.sigma1[i] = state[0];
            for (std::size_t d = 0; d < sys.real.order; ++d)
                traj.circuit_state[d][i] = state[1 + d];
        }
    }

    const double chi2 = sys.chi2();
    const double fp_of_esq = -(k::eps0 / sys.eps) * chi2;
    kernels::scale(traj.envelope_sq, fp_of_esq, traj.FP);
    kernels::scale(esq_rate, fp_of_esq, traj.FP_rate);
    kernels::scale(traj.sigma1, 1.0 / sys.eps, traj.F1);
    kernels::fma_abc(traj.FP, traj.F1, 1.0, 1.0, m.circuit.bias_field,
                     traj.F_total);

    if (!sys.rational) {
        if (m.open_circuit()) {
            std::fill(traj.dsigma1_dt.begin(), traj.dsigma1_dt.end(), 0.0);
        } else {
            // sigma1' = -sigma1/tau - kappa FP/(R L), as in the RHS
            kernels::fma_abc(traj.sigma1, traj.FP, -1.0 / sys.tau,
                             -sys.kappa / (sys.R * sys.L), 0.0, traj.dsigma1_dt);
        }
    } else {
        std::vector<double> u(N);
        kernels::fma_abc(traj.sigma1, traj.FP, -sys.W / sys.eps,
                         -sys.kappa * sys.W, 0.0, u);
        std::vector<double> Jcol(N);
        kernels::scale(u, sys.real.D, Jcol);
        for (std::size_t d = 0; d < sys.real.order; ++d)
            kernels::fma_abc(traj.circuit_state[d], Jcol, sys.real.C[d], 1.0, 0.0,
                             Jcol);
        kernels::scale(Jcol, 1.0 / (sys.W * sys.L), traj.dsigma1_dt);
    }
    kernels::scale(traj.dsigma1_dt, sys.W * sys.L, traj.J);

    return traj;
}

} // namespace eopulse::circuit

#include "eopulse/ode.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace eopulse::ode {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                 a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0,
                 a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                 b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
// b - b_hat (embedded 4th-order pair), used for the error estimate.
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;

double error_norm(std::span<const double> err, std::span<const double> y0,
                  std::span<const double> y1, double atol, double rtol) {
    double acc = 0.0;
    const std::size_t n = err.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double sc = atol + rtol * std::max(std::fabs(y0[i]), std::fabs(y1[i]));
        const double r = err[i] / sc;
        acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(n));
}

double initial_step(const Rhs& rhs, double t0, std::span<const double> y0,
                    std::span<const double> f0, double direction, double span,
                    double atol, double rtol) {
    const std::size_t n = y0.size();
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double sc = atol + rtol * std::fabs(y0[i]);
        const double a = y0[i] / sc;
        const double b = f0[i] / sc;
        d0 += a * a;
        d1 += b * b;
    }
    d0 = std::sqrt(d0 / n);
    d1 = std::sqrt(d1 / n);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 * span : 0.01 * (d0 / d1);
    h0 = std::min(h0, span);

    std::vector<double> y1(n), f1(n);
    for (std::size_t i = 0; i < n; ++i)
        y1[i] = y0[i] + direction * h0 * f0[i];
    rhs(t0 + direction * h0, y1, f1);
    double d2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double sc = atol + rtol * std::fabs(y0[i]);
        const double df = (f1[i] - f0[i]) / sc;
        d2 += df * df;
    }
    d2 = std::sqrt(d2 / n) / h0;

    const double dmax = std::max(d1, d2);
    double h1 = (dmax <= 1e-15) ? std::max(1e-6 * span, h0 * 1e-3)
                                : std::pow(0.01 / dmax, 0.2);
    return std::min({100.0 * h0, h1, span});
}

} // namespace

DenseSolution::DenseSolution(std::size_t dim, std::vector<StepNode> nodes)
    : dim_(dim), nodes_(std::move(nodes)) {}

std::size_t DenseSolution::locate(double t) const {
    // Index of the step interval [nodes_[k], nodes_[k+1]] containing t.
    const auto it = std::upper_bound(
        nodes_.begin(), nodes_.end(), t,
        [](double value, const StepNode& node) { return value < node.t; });
    std::size_t k = static_cast<std::size_t>(it - nodes_.begin());
    if (k == 0) return 0;
    if (k >= nodes_.size()) return nodes_.size() - 2;
    return k - 1;
}

void DenseSolution::evaluate(double t, std::span<double> y_out) const {
    const std::size_t k = locate(t);
    const StepNode& n0 = nodes_[k];
    const StepNode& n1 = nodes_[k + 1];
    const double h = n1.t - n0.t;
    if (h == 0.0) {
        std::copy(n1.y.begin(), n1.y.end(), y_out.begin());
        return;
    }
    double s = (t - n0.t) / h;
    s = std::clamp(s, 0.0, 1.0);
    // Cubic Hermite basis.
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    const double h10 = s3 - 2.0 * s2 + s;
    const double h01 = -2.0 * s3 + 3.0 * s2;
    const double h11 = s3 - s2;
    for (std::size_t i = 0; i < dim_; ++i)
        y_out[i] = h00 * n0.y[i] + h10 * h * n0.f[i] + h01 * n1.y[i] +
                   h11 * h * n1.f[i];
}

DenseSolution integrate(const Rhs& rhs, std::span<const double> y0, double t0,
                        double t1, const Options& opts) {
    if (!(t1 > t0))
        throw std::invalid_argument("ode::integrate requires t1 > t0");
    const std::size_t n = y0.size();
    const double span = t1 - t0;

    std::vector<double> y(y0.begin(), y0.end());
    std::vector<double> f(n);
    rhs(t0, y, f);

    std::vector<StepNode> nodes;
    nodes.push_back({t0, y, f});

    double h = opts.first_step > 0.0
                   ? opts.first_step
                   : initial_step(rhs, t0, y, f, 1.0, span, opts.abs_tol, opts.rel_tol);
    h = std::min(h, opts.max_step);

    std::vector<double> k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);
    std::vector<double> ytmp(n), ynew(n), err(n);

    double t = t0;
    std::size_t steps = 0;
    double prev_err = 1.0; // for the PI controller

    while (t < t1) {
        if (++steps > opts.max_steps)
            throw std::runtime_error("ode::integrate exceeded max_steps");
        h = std::min({h, opts.max_step, t1 - t});
        if (h <= std::fabs(t) * 1e-16 + 1e-300)
            throw std::runtime_error("ode::integrate step size underflow");

        // Stage evaluations (FSAL: f holds k1).
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a21 * f[i]);
        rhs(t + c2 * h, ytmp, k2);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a31 * f[i] + a32 * k2[i]);
        rhs(t + c3 * h, ytmp, k3);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a41 * f[i] + a42 * k2[i] + a43 * k3[i]);
        rhs(t + c4 * h, ytmp, k4);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a51 * f[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        rhs(t + c5 * h, ytmp, k5);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a61 * f[i] + a62 * k2[i] + a63 * k3[i] +
                                  a64 * k4[i] + a65 * k5[i]);
        rhs(t + h, ytmp, k6);
        for (std::size_t i = 0; i < n; ++i)
            ynew[i] = y[i] + h * (b1 * f[i] + b3 * k3[i] + b4 * k4[i] +
                                  b5 * k5[i] + b6 * k6[i]);
        rhs(t + h, ynew, k7);

        for (std::size_t i = 0; i < n; ++i)
            err[i] = h * (e1 * f[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                          e6 * k6[i] + e7 * k7[i]);
        const double enorm = error_norm(err, y, ynew, opts.abs_tol, opts.rel_tol);

        if (enorm <= 1.0) {
            t += h;
            y.swap(ynew);
            f.swap(k7);
            nodes.push_back({t, y, f});
            const double grow =
                0.9 * std::pow(std::max(enorm, 1e-10), -0.7 / 5.0) *
                std::pow(std::max(prev_err, 1e-10), 0.4 / 5.0);
            h *= std::clamp(grow, 0.2, 5.0);
            prev_err = std::max(enorm, 1e-10);
        } else {
            h *= std::clamp(0.9 * std::pow(enorm, -0.2), 0.1, 0.9);
        }
    }

    return DenseSolution(n, std::move(nodes));
}

void PiecewiseSolution::append(DenseSolution s) { parts_.push_back(std::move(s)); }

std::size_t PiecewiseSolution::step_count() const {
    std::size_t total = 0;
    for (const auto& p : parts_) total += p.step_count();
    return total;
}

void PiecewiseSolution::evaluate(double t, std::span<double> y_out) const {
    // Boundary times resolve to the later part (right-continuous).
    for (std::size_t i = 0; i + 1 < parts_.size(); ++i) {
        if (t < parts_[i + 1].t_begin()) {
            parts_[i].evaluate(t, y_out);
            return;
        }
    }
    parts_.back().evaluate(t, y_out);
}

} // namespace eopulse::ode

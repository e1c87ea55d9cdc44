#include "eopulse/network.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

#include "eopulse/errors.hpp"

namespace eopulse::network {

namespace {

std::vector<double> stripped(const std::vector<double>& coeffs) {
    std::vector<double> c = coeffs;
    while (c.size() > 1 && c.back() == 0.0) c.pop_back();
    return c;
}

bool is_zero_poly(const std::vector<double>& c) {
    return std::all_of(c.begin(), c.end(), [](double v) { return v == 0.0; });
}

std::complex<double> horner(const std::vector<double>& c, std::complex<double> s) {
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t i = c.size(); i-- > 0;)
        acc = acc * s + c[i];
    return acc;
}

} // namespace

std::complex<double> Impedance::evaluate(std::complex<double> s) const {
    return horner(num, s) / horner(den, s);
}

std::complex<double> Realization::admittance_at(std::complex<double> s) const {
    if (order == 0) return {D, 0.0};
    using Mat = Eigen::MatrixXcd;
    using Vec = Eigen::VectorXcd;
    Mat m(order, order);
    for (std::size_t i = 0; i < order; ++i)
        for (std::size_t j = 0; j < order; ++j)
            m(i, j) = std::complex<double>(-A[i * order + j], 0.0);
    for (std::size_t i = 0; i < order; ++i)
        m(i, i) += s;
    Vec b(order);
    for (std::size_t i = 0; i < order; ++i)
        b(i) = B[i];
    const Vec x = m.partialPivLu().solve(b);
    std::complex<double> acc(D, 0.0);
    for (std::size_t i = 0; i < order; ++i)
        acc += C[i] * x(i);
    return acc;
}

std::vector<std::complex<double>> Realization::poles() const {
    if (order == 0) return {};
    Eigen::MatrixXd m(order, order);
    for (std::size_t i = 0; i < order; ++i)
        for (std::size_t j = 0; j < order; ++j)
            m(i, j) = A[i * order + j];
    Eigen::EigenSolver<Eigen::MatrixXd> solver(m, /*computeEigenvectors=*/false);
    std::vector<std::complex<double>> out(order);
    for (std::size_t i = 0; i < order; ++i)
        out[i] = solver.eigenvalues()(i);
    return out;
}

double Realization::slowest_time_constant() const {
    double slowest = 0.0;
    for (const auto& p : poles()) {
        const double re = std::fabs(p.real());
        if (re > 0.0) slowest = std::max(slowest, 1.0 / re);
    }
    return slowest;
}

bool Realization::stable() const {
    for (const auto& p : poles())
        if (p.real() >= 0.0) return false;
    return true;
}

Realization realize_impedance(const Impedance& z) {
    if (z.num.empty() || z.den.empty() || is_zero_poly(z.den))
        throw SimError(ErrorCode::DegenerateDenominator, "circuit.impedance_den",
                       "impedance denominator is the zero polynomial");
    if (is_zero_poly(z.num))
        throw SimError(ErrorCode::ImproperImpedance, "circuit.impedance_num",
                       "impedance numerator is the zero polynomial (dc short)");

    // Admittance Y = den_Z / num_Z.
    const std::vector<double> yn = stripped(z.den);
    const std::vector<double> yd = stripped(z.num);
    if (yn.size() > yd.size())
        throw SimError(ErrorCode::ImproperImpedance, "circuit.impedance_den",
                       "admittance 1/Z is improper (differentiating network)");
    if (yd[0] == 0.0)
        throw SimError(ErrorCode::ImproperImpedance, "circuit.impedance_num",
                       "admittance has a pole at s = 0 (dc short through the network)");

    const std::size_t n = yd.size() - 1; // state dimension
    const double lead = yd[n];

    // Monic denominator a_i and numerator padded to the same length.
    std::vector<double> a(n), b(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        a[i] = yd[i] / lead;
    for (std::size_t i = 0; i < yn.size(); ++i)
        b[i] = yn[i] / lead;

    Realization r;
    r.order = n;
    r.D = b[n];
    if (n == 0) return r;

    // Controllable canonical form: companion bottom row -a_i, B = e_n,
    // C_i = b_i - a_i * b_n.
    r.A.assign(n * n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i)
        r.A[i * n + (i + 1)] = 1.0;
    for (std::size_t j = 0; j < n; ++j)
        r.A[(n - 1) * n + j] = -a[j];
    r.B.assign(n, 0.0);
    r.B[n - 1] = 1.0;
    r.C.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        r.C[i] = b[i] - a[i] * r.D;
    return r;
}

double verify_realization(const Realization& r, const Impedance& z,
                          double w_lo, double w_hi, int count) {
    double worst = 0.0;
    for (int k = 0; k < count; ++k) {
        const double f = (count == 1) ? 0.0
                                      : static_cast<double>(k) / (count - 1);
        const double w = w_lo * std::pow(w_hi / w_lo, f);
        const std::complex<double> s(0.0, w);
        const std::complex<double> y_ref = 1.0 / z.evaluate(s);
        const std::complex<double> y_ss = r.admittance_at(s);
        const double rel = std::abs(y_ss - y_ref) / std::abs(y_ref);
        worst = std::max(worst, rel);
    }
    return worst;
}

bool passivity_sample(const Impedance& z, double w_lo, double w_hi, int count) {
    for (int k = 0; k < count; ++k) {
        const double f = (count == 1) ? 0.0
                                      : static_cast<double>(k) / (count - 1);
        const double w = w_lo * std::pow(w_hi / w_lo, f);
        if (z.evaluate({0.0, w}).real() < 0.0) return false;
    }
    return true;
}

} // namespace eopulse::network

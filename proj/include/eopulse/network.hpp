#pragma once

#include <complex>
#include <vector>

namespace eopulse::network {

/// External series network seen by the device capacitor, specified as a
/// rational impedance Z(s) = num(s)/den(s), coefficients ascending in s.
/// The realized system is the admittance Y(s) = 1/Z(s); realizability
/// requires Y proper (deg num_Z >= deg den_Z) and Y finite at s = 0
/// (num_Z(0) != 0, i.e. no dc short through the network).
struct Impedance {
    std::vector<double> num;
    std::vector<double> den;

    static Impedance pure_resistance(double R) { return {{R}, {1.0}}; }
    std::complex<double> evaluate(std::complex<double> s) const;
};

/// Controllable-canonical state-space realization of the admittance:
///   xdot = A x + B u,   J = C x + D u
/// with u the terminal voltage across the network and J the loop current.
struct Realization {
    std::size_t order = 0;
    std::vector<double> A; // row-major order x order
    std::vector<double> B;
    std::vector<double> C;
    double D = 0.0;

    std::complex<double> admittance_at(std::complex<double> s) const;
    /// Eigenvalues of A (network poles).
    std::vector<std::complex<double>> poles() const;
    /// Largest 1/|Re(pole)|; 0 for a static network.
    double slowest_time_constant() const;
    bool stable() const;
};

Realization realize_impedance(const Impedance& z);

/// Max relative deviation |Y_ss - 1/Z| / |1/Z| over `count` log-spaced
/// frequencies in [w_lo, w_hi]; the realization acceptance check.
double verify_realization(const Realization& r, const Impedance& z,
                          double w_lo, double w_hi, int count = 20);

/// Samples Re Z(iw) over log-spaced frequencies; false if any is negative
/// (non-passive network). Diagnostic only, never a hard error.
bool passivity_sample(const Impedance& z, double w_lo, double w_hi, int count = 40);

} // namespace eopulse::network

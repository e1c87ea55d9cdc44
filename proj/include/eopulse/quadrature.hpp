#pragma once

#include <span>

namespace eopulse::quadrature {

struct Result {
    double value = 0.0;
    /// Richardson estimate |S_h - S_2h| / 15 propagated from the half-rate
    /// grid; an absolute error bound for smooth integrands.
    double error_estimate = 0.0;
};

/// Composite Simpson rule on a uniform grid. Requires samples.size() == 4m+1
/// so the half-rate comparison grid is itself Simpson-valid.
Result simpson(std::span<const double> samples, double dt);

double trapezoid(std::span<const double> samples, double dt);

} // namespace eopulse::quadrature

#include "kernels_detail.hpp"

#include <cmath>

// Reference implementations. Kept branch-free and in the same expression
// shape as the vector paths so the map kernels round identically.
namespace eopulse::kernels::detail::scalar {

void fma_abc(const double* x, const double* y, double a, double b, double c,
             double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        out[i] = (a * x[i]) + (b * y[i]) + c;
}

void scale(const double* x, double a, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        out[i] = a * x[i];
}

void multiply(const double* x, const double* y, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        out[i] = x[i] * y[i];
}

void abs_val(const double* x, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        out[i] = std::fabs(x[i]);
}

double sum(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        acc += x[i];
    return acc;
}

double dot(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        acc += x[i] * y[i];
    return acc;
}

double max_abs(const double* x, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = std::fabs(x[i]);
        if (v > m) m = v;
    }
    return m;
}

} // namespace eopulse::kernels::detail::scalar

#include "eopulse/quadrature.hpp"

#include <cmath>
#include <stdexcept>

#include "eopulse/kernels.hpp"

namespace eopulse::quadrature {

namespace {

// Simpson sum over a strided view: samples[first], samples[first+stride], ...
double simpson_strided(std::span<const double> f, std::size_t stride, double dt) {
    const std::size_t count = (f.size() - 1) / stride + 1; // points used
    const double h = dt * static_cast<double>(stride);
    double odd = 0.0, even = 0.0;
    for (std::size_t k = 1, i = stride; k + 1 < count; ++k, i += stride) {
        if (k % 2 == 1)
            odd += f[i];
        else
            even += f[i];
    }
    return (h / 3.0) * (f.front() + f.back() + 4.0 * odd + 2.0 * even);
}

} // namespace

Result simpson(std::span<const double> samples, double dt) {
    const std::size_t n = samples.size();
    if (n < 5 || (n - 1) % 4 != 0)
        throw std::invalid_argument("simpson requires 4m+1 samples, m >= 1");
    if (!(dt > 0.0))
        throw std::invalid_argument("simpson requires dt > 0");

    // Full-rate sum via the stride-2 kernel reduction:
    //   S = h/3 (f0 + f_end + 4*sum_odd + 2*sum_even_interior)
    const double ends = samples.front() + samples.back();
    const double sum_odd = kernels::sum_stride2(samples, 1);
    const double sum_even_all = kernels::sum_stride2(samples, 0);
    const double sum_even_interior = sum_even_all - ends;
    const double full = (dt / 3.0) * (ends + 4.0 * sum_odd + 2.0 * sum_even_interior);

    const double half = simpson_strided(samples, 2, dt);
    return {full, std::fabs(full - half) / 15.0};
}

double trapezoid(std::span<const double> samples, double dt) {
    if (samples.size() < 2)
        throw std::invalid_argument("trapezoid requires at least 2 samples");
    const double total = kernels::sum(samples);
    return dt * (total - 0.5 * (samples.front() + samples.back()));
}

} // namespace eopulse::quadrature

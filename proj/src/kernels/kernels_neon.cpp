#include "kernels_detail.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cmath>

// NEON variants, two doubles per lane-pair. Same mul+add discipline as the
// AVX2 unit: vmlaq_f64 fuses, so it is avoided in the map kernels.
namespace eopulse::kernels::detail::neon {

void fma_abc(const double* x, const double* y, double a, double b, double c,
             double* out, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(a);
    const float64x2_t vb = vdupq_n_f64(b);
    const float64x2_t vc = vdupq_n_f64(c);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t vx = vld1q_f64(x + i);
        const float64x2_t vy = vld1q_f64(y + i);
        const float64x2_t t =
            vaddq_f64(vaddq_f64(vmulq_f64(va, vx), vmulq_f64(vb, vy)), vc);
        vst1q_f64(out + i, t);
    }
    for (; i < n; ++i)
        out[i] = (a * x[i]) + (b * y[i]) + c;
}

void scale(const double* x, double a, double* out, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(out + i, vmulq_f64(va, vld1q_f64(x + i)));
    for (; i < n; ++i)
        out[i] = a * x[i];
}

void multiply(const double* x, const double* y, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(out + i, vmulq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
    for (; i < n; ++i)
        out[i] = x[i] * y[i];
}

void abs_val(const double* x, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(out + i, vabsq_f64(vld1q_f64(x + i)));
    for (; i < n; ++i)
        out[i] = std::fabs(x[i]);
}

double sum(const double* x, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        acc = vaddq_f64(acc, vld1q_f64(x + i));
    double total = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
    for (; i < n; ++i)
        total += x[i];
    return total;
}

double dot(const double* x, const double* y, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        acc = vaddq_f64(acc, vmulq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
    double total = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
    for (; i < n; ++i)
        total += x[i] * y[i];
    return total;
}

double max_abs(const double* x, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        acc = vmaxq_f64(acc, vabsq_f64(vld1q_f64(x + i)));
    double m = vgetq_lane_f64(acc, 0);
    const double m1 = vgetq_lane_f64(acc, 1);
    if (m1 > m) m = m1;
    for (; i < n; ++i) {
        const double v = std::fabs(x[i]);
        if (v > m) m = v;
    }
    return m;
}

} // namespace eopulse::kernels::detail::neon

#endif // __aarch64__

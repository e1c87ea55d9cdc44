#include "kernels_detail.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>

// AVX2 variants. Deliberately mul+add (no _mm256_fmadd_pd): combined with
// -ffp-contract=off on the scalar unit this keeps the map kernels bitwise
// equal to the reference. Reductions run four lanes and fold at the end, so
// their rounding differs from the scalar order; callers treat reduction
// results as approximate to machine precision.
namespace eopulse::kernels::detail::avx2 {

void fma_abc(const double* x, const double* y, double a, double b, double c,
             double* out, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    const __m256d vb = _mm256_set1_pd(b);
    const __m256d vc = _mm256_set1_pd(c);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vx = _mm256_loadu_pd(x + i);
        const __m256d vy = _mm256_loadu_pd(y + i);
        const __m256d t = _mm256_add_pd(
            _mm256_add_pd(_mm256_mul_pd(va, vx), _mm256_mul_pd(vb, vy)), vc);
        _mm256_storeu_pd(out + i, t);
    }
    for (; i < n; ++i)
        out[i] = (a * x[i]) + (b * y[i]) + c;
}

void scale(const double* x, double a, double* out, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    for (; i < n; ++i)
        out[i] = a * x[i];
}

void multiply(const double* x, const double* y, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(x + i),
                                                _mm256_loadu_pd(y + i)));
    for (; i < n; ++i)
        out[i] = x[i] * y[i];
}

namespace {
inline __m256d abs_mask(__m256d v) {
    const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
    return _mm256_and_pd(v, mask);
}

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline double hmax(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d m = _mm_max_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_max_sd(m, _mm_unpackhi_pd(m, m)));
}
} // namespace

void abs_val(const double* x, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, abs_mask(_mm256_loadu_pd(x + i)));
    for (; i < n; ++i)
        out[i] = std::fabs(x[i]);
}

double sum(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    double total = hsum(acc);
    for (; i < n; ++i)
        total += x[i];
    return total;
}

double dot(const double* x, const double* y, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(x + i),
                                               _mm256_loadu_pd(y + i)));
    double total = hsum(acc);
    for (; i < n; ++i)
        total += x[i] * y[i];
    return total;
}

double max_abs(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_max_pd(acc, abs_mask(_mm256_loadu_pd(x + i)));
    double m = hmax(acc);
    for (; i < n; ++i) {
        const double v = std::fabs(x[i]);
        if (v > m) m = v;
    }
    return m;
}

} // namespace eopulse::kernels::detail::avx2

#endif // x86-64

#include "eopulse/kernels.hpp"

#include <stdexcept>

#include "kernels_detail.hpp"

namespace eopulse::kernels {

namespace {

using detail::Ops;

constexpr Ops kScalarOps{
    detail::scalar::fma_abc, detail::scalar::scale,  detail::scalar::multiply,
    detail::scalar::abs_val, detail::scalar::sum,    detail::scalar::dot,
    detail::scalar::max_abs,
};

#if defined(__x86_64__) || defined(_M_X64)
constexpr Ops kAvx2Ops{
    detail::avx2::fma_abc, detail::avx2::scale,  detail::avx2::multiply,
    detail::avx2::abs_val, detail::avx2::sum,    detail::avx2::dot,
    detail::avx2::max_abs,
};
#endif

#if defined(__aarch64__)
constexpr Ops kNeonOps{
    detail::neon::fma_abc, detail::neon::scale,  detail::neon::multiply,
    detail::neon::abs_val, detail::neon::sum,    detail::neon::dot,
    detail::neon::max_abs,
};
#endif

Backend detect() {
#if defined(__x86_64__) || defined(_M_X64)
    if (__builtin_cpu_supports("avx2")) return Backend::avx2;
    return Backend::scalar;
#elif defined(__aarch64__)
    return Backend::neon; // mandatory on AArch64
#else
    return Backend::scalar;
#endif
}

struct State {
    Backend backend = detect();
    const Ops* ops = nullptr;
};

State& state() {
    static State s;
    if (s.ops == nullptr) {
        switch (s.backend) {
#if defined(__x86_64__) || defined(_M_X64)
            case Backend::avx2: s.ops = &kAvx2Ops; break;
#endif
#if defined(__aarch64__)
            case Backend::neon: s.ops = &kNeonOps; break;
#endif
            default: s.ops = &kScalarOps; break;
        }
    }
    return s;
}

} // namespace

Backend active_backend() { return state().backend; }

bool backend_available(Backend b) {
    switch (b) {
        case Backend::scalar: return true;
        case Backend::avx2:
#if defined(__x86_64__) || defined(_M_X64)
            return __builtin_cpu_supports("avx2") != 0;
#else
            return false;
#endif
        case Backend::neon:
#if defined(__aarch64__)
            return true;
#else
            return false;
#endif
    }
    return false;
}

void set_backend(Backend b) {
    if (!backend_available(b))
        throw std::runtime_error("kernel backend not available on this machine: " +
                                 backend_name(b));
    State& s = state();
    s.backend = b;
    switch (b) {
#if defined(__x86_64__) || defined(_M_X64)
        case Backend::avx2: s.ops = &kAvx2Ops; break;
#endif
#if defined(__aarch64__)
        case Backend::neon: s.ops = &kNeonOps; break;
#endif
        default: s.ops = &kScalarOps; break;
    }
}

std::string backend_name(Backend b) {
    switch (b) {
        case Backend::scalar: return "scalar";
        case Backend::avx2: return "avx2";
        case Backend::neon: return "neon";
    }
    return "?";
}

void fma_abc(std::span<const double> x, std::span<const double> y,
             double a, double b, double c, std::span<double> out) {
    state().ops->fma_abc(x.data(), y.data(), a, b, c, out.data(), out.size());
}

void scale(std::span<const double> x, double a, std::span<double> out) {
    state().ops->scale(x.data(), a, out.data(), out.size());
}

void multiply(std::span<const double> x, std::span<const double> y,
              std::span<double> out) {
    state().ops->multiply(x.data(), y.data(), out.data(), out.size());
}

void abs_val(std::span<const double> x, std::span<double> out) {
    state().ops->abs_val(x.data(), out.data(), out.size());
}

double sum(std::span<const double> x) { return state().ops->sum(x.data(), x.size()); }

double dot(std::span<const double> x, std::span<const double> y) {
    return state().ops->dot(x.data(), y.data(), x.size());
}

double max_abs(std::span<const double> x) {
    return state().ops->max_abs(x.data(), x.size());
}

double sum_stride2(std::span<const double> x, std::size_t first) {
    // Strided gather defeats contiguous loads; a plain loop is fastest here
    // and keeps one association order everywhere it is used.
    double acc = 0.0;
    for (std::size_t i = first; i < x.size(); i += 2)
        acc += x[i];
    return acc;
}

} // namespace eopulse::kernels

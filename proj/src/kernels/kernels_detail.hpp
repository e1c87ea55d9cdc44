#pragma once

#include <cstddef>

// Per-backend raw-pointer entry points. The public span API in kernels.hpp
// dispatches to one of these tables.
namespace eopulse::kernels::detail {

struct Ops {
    void (*fma_abc)(const double*, const double*, double, double, double, double*, std::size_t);
    void (*scale)(const double*, double, double*, std::size_t);
    void (*multiply)(const double*, const double*, double*, std::size_t);
    void (*abs_val)(const double*, double*, std::size_t);
    double (*sum)(const double*, std::size_t);
    double (*dot)(const double*, const double*, std::size_t);
    double (*max_abs)(const double*, std::size_t);
};

namespace scalar {
void fma_abc(const double* x, const double* y, double a, double b, double c,
             double* out, std::size_t n);
void scale(const double* x, double a, double* out, std::size_t n);
void multiply(const double* x, const double* y, double* out, std::size_t n);
void abs_val(const double* x, double* out, std::size_t n);
double sum(const double* x, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
double max_abs(const double* x, std::size_t n);
} // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
void fma_abc(const double* x, const double* y, double a, double b, double c,
             double* out, std::size_t n);
void scale(const double* x, double a, double* out, std::size_t n);
void multiply(const double* x, const double* y, double* out, std::size_t n);
void abs_val(const double* x, double* out, std::size_t n);
double sum(const double* x, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
double max_abs(const double* x, std::size_t n);
} // namespace avx2
#endif

#if defined(__aarch64__)
namespace neon {
void fma_abc(const double* x, const double* y, double a, double b, double c,
             double* out, std::size_t n);
void scale(const double* x, double a, double* out, std::size_t n);
void multiply(const double* x, const double* y, double* out, std::size_t n);
void abs_val(const double* x, double* out, std::size_t n);
double sum(const double* x, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
double max_abs(const double* x, std::size_t n);
} // namespace neon
#endif

} // namespace eopulse::kernels::detail

#pragma once

#include <cstddef>
#include <span>
#include <string>

/// Elementwise maps and reductions over trajectory columns. Every bulk array
/// pass in the library routes through here; a scalar reference implementation
/// always exists and ISA-specific variants (AVX2 on x86-64, NEON on AArch64)
/// are selected once at startup from CPU capabilities.
///
/// Contract: the map kernels (fma_abc, scale, multiply, abs_val) are bitwise
/// identical across backends. Both translation units are built with
/// -ffp-contract=off and the vector paths use plain mul/add, so no backend
/// contracts to FMA. The reductions (sum, dot, max_abs, sum_stride2)
/// accumulate in a different association order per backend and agree only to
/// rounding; tests bound them against a long-double reference.
namespace eopulse::kernels {

enum class Backend { scalar, avx2, neon };

Backend active_backend();
bool backend_available(Backend b);
/// Force a backend (tests use this to compare variants). Throws if the
/// requested backend is not available on this machine.
void set_backend(Backend b);
std::string backend_name(Backend b);

/// out[i] = a*x[i] + b*y[i] + c
void fma_abc(std::span<const double> x, std::span<const double> y,
             double a, double b, double c, std::span<double> out);

/// out[i] = a*x[i]
void scale(std::span<const double> x, double a, std::span<double> out);

/// out[i] = x[i]*y[i]
void multiply(std::span<const double> x, std::span<const double> y,
              std::span<double> out);

/// out[i] = |x[i]|
void abs_val(std::span<const double> x, std::span<double> out);

double sum(std::span<const double> x);
double dot(std::span<const double> x, std::span<const double> y);
double max_abs(std::span<const double> x);

/// x[first] + x[first+2] + x[first+4] + ...
double sum_stride2(std::span<const double> x, std::size_t first);

} // namespace eopulse::kernels

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "eopulse/kernels.hpp"

using namespace eopulse;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed,
                               double lo = -1e3, double hi = 1e3) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> d(lo, hi);
    std::vector<double> v(n);
    for (double& x : v) x = d(gen);
    return v;
}

// Reference reductions in extended precision.
long double ref_sum(const std::vector<double>& x) {
    long double s = 0.0L;
    for (double v : x) s += v;
    return s;
}

long double ref_dot(const std::vector<double>& x, const std::vector<double>& y) {
    long double s = 0.0L;
    for (std::size_t i = 0; i < x.size(); ++i)
        s += static_cast<long double>(x[i]) * y[i];
    return s;
}

std::vector<kernels::Backend> available_backends() {
    std::vector<kernels::Backend> out{kernels::Backend::scalar};
    for (auto b : {kernels::Backend::avx2, kernels::Backend::neon})
        if (kernels::backend_available(b)) out.push_back(b);
    return out;
}

struct BackendGuard {
    kernels::Backend saved = kernels::active_backend();
    ~BackendGuard() { kernels::set_backend(saved); }
};

} // namespace

TEST_CASE("map kernels match a scalar loop exactly") {
    BackendGuard guard;
    // Odd length exercises the vector-remainder path.
    const std::size_t n = 1027;
    const auto x = random_vec(n, 11);
    const auto y = random_vec(n, 22);

    for (auto b : available_backends()) {
        kernels::set_backend(b);
        CAPTURE(kernels::backend_name(b));

        std::vector<double> out(n);
        kernels::fma_abc(x, y, 1.75, -0.5, 3.25, out);
        for (std::size_t i = 0; i < n; ++i) {
            const double want = 1.75 * x[i] + (-0.5) * y[i] + 3.25;
            REQUIRE(out[i] == want);
        }

        kernels::scale(x, -2.5, out);
        for (std::size_t i = 0; i < n; ++i) REQUIRE(out[i] == -2.5 * x[i]);

        kernels::multiply(x, y, out);
        for (std::size_t i = 0; i < n; ++i) REQUIRE(out[i] == x[i] * y[i]);

        kernels::abs_val(x, out);
        for (std::size_t i = 0; i < n; ++i) REQUIRE(out[i] == std::fabs(x[i]));
    }
}

TEST_CASE("map kernels are bitwise identical across backends") {
    BackendGuard guard;
    const std::size_t n = 4096 + 3;
    const auto x = random_vec(n, 33);
    const auto y = random_vec(n, 44);

    kernels::set_backend(kernels::Backend::scalar);
    std::vector<double> ref(n), got(n);
    kernels::fma_abc(x, y, 1.0 / 3.0, -7.0 / 11.0, 1e-17, ref);

    for (auto b : available_backends()) {
        kernels::set_backend(b);
        kernels::fma_abc(x, y, 1.0 / 3.0, -7.0 / 11.0, 1e-17, got);
        REQUIRE(std::memcmp(ref.data(), got.data(), n * sizeof(double)) == 0);
    }
}

TEST_CASE("reductions stay within float error of a long-double oracle") {
    BackendGuard guard;
    const std::size_t n = 100001;
    const auto x = random_vec(n, 55);
    const auto y = random_vec(n, 66);

    const double want_sum = static_cast<double>(ref_sum(x));
    const double want_dot = static_cast<double>(ref_dot(x, y));

    for (auto b : available_backends()) {
        kernels::set_backend(b);
        CAPTURE(kernels::backend_name(b));
        // Error bound: n * eps * sum(|terms|)
        double abs_mag = 0.0;
        for (double v : x) abs_mag += std::fabs(v);
        const double tol = 1e-16 * abs_mag * 64.0;
        CHECK(std::fabs(kernels::sum(x) - want_sum) <= tol);

        double dot_mag = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot_mag += std::fabs(x[i] * y[i]);
        CHECK(std::fabs(kernels::dot(x, y) - want_dot) <= 1e-16 * dot_mag * 64.0);
    }
}

TEST_CASE("max_abs and sum_stride2") {
    BackendGuard guard;
    auto x = random_vec(513, 77);
    x[200] = -5e6; // dominant magnitude, negative sign

    for (auto b : available_backends()) {
        kernels::set_backend(b);
        CAPTURE(kernels::backend_name(b));
        CHECK(kernels::max_abs(x) == 5e6);

        long double even = 0.0L, odd = 0.0L;
        double mag = 0.0;
        for (std::size_t i = 0; i < x.size(); i += 2) even += x[i];
        for (std::size_t i = 1; i < x.size(); i += 2) odd += x[i];
        for (double v : x) mag += std::fabs(v);
        const double tol = 1e-16 * mag * 64.0;
        CHECK(std::fabs(kernels::sum_stride2(x, 0) -
                        static_cast<double>(even)) <= tol);
        CHECK(std::fabs(kernels::sum_stride2(x, 1) -
                        static_cast<double>(odd)) <= tol);
    }
}

TEST_CASE("empty and single-element spans") {
    BackendGuard guard;
    for (auto b : available_backends()) {
        kernels::set_backend(b);
        std::vector<double> x{3.5}, out(1);
        CHECK(kernels::sum({}) == 0.0);
        CHECK(kernels::max_abs({}) == 0.0);
        kernels::scale(x, 2.0, out);
        CHECK(out[0] == 7.0);
        CHECK(kernels::sum_stride2(x, 1) == 0.0);
    }
}

TEST_CASE("set_backend rejects an unavailable backend") {
    BackendGuard guard;
    const bool has_avx2 = kernels::backend_available(kernels::Backend::avx2);
    const bool has_neon = kernels::backend_available(kernels::Backend::neon);
    // At most one vector ISA exists on a given machine.
    CHECK(!(has_avx2 && has_neon));
    const auto missing =
        has_avx2 ? kernels::Backend::neon : kernels::Backend::avx2;
    CHECK_THROWS_AS(kernels::set_backend(missing), std::runtime_error);
}

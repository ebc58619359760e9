#include "custseg/error.hpp"
#include "custseg/kernels.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace custseg;
using kernels::Backend;

namespace {

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> d(0.0, 100.0);
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

std::vector<Backend> simd_backends() {
    std::vector<Backend> out;
    for (Backend b : {Backend::Avx2, Backend::Neon})
        if (kernels::supported(b)) out.push_back(b);
    return out;
}

}  // namespace

TEST_CASE("scalar backend is always available") {
    CHECK(kernels::supported(Backend::Scalar));
    CHECK(kernels::table(Backend::Scalar).backend == Backend::Scalar);
    CHECK(kernels::name(Backend::Scalar) == "scalar");
}

TEST_CASE("scalar kernels on a hand case") {
    const double a[] = {1, 2, 3};
    const double b[] = {4, -5, 6};
    CHECK(kernels::scalar::dot(a, b, 3) == 4 - 10 + 18);
    CHECK(kernels::scalar::squared_l2(a, b, 3) == 9 + 49 + 9);
    double y[] = {1, 1, 1};
    kernels::scalar::axpy(2.0, a, y, 3);
    CHECK(y[2] == 7.0);
    double out[3];
    kernels::scalar::abs_diff(2.0, b, out, 3);
    CHECK(out[1] == 7.0);
    const double pts[] = {3, 4, 0, 0};
    kernels::scalar::euclid_diff(0.0, 0.0, pts, out, 2);
    CHECK(out[0] == 5.0);
    CHECK(out[1] == 0.0);
    kernels::scalar::min_add(a, b, a, out, 3);
    CHECK(out[1] == -3.0);
}

TEST_CASE("SIMD elementwise kernels match scalar bit for bit") {
    std::mt19937_64 rng(11);
    const auto& ref = kernels::table(Backend::Scalar);
    for (Backend backend : simd_backends()) {
        const auto& simd = kernels::table(backend);
        CAPTURE(kernels::name(backend));
        for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 16u, 31u, 100u}) {
            const auto x = random_vector(rng, n);
            const auto y = random_vector(rng, n);
            const auto d = random_vector(rng, n);
            const auto pts = random_vector(rng, 2 * n);
            std::vector<double> r1(n), r2(n);

            ref.abs_diff(1.5, x.data(), r1.data(), n);
            simd.abs_diff(1.5, x.data(), r2.data(), n);
            CHECK(r1 == r2);

            ref.euclid_diff(0.3, -2.0, pts.data(), r1.data(), n);
            simd.euclid_diff(0.3, -2.0, pts.data(), r2.data(), n);
            CHECK(r1 == r2);

            ref.min_add(x.data(), y.data(), d.data(), r1.data(), n);
            simd.min_add(x.data(), y.data(), d.data(), r2.data(), n);
            CHECK(r1 == r2);

            r1 = y;
            r2 = y;
            ref.axpy(-0.7, x.data(), r1.data(), n);
            simd.axpy(-0.7, x.data(), r2.data(), n);
            CHECK(r1 == r2);
        }
    }
}

TEST_CASE("SIMD reductions match scalar up to summation order") {
    std::mt19937_64 rng(12);
    const auto& ref = kernels::table(Backend::Scalar);
    for (Backend backend : simd_backends()) {
        const auto& simd = kernels::table(backend);
        for (std::size_t n : {0u, 1u, 3u, 4u, 6u, 13u, 64u, 257u}) {
            const auto x = random_vector(rng, n);
            const auto y = random_vector(rng, n);
            double mag = 0.0;
            for (std::size_t i = 0; i < n; ++i) mag += std::abs(x[i] * y[i]);
            CHECK(std::abs(ref.dot(x.data(), y.data(), n) - simd.dot(x.data(), y.data(), n)) <= 1e-13 * (mag + 1.0));
            const double l2 = ref.squared_l2(x.data(), y.data(), n);
            CHECK(std::abs(l2 - simd.squared_l2(x.data(), y.data(), n)) <= 1e-13 * (l2 + 1.0));
        }
    }
}

TEST_CASE("select switches the active table") {
    const Backend before = kernels::active().backend;
    kernels::select(Backend::Scalar);
    CHECK(kernels::active().backend == Backend::Scalar);
    for (Backend b : {Backend::Avx2, Backend::Neon}) {
        if (!kernels::supported(b)) CHECK_THROWS_AS(kernels::select(b), ConfigError);
    }
    kernels::select(before);
}

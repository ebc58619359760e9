#pragma once

// Data-parallel inner loops shared by DTW, clustering and the LSTM.
//
// Every kernel has a scalar reference implementation plus SIMD variants
// (AVX2 on x86-64, NEON on AArch64). The variant is chosen once at startup
// from CPU features; CUSTSEG_KERNELS=scalar|avx2|neon overrides the choice.
//
// Elementwise kernels (abs_diff, euclid_diff, min_add, axpy) are bit-identical
// across variants. Reductions (dot, squared_l2) differ only in summation order.

#include <cstddef>
#include <span>
#include <string_view>

namespace custseg::kernels {

enum class Backend { Scalar, Avx2, Neon };

struct KernelTable {
    Backend backend;
    double (*dot)(const double* a, const double* b, std::size_t n);
    double (*squared_l2)(const double* a, const double* b, std::size_t n);
    // y[j] += alpha * x[j]
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // out[j] = |a - b[j]|
    void (*abs_diff)(double a, const double* b, double* out, std::size_t n);
    // out[j] = ||(ax, ay) - (b[2j], b[2j+1])||_2
    void (*euclid_diff)(double ax, double ay, const double* b, double* out, std::size_t n);
    // out[j] = min(x[j], y[j]) + d[j]
    void (*min_add)(const double* x, const double* y, const double* d, double* out, std::size_t n);
};

const KernelTable& table(Backend backend);
bool supported(Backend backend) noexcept;
std::string_view name(Backend backend) noexcept;

/// Table used by the library; resolved on first use.
const KernelTable& active() noexcept;

/// Force a backend (tests and benchmarks). Throws ConfigError if the CPU or
/// the build lacks it.
void select(Backend backend);

inline double dot(std::span<const double> a, std::span<const double> b) {
    return active().dot(a.data(), b.data(), a.size());
}
inline double squared_l2(std::span<const double> a, std::span<const double> b) {
    return active().squared_l2(a.data(), b.data(), a.size());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    active().axpy(alpha, x.data(), y.data(), x.size());
}

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double squared_l2(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void abs_diff(double a, const double* b, double* out, std::size_t n);
void euclid_diff(double ax, double ay, const double* b, double* out, std::size_t n);
void min_add(const double* x, const double* y, const double* d, double* out, std::size_t n);
}  // namespace scalar

}  // namespace custseg::kernels

#include "custseg/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace custseg::kernels::scalar {

double dot(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double squared_l2(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void abs_diff(double a, const double* b, double* out, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) out[j] = std::fabs(a - b[j]);
}

void euclid_diff(double ax, double ay, const double* b, double* out, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) {
        const double dx = ax - b[2 * j];
        const double dy = ay - b[2 * j + 1];
        out[j] = std::sqrt(dx * dx + dy * dy);
    }
}

void min_add(const double* x, const double* y, const double* d, double* out, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) out[j] = std::min(x[j], y[j]) + d[j];
}

}  // namespace custseg::kernels::scalar

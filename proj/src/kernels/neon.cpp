#include "kernels_internal.hpp"

#include <arm_neon.h>

#include <algorithm>
#include <cmath>

namespace custseg::kernels::neon {

double dot(const double* a, const double* b, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    double s = vaddvq_f64(acc);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double squared_l2(const double* a, const double* b, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
        acc = vaddq_f64(acc, vmulq_f64(d, d));
    }
    double s = vaddvq_f64(acc);
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(alpha);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, vld1q_f64(x + i))));
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void abs_diff(double a, const double* b, double* out, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(a);
    std::size_t j = 0;
    for (; j + 2 <= n; j += 2) vst1q_f64(out + j, vabsq_f64(vsubq_f64(va, vld1q_f64(b + j))));
    for (; j < n; ++j) out[j] = std::fabs(a - b[j]);
}

void euclid_diff(double ax, double ay, const double* b, double* out, std::size_t n) {
    const float64x2_t va = {ax, ay};
    std::size_t j = 0;
    for (; j + 2 <= n; j += 2) {
        const float64x2_t d0 = vsubq_f64(va, vld1q_f64(b + 2 * j));
        const float64x2_t d1 = vsubq_f64(va, vld1q_f64(b + 2 * j + 2));
        const float64x2_t s = vpaddq_f64(vmulq_f64(d0, d0), vmulq_f64(d1, d1));
        vst1q_f64(out + j, vsqrtq_f64(s));
    }
    for (; j < n; ++j) {
        const double dx = ax - b[2 * j];
        const double dy = ay - b[2 * j + 1];
        out[j] = std::sqrt(dx * dx + dy * dy);
    }
}

void min_add(const double* x, const double* y, const double* d, double* out, std::size_t n) {
    std::size_t j = 0;
    for (; j + 2 <= n; j += 2) vst1q_f64(out + j, vaddq_f64(vminq_f64(vld1q_f64(x + j), vld1q_f64(y + j)), vld1q_f64(d + j)));
    for (; j < n; ++j) out[j] = std::min(x[j], y[j]) + d[j];
}

}  // namespace custseg::kernels::neon

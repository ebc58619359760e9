// Compiled with -mavx2 (no FMA) so elementwise results match the scalar path.
#include "kernels_internal.hpp"

#include <immintrin.h>

#include <algorithm>
#include <cmath>

namespace custseg::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
        acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4)));
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double squared_l2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(d0, d0));
        acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(d1, d1));
    }
    for (; i + 4 <= n; i += 4) {
        const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(d0, d0));
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void abs_diff(double a, const double* b, double* out, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    const __m256d sign = _mm256_set1_pd(-0.0);
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        const __m256d d = _mm256_sub_pd(va, _mm256_loadu_pd(b + j));
        _mm256_storeu_pd(out + j, _mm256_andnot_pd(sign, d));
    }
    for (; j < n; ++j) out[j] = std::fabs(a - b[j]);
}

void euclid_diff(double ax, double ay, const double* b, double* out, std::size_t n) {
    // Two interleaved points per 256-bit register: (x0, y0, x1, y1).
    const __m256d va = _mm256_setr_pd(ax, ay, ax, ay);
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        const __m256d d0 = _mm256_sub_pd(va, _mm256_loadu_pd(b + 2 * j));
        const __m256d d1 = _mm256_sub_pd(va, _mm256_loadu_pd(b + 2 * j + 4));
        const __m256d s0 = _mm256_mul_pd(d0, d0);
        const __m256d s1 = _mm256_mul_pd(d1, d1);
        // hadd gives (s0.x+s0.y, s1.x+s1.y, s0.x'+s0.y', s1.x'+s1.y')
        const __m256d h = _mm256_hadd_pd(s0, s1);
        const __m256d ordered = _mm256_permute4x64_pd(h, 0b11011000);
        _mm256_storeu_pd(out + j, _mm256_sqrt_pd(ordered));
    }
    for (; j < n; ++j) {
        const double dx = ax - b[2 * j];
        const double dy = ay - b[2 * j + 1];
        out[j] = std::sqrt(dx * dx + dy * dy);
    }
}

void min_add(const double* x, const double* y, const double* d, double* out, std::size_t n) {
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        const __m256d m = _mm256_min_pd(_mm256_loadu_pd(x + j), _mm256_loadu_pd(y + j));
        _mm256_storeu_pd(out + j, _mm256_add_pd(m, _mm256_loadu_pd(d + j)));
    }
    for (; j < n; ++j) out[j] = std::min(x[j], y[j]) + d[j];
}

}  // namespace custseg::kernels::avx2

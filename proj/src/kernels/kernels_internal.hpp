#pragma once

#include <cstddef>

#define CUSTSEG_KERNEL_DECLS                                                                 \
    double dot(const double* a, const double* b, std::size_t n);                             \
    double squared_l2(const double* a, const double* b, std::size_t n);                      \
    void axpy(double alpha, const double* x, double* y, std::size_t n);                      \
    void abs_diff(double a, const double* b, double* out, std::size_t n);                    \
    void euclid_diff(double ax, double ay, const double* b, double* out, std::size_t n);     \
    void min_add(const double* x, const double* y, const double* d, double* out, std::size_t n);

namespace custseg::kernels {
#if defined(CUSTSEG_HAVE_AVX2)
namespace avx2 {
CUSTSEG_KERNEL_DECLS
}
#endif
#if defined(CUSTSEG_HAVE_NEON)
namespace neon {
CUSTSEG_KERNEL_DECLS
}
#endif
}  // namespace custseg::kernels

#undef CUSTSEG_KERNEL_DECLS

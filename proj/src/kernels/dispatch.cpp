#include "custseg/error.hpp"
#include "custseg/kernels.hpp"
#include "kernels_internal.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace custseg::kernels {

namespace {

constexpr KernelTable kScalar{Backend::Scalar,   scalar::dot,       scalar::squared_l2, scalar::axpy,
                              scalar::abs_diff, scalar::euclid_diff, scalar::min_add};

#if defined(CUSTSEG_HAVE_AVX2)
constexpr KernelTable kAvx2{Backend::Avx2,     avx2::dot,       avx2::squared_l2, avx2::axpy,
                            avx2::abs_diff,    avx2::euclid_diff, avx2::min_add};
#endif

#if defined(CUSTSEG_HAVE_NEON)
constexpr KernelTable kNeon{Backend::Neon,     neon::dot,       neon::squared_l2, neon::axpy,
                            neon::abs_diff,    neon::euclid_diff, neon::min_add};
#endif

bool cpu_has_avx2() noexcept {
#if defined(CUSTSEG_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

const KernelTable* detect() noexcept {
    if (const char* env = std::getenv("CUSTSEG_KERNELS")) {
        const std::string want(env);
        if (want == "scalar") return &kScalar;
        if (want == "avx2" && supported(Backend::Avx2)) return &table(Backend::Avx2);
        if (want == "neon" && supported(Backend::Neon)) return &table(Backend::Neon);
    }
    if (supported(Backend::Avx2)) return &table(Backend::Avx2);
    if (supported(Backend::Neon)) return &table(Backend::Neon);
    return &kScalar;
}

std::atomic<const KernelTable*> g_active{nullptr};

}  // namespace

bool supported(Backend backend) noexcept {
    switch (backend) {
        case Backend::Scalar:
            return true;
        case Backend::Avx2:
            return cpu_has_avx2();
        case Backend::Neon:
#if defined(CUSTSEG_HAVE_NEON)
            return true;
#else
            return false;
#endif
    }
    return false;
}

std::string_view name(Backend backend) noexcept {
    switch (backend) {
        case Backend::Scalar: return "scalar";
        case Backend::Avx2: return "avx2";
        case Backend::Neon: return "neon";
    }
    return "unknown";
}

const KernelTable& table(Backend backend) {
    if (!supported(backend)) {
        throw ConfigError("kernel backend not available: " + std::string(name(backend)));
    }
    switch (backend) {
#if defined(CUSTSEG_HAVE_AVX2)
        case Backend::Avx2: return kAvx2;
#endif
#if defined(CUSTSEG_HAVE_NEON)
        case Backend::Neon: return kNeon;
#endif
        default: return kScalar;
    }
}

const KernelTable& active() noexcept {
    const KernelTable* t = g_active.load(std::memory_order_acquire);
    if (t == nullptr) {
        t = detect();
        g_active.store(t, std::memory_order_release);
    }
    return *t;
}

void select(Backend backend) { g_active.store(&table(backend), std::memory_order_release); }

}  // namespace custseg::kernels

#include <atomic>

#include "syncstab/kernels/kernels.hpp"

namespace syncstab::kernels {

namespace {

bool cpu_has_avx2() noexcept {
#if defined(SYNCSTAB_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return ok;
#else
    return false;
#endif
}

// -1 = auto, otherwise a Backend value.
std::atomic<int> g_forced{-1};

}  // namespace

std::string_view to_string(Backend b) noexcept {
    return b == Backend::Avx2 ? "avx2" : "scalar";
}

bool backend_available(Backend b) noexcept {
    return b == Backend::Scalar || cpu_has_avx2();
}

Backend active_backend() noexcept {
    const int forced = g_forced.load(std::memory_order_relaxed);
    if (forced >= 0) {
        const auto b = static_cast<Backend>(forced);
        return backend_available(b) ? b : Backend::Scalar;
    }
    return cpu_has_avx2() ? Backend::Avx2 : Backend::Scalar;
}

void force_backend(std::optional<Backend> b) noexcept {
    g_forced.store(b ? static_cast<int>(*b) : -1, std::memory_order_relaxed);
}

void converter_response(std::span<const double> omega, const PllResponse& pll,
                        std::span<double> re, std::span<double> im) {
#if defined(SYNCSTAB_HAVE_AVX2)
    if (active_backend() == Backend::Avx2) return avx2::converter_response(omega, pll, re, im);
#endif
    scalar::converter_response(omega, pll, re, im);
}

void matvec(std::span<const double> a, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<double> y) {
#if defined(SYNCSTAB_HAVE_AVX2)
    if (active_backend() == Backend::Avx2) return avx2::matvec(a, rows, cols, x, y);
#endif
    scalar::matvec(a, rows, cols, x, y);
}

void goertzel_power(std::span<const double> samples, std::span<const double> cycles_per_sample,
                    std::span<double> power) {
#if defined(SYNCSTAB_HAVE_AVX2)
    if (active_backend() == Backend::Avx2) return avx2::goertzel_power(samples, cycles_per_sample, power);
#endif
    scalar::goertzel_power(samples, cycles_per_sample, power);
}

}  // namespace syncstab::kernels

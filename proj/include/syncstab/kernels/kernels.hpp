#pragma once

// Data-parallel inner loops with a scalar reference path and an AVX2 path
// chosen at runtime. Both paths evaluate the same arithmetic, so results
// agree to rounding (FMA contraction is the only difference).

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

namespace syncstab::kernels {

enum class Backend { Scalar, Avx2 };

std::string_view to_string(Backend b) noexcept;

/// True when the backend was compiled in and the CPU supports it.
bool backend_available(Backend b) noexcept;

/// Backend used by the dispatching entry points below.
Backend active_backend() noexcept;

/// Pins the dispatcher to a backend (nullopt restores auto-detection).
/// Requesting an unavailable backend falls back to Scalar.
void force_backend(std::optional<Backend> b) noexcept;

struct PllResponse {
    double omega0;  // rated angular frequency, rad/s
    double kp;
    double ki;
    double u;       // terminal voltage amplitude, p.u.
};

/// Converter-side frequency function over a grid of angular frequencies:
///   re[k] + j im[k] = omega0 (j w / (kp + ki / (j w)) + u) / (j w u),  w = omega[k] > 0.
void converter_response(std::span<const double> omega, const PllResponse& pll,
                        std::span<double> re, std::span<double> im);

/// y = A x with A row-major, rows x cols.
void matvec(std::span<const double> a, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<double> y);

/// Goertzel power |X(f)|^2 / N^2 of `samples` at each normalized frequency
/// (cycles per sample).
void goertzel_power(std::span<const double> samples, std::span<const double> cycles_per_sample,
                    std::span<double> power);

namespace scalar {
void converter_response(std::span<const double> omega, const PllResponse& pll,
                        std::span<double> re, std::span<double> im);
void matvec(std::span<const double> a, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<double> y);
void goertzel_power(std::span<const double> samples, std::span<const double> cycles_per_sample,
                    std::span<double> power);
}  // namespace scalar

namespace avx2 {
void converter_response(std::span<const double> omega, const PllResponse& pll,
                        std::span<double> re, std::span<double> im);
void matvec(std::span<const double> a, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<double> y);
void goertzel_power(std::span<const double> samples, std::span<const double> cycles_per_sample,
                    std::span<double> power);
}  // namespace avx2

}  // namespace syncstab::kernels

#include <cmath>
#include <numbers>

#include "syncstab/kernels/kernels.hpp"

namespace syncstab::kernels::scalar {

void converter_response(std::span<const double> omega, const PllResponse& pll,
                        std::span<double> re, std::span<double> im) {
    const double kp2 = pll.kp * pll.kp;
    const double ki2 = pll.ki * pll.ki;
    for (std::size_t k = 0; k < omega.size(); ++k) {
        const double w = omega[k];
        const double w2 = w * w;
        const double scale = pll.omega0 / (pll.u * (kp2 * w2 + ki2));
        re[k] = scale * pll.kp * w2;
        im[k] = scale * pll.ki * w - pll.omega0 / w;
    }
}

void matvec(std::span<const double> a, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<double> y) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = a.data() + r * cols;
        double acc = 0.0;
        for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
        y[r] = acc;
    }
}

void goertzel_power(std::span<const double> samples, std::span<const double> cycles_per_sample,
                    std::span<double> power) {
    const double n = static_cast<double>(samples.size());
    for (std::size_t f = 0; f < cycles_per_sample.size(); ++f) {
        const double coeff = 2.0 * std::cos(2.0 * std::numbers::pi * cycles_per_sample[f]);
        double s1 = 0.0, s2 = 0.0;
        for (double x : samples) {
            const double s0 = (x - s2) + coeff * s1;
            s2 = s1;
            s1 = s0;
        }
        power[f] = (s1 * s1 + s2 * s2 - coeff * s1 * s2) / (n * n);
    }
}

}  // namespace syncstab::kernels::scalar
